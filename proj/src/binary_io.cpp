#include "phd/binary_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "phd/error.hpp"

namespace phd {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::MissingFile: return "missing file";
    case ErrorCode::MalformedHeader: return "malformed header";
    case ErrorCode::InconsistentFrames: return "inconsistent frame sizes";
    case ErrorCode::EmptyDirectory: return "empty directory";
    case ErrorCode::TruncatedPayload: return "truncated payload";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::EmptyInput: return "empty input";
    case ErrorCode::BadMagic: return "bad magic";
    case ErrorCode::VersionMismatch: return "version mismatch";
    case ErrorCode::ChecksumFailure: return "checksum failure";
    case ErrorCode::IoFailure: return "i/o failure";
  }
  return "unknown";
}

void ByteWriter::put_u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::put_tag(std::string_view tag) {
  if (tag.size() != 4) throw Error(ErrorCode::InvalidArgument, "section tag must be 4 bytes");
  buf_.insert(buf_.end(), tag.begin(), tag.end());
}

void ByteWriter::put_bytes(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

void ByteReader::require(std::size_t n) const {
  if (data_.size() - pos_ < n) throw Error(ErrorCode::TruncatedPayload, "truncated payload");
}

std::uint32_t ByteReader::get_u32() {
  require(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_ + i]} << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::get_u64() {
  require(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
  pos_ += 8;
  return v;
}

double ByteReader::get_f64() { return std::bit_cast<double>(get_u64()); }

std::string ByteReader::get_tag() {
  auto b = get_bytes(4);
  return std::string(b.begin(), b.end());
}

std::span<const std::uint8_t> ByteReader::get_bytes(std::size_t n) {
  require(n);
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path))
    throw Error(ErrorCode::MissingFile, "missing file: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace phd

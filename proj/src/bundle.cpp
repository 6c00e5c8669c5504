#include "phd/bundle.hpp"

#include <algorithm>
#include <sstream>

#include "phd/binary_io.hpp"
#include "phd/error.hpp"

namespace phd {
namespace {

constexpr std::string_view kMagic = "PHDM";

void put_section(ByteWriter& out, std::string_view tag, const ByteWriter& payload) {
  out.put_tag(tag);
  out.put_u64(payload.bytes().size());
  out.put_bytes(payload.bytes());
}

ByteWriter hash_section(const HashModel& h) {
  ByteWriter w;
  w.put_u32(static_cast<std::uint32_t>(h.scale));
  w.put_u32(static_cast<std::uint32_t>(h.bits()));
  w.put_f64(h.lambdas.quantization);
  w.put_f64(h.lambdas.balance);
  w.put_f64(h.lambdas.variance);
  for (Eigen::Index k = 0; k < h.projections.cols(); ++k)
    for (Eigen::Index i = 0; i < h.projections.rows(); ++i) w.put_f64(h.projections(i, k));
  return w;
}

ByteWriter codebook_section(const Codebook& c) {
  ByteWriter w;
  w.put_u32(static_cast<std::uint32_t>(c.scale));
  w.put_u32(static_cast<std::uint32_t>(c.size()));
  w.put_u32(static_cast<std::uint32_t>(c.bits()));
  for (Eigen::Index d = 0; d < c.centroids.rows(); ++d)
    for (Eigen::Index k = 0; k < c.centroids.cols(); ++k) w.put_f64(c.centroids(d, k));
  return w;
}

ByteWriter pca_section(const PcaModel& p) {
  ByteWriter w;
  w.put_u32(static_cast<std::uint32_t>(p.input_dim()));
  w.put_u32(static_cast<std::uint32_t>(p.output_dim()));
  for (Eigen::Index i = 0; i < p.mean.size(); ++i) w.put_f64(p.mean(i));
  for (Eigen::Index j = 0; j < p.basis.cols(); ++j)
    for (Eigen::Index i = 0; i < p.basis.rows(); ++i) w.put_f64(p.basis(i, j));
  for (Eigen::Index j = 0; j < p.eigenvalues.size(); ++j) w.put_f64(p.eigenvalues(j));
  return w;
}

void require_consumed(const ByteReader& r, const char* tag) {
  if (r.remaining() != 0)
    throw Error(ErrorCode::MalformedHeader, std::string("section ") + tag + " has trailing bytes");
}

HashModel read_hash(ByteReader r) {
  HashModel h;
  h.scale = static_cast<int>(r.get_u32());
  const std::uint32_t k = r.get_u32();
  if (h.scale < 3 || h.scale % 2 == 0)
    throw Error(ErrorCode::MalformedHeader, "HASH section has an invalid scale");
  h.lambdas.quantization = r.get_f64();
  h.lambdas.balance = r.get_f64();
  h.lambdas.variance = r.get_f64();
  const auto dim = static_cast<Eigen::Index>(pdv_dim(h.scale));
  h.projections.resize(dim, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) h.projections(i, j) = r.get_f64();
  require_consumed(r, "HASH");
  return h;
}

Codebook read_codebook(ByteReader r) {
  Codebook c;
  c.scale = static_cast<int>(r.get_u32());
  const std::uint32_t d = r.get_u32(), k = r.get_u32();
  c.centroids.resize(d, k);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < k; ++j) c.centroids(i, j) = r.get_f64();
  require_consumed(r, "CDBK");
  return c;
}

PcaModel read_pca(ByteReader r) {
  PcaModel p;
  const std::uint32_t in = r.get_u32(), out = r.get_u32();
  p.mean.resize(in);
  for (Eigen::Index i = 0; i < in; ++i) p.mean(i) = r.get_f64();
  p.basis.resize(in, out);
  for (Eigen::Index j = 0; j < out; ++j)
    for (Eigen::Index i = 0; i < in; ++i) p.basis(i, j) = r.get_f64();
  p.eigenvalues.resize(out);
  for (Eigen::Index j = 0; j < out; ++j) p.eigenvalues(j) = r.get_f64();
  require_consumed(r, "PCA0");
  return p;
}

struct RawSection {
  std::string tag;
  std::span<const std::uint8_t> payload;
};

struct Parsed {
  std::uint32_t version;
  std::vector<RawSection> sections;
};

Parsed parse_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::TruncatedPayload, "truncated bundle");
  ByteReader r(bytes);
  if (r.get_tag() != kMagic) throw Error(ErrorCode::BadMagic, "bad magic: not a model bundle");
  Parsed p;
  p.version = r.get_u32();
  if (p.version != kBundleVersion)
    throw Error(ErrorCode::VersionMismatch, "bundle version " + std::to_string(p.version) +
                                                " != supported " + std::to_string(kBundleVersion));
  const std::uint32_t count = r.get_u32();
  for (std::uint32_t s = 0; s < count; ++s) {
    RawSection sec;
    sec.tag = r.get_tag();
    const std::uint64_t len = r.get_u64();
    if (len > r.remaining()) throw Error(ErrorCode::TruncatedPayload, "truncated bundle section " + sec.tag);
    sec.payload = r.get_bytes(len);
    p.sections.push_back(sec);
  }
  const std::size_t body = r.position();
  const std::uint64_t stored = r.get_u64();
  if (r.remaining() != 0) throw Error(ErrorCode::MalformedHeader, "trailing bytes after bundle");
  if (stored != fnv1a64(bytes.first(body)))
    throw Error(ErrorCode::ChecksumFailure, "bundle checksum mismatch");
  return p;
}

}  // namespace

std::vector<std::uint8_t> encode_bundle(const ModelBundle& b) {
  ByteWriter out;
  out.put_tag(kMagic);
  out.put_u32(b.version);
  const auto sections = static_cast<std::uint32_t>(2 * b.scales.size() + (b.pca ? 1 : 0) + 1);
  out.put_u32(sections);
  for (const auto& s : b.scales) {
    put_section(out, "HASH", hash_section(s.hash));
    put_section(out, "CDBK", codebook_section(s.codebook));
  }
  if (b.pca) put_section(out, "PCA0", pca_section(*b.pca));
  ByteWriter conf;
  const std::string text = format_key_values(to_key_values(b.config));
  conf.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  put_section(out, "CONF", conf);
  out.put_u64(fnv1a64(out.bytes()));
  return out.take();
}

ModelBundle decode_bundle(std::span<const std::uint8_t> bytes) {
  const Parsed p = parse_frame(bytes);
  ModelBundle b;
  b.version = p.version;
  bool have_conf = false;
  std::optional<HashModel> pending;
  for (const auto& sec : p.sections) {
    if (sec.tag == "HASH") {
      if (pending) throw Error(ErrorCode::MalformedHeader, "HASH section without matching CDBK");
      pending = read_hash(ByteReader(sec.payload));
    } else if (sec.tag == "CDBK") {
      if (!pending) throw Error(ErrorCode::MalformedHeader, "CDBK section without preceding HASH");
      Codebook c = read_codebook(ByteReader(sec.payload));
      if (c.scale != pending->scale || c.bits() != pending->bits())
        throw Error(ErrorCode::MalformedHeader, "CDBK section does not match its HASH section");
      b.scales.push_back({std::move(*pending), std::move(c)});
      pending.reset();
    } else if (sec.tag == "PCA0") {
      b.pca = read_pca(ByteReader(sec.payload));
    } else if (sec.tag == "CONF") {
      const std::string text(sec.payload.begin(), sec.payload.end());
      const auto kv = parse_key_values(text);
      apply_key_values(b.config, kv);
      have_conf = true;
    } else {
      throw Error(ErrorCode::MalformedHeader, "unknown bundle section " + sec.tag);
    }
  }
  if (pending || b.scales.empty() || !have_conf)
    throw Error(ErrorCode::MalformedHeader, "bundle is missing sections");
  std::vector<int> scales;
  for (const auto& s : b.scales) scales.push_back(s.scale());
  std::vector<int> configured = b.config.scales;
  std::sort(configured.begin(), configured.end());
  if (scales != configured)
    throw Error(ErrorCode::MalformedHeader, "bundle scales do not match its config");
  return b;
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  write_file(path, encode_bundle(bundle));
}

ModelBundle load_bundle(const std::string& path) { return decode_bundle(read_file(path)); }

std::uint64_t bundle_id(std::span<const std::uint8_t> encoded) {
  ByteReader r(encoded.last(8));
  return r.get_u64();
}

std::vector<SectionInfo> list_sections(std::span<const std::uint8_t> bytes) {
  std::vector<SectionInfo> out;
  for (const auto& s : parse_frame(bytes).sections) out.push_back({s.tag, s.payload.size()});
  return out;
}

std::string describe_bundle(const ModelBundle& b) {
  std::ostringstream out;
  out << "version: " << b.version << '\n';
  for (const auto& s : b.scales)
    out << "scale P=" << s.scale() << ": " << s.hash.bits() << " hash bits over "
        << s.hash.dim() << "-dim PDVs, " << s.codebook.size() << " codewords\n";
  if (b.pca)
    out << "pca: " << b.pca->input_dim() << " -> " << b.pca->output_dim() << '\n';
  else
    out << "pca: none\n";
  out << "config:\n" << format_key_values(to_key_values(b.config));
  return out.str();
}

}  // namespace phd

#include "phd/config.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "phd/binary_io.hpp"
#include "phd/error.hpp"

namespace phd {

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Dyntex5050: return "dyntex-5050";
    case Protocol::Ucla50: return "ucla-50";
    case Protocol::Ucla9: return "ucla-9";
    case Protocol::Synth: return "synth";
  }
  return "?";
}

Protocol parse_protocol(const std::string& name) {
  for (auto p : {Protocol::Dyntex5050, Protocol::Ucla50, Protocol::Ucla9, Protocol::Synth})
    if (name == protocol_name(p)) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown protocol: " + name);
}

ExperimentConfig default_config(Protocol p) {
  ExperimentConfig c;
  c.protocol = p;
  switch (p) {
    case Protocol::Dyntex5050: c.repeats = 5; break;
    case Protocol::Ucla50: c.repeats = 1; c.folds = 4; break;
    case Protocol::Ucla9: c.repeats = 20; break;
    case Protocol::Synth: c.repeats = 1; c.train_cap = 50000; break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (repeats < 1) fail("repeats must be >= 1");
  if (scales.empty()) fail("at least one scale is required");
  for (int s : scales)
    if (s < 3 || s % 2 == 0) fail("scales must be odd and >= 3");
  if (pca_dim < 1) fail("pca_dim must be >= 1");
  if (bits < 2) fail("bits must be >= 2");
  if (codebook_size < 2) fail("codebook_size must be >= 2");
  if (protocol == Protocol::Ucla50 && folds < 2) fail("folds must be >= 2");
  if (protocol == Protocol::Ucla9 && (subvideos < 1 || subvideo_frames < 1))
    fail("sub-video count and length must be positive");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error(ErrorCode::InvalidArgument, "bad value for " + key + ": " + value);
  return out;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<std::size_t>(key, trim(item)));
  return out;
}

Stride parse_stride(const std::string& key, const std::string& value) {
  const auto v = parse_list(key, value);
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() != 3) throw Error(ErrorCode::InvalidArgument, key + " needs 1 or 3 values");
  return {v[0], v[1], v[2]};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void apply_key_values(ExperimentConfig& c, const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "protocol") c.protocol = parse_protocol(value);
    else if (key == "scales") {
      c.scales.clear();
      for (auto s : parse_list(key, value)) c.scales.push_back(static_cast<int>(s));
    }
    else if (key == "bits") c.bits = parse_number<std::size_t>(key, value);
    else if (key == "lambda1") c.lambdas.quantization = parse_number<double>(key, value);
    else if (key == "lambda2") c.lambdas.balance = parse_number<double>(key, value);
    else if (key == "lambda3") c.lambdas.variance = parse_number<double>(key, value);
    else if (key == "hash_iters") c.hash_iters = parse_number<std::size_t>(key, value);
    else if (key == "descent_steps") c.descent_steps = parse_number<std::size_t>(key, value);
    else if (key == "line_search") {
      if (value == "armijo") c.line_search = LineSearch::Armijo;
      else if (value == "cayley") c.line_search = LineSearch::Cayley;
      else throw Error(ErrorCode::InvalidArgument, "line_search must be armijo or cayley");
    }
    else if (key == "codebook_size") c.codebook_size = parse_number<std::size_t>(key, value);
    else if (key == "kmeans_iters") c.kmeans_iters = parse_number<std::size_t>(key, value);
    else if (key == "pca_dim") c.pca_dim = parse_number<std::size_t>(key, value);
    else if (key == "repeats") c.repeats = parse_number<std::size_t>(key, value);
    else if (key == "folds") c.folds = parse_number<std::size_t>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "train_cap") c.train_cap = parse_number<std::size_t>(key, value);
    else if (key == "encode_cap") c.encode_cap = parse_number<std::size_t>(key, value);
    else if (key == "train_stride") c.train_stride = parse_stride(key, value);
    else if (key == "encode_stride") c.encode_stride = parse_stride(key, value);
    else if (key == "subvideos") c.subvideos = parse_number<std::size_t>(key, value);
    else if (key == "subvideo_frames") c.subvideo_frames = parse_number<std::size_t>(key, value);
    else if (key == "transfer_bundle") {
      if (value.empty()) c.transfer_bundle.reset();
      else c.transfer_bundle = value;
    }
    else throw Error(ErrorCode::InvalidArgument, "unknown config key: " + key);
  }
}

KeyValues to_key_values(const ExperimentConfig& c) {
  auto stride = [](Stride s) {
    return std::to_string(s.t) + "," + std::to_string(s.y) + "," + std::to_string(s.x);
  };
  std::string scales;
  for (int s : c.scales) scales += (scales.empty() ? "" : ",") + std::to_string(s);
  KeyValues kv{
      {"protocol", protocol_name(c.protocol)},
      {"scales", scales},
      {"bits", std::to_string(c.bits)},
      {"lambda1", format_double(c.lambdas.quantization)},
      {"lambda2", format_double(c.lambdas.balance)},
      {"lambda3", format_double(c.lambdas.variance)},
      {"hash_iters", std::to_string(c.hash_iters)},
      {"descent_steps", std::to_string(c.descent_steps)},
      {"line_search", c.line_search == LineSearch::Cayley ? "cayley" : "armijo"},
      {"codebook_size", std::to_string(c.codebook_size)},
      {"kmeans_iters", std::to_string(c.kmeans_iters)},
      {"pca_dim", std::to_string(c.pca_dim)},
      {"repeats", std::to_string(c.repeats)},
      {"folds", std::to_string(c.folds)},
      {"seed", std::to_string(c.seed)},
      {"train_cap", std::to_string(c.train_cap)},
      {"encode_cap", std::to_string(c.encode_cap)},
      {"train_stride", stride(c.train_stride)},
      {"encode_stride", stride(c.encode_stride)},
      {"subvideos", std::to_string(c.subvideos)},
      {"subvideo_frames", std::to_string(c.subvideo_frames)},
  };
  if (c.transfer_bundle) kv["transfer_bundle"] = *c.transfer_bundle;
  return kv;
}

ExperimentConfig load_config_file(const std::string& path) {
  const auto bytes = read_file(path);
  const auto kv = parse_key_values(std::string(bytes.begin(), bytes.end()));
  ExperimentConfig c;
  if (auto it = kv.find("protocol"); it != kv.end()) c = default_config(parse_protocol(it->second));
  apply_key_values(c, kv);
  return c;
}

}  // namespace phd

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phd/hashlearn.hpp"
#include "phd/pdv.hpp"

namespace phd {

enum class Protocol { Dyntex5050, Ucla50, Ucla9, Synth };

const char* protocol_name(Protocol p);
Protocol parse_protocol(const std::string& name);

struct ExperimentConfig {
  Protocol protocol = Protocol::Synth;
  std::vector<int> scales{3, 5};

  std::size_t bits = 15;
  HashLambdas lambdas;
  std::size_t hash_iters = 20;
  std::size_t descent_steps = 5;
  LineSearch line_search = LineSearch::Cayley;

  std::size_t codebook_size = 1500;
  std::size_t kmeans_iters = 100;
  std::size_t pca_dim = 500;

  std::size_t repeats = 1;
  std::size_t folds = 4;
  std::uint64_t seed = 0;

  std::size_t train_cap = 200000;  // PDVs per scale over the training corpus
  std::size_t encode_cap = 50000;  // PDVs per video per scale
  Stride train_stride;
  Stride encode_stride;

  std::size_t subvideos = 5;
  std::size_t subvideo_frames = 15;

  std::optional<std::string> transfer_bundle;

  // Throws Error(InvalidArgument) on violated invariants.
  void validate() const;
};

// Protocol constants: dyntex-5050 repeats 5, ucla-50 4 folds, ucla-9 repeats 20.
ExperimentConfig default_config(Protocol p);

using KeyValues = std::map<std::string, std::string>;

// Flat `key = value` text; `#` starts a comment.
KeyValues parse_key_values(const std::string& text);
std::string format_key_values(const KeyValues& kv);

// Overlays recognized keys onto `config`; unknown keys are an error.
void apply_key_values(ExperimentConfig& config, const KeyValues& kv);
KeyValues to_key_values(const ExperimentConfig& config);

ExperimentConfig load_config_file(const std::string& path);

}  // namespace phd

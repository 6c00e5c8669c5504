#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phd/config.hpp"
#include "phd/features.hpp"

namespace phd {

inline constexpr std::uint32_t kBundleVersion = 1;

/// Everything needed to encode videos with a trained pipeline.
struct ModelBundle {
  std::uint32_t version = kBundleVersion;
  std::vector<ScaleModel> scales;  // ascending scale
  std::optional<PcaModel> pca;
  ExperimentConfig config;
};

// "PHDM", u32 version, u32 section count, then (tag, u64 length, payload)
// sections: HASH + CDBK per scale, optional PCA0, CONF. A u64 FNV-1a of all
// preceding bytes closes the file.
std::vector<std::uint8_t> encode_bundle(const ModelBundle& bundle);
ModelBundle decode_bundle(std::span<const std::uint8_t> bytes);

void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

// Checksum trailer of an encoded bundle, used as its id.
std::uint64_t bundle_id(std::span<const std::uint8_t> encoded);

struct SectionInfo {
  std::string tag;
  std::uint64_t length;
};
std::vector<SectionInfo> list_sections(std::span<const std::uint8_t> bytes);

// Human-readable summary for `bundle inspect`.
std::string describe_bundle(const ModelBundle& bundle);

}  // namespace phd

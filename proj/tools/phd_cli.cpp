// Command-line front end: synthesize data, train/inspect model bundles,
// encode features and run evaluation protocols.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phd/binary_io.hpp"
#include "phd/bundle.hpp"
#include "phd/config.hpp"
#include "phd/error.hpp"
#include "phd/protocol.hpp"
#include "phd/video_io.hpp"

namespace fs = std::filesystem;
using namespace phd;

namespace {

const std::vector<std::string> kConfigKeys = {
    "protocol",   "scales",       "bits",          "lambda1",       "lambda2",
    "lambda3",    "hash_iters",   "descent_steps", "line_search",   "codebook_size",
    "kmeans_iters", "pca_dim",    "repeats",       "folds",         "seed",
    "train_cap",  "encode_cap",   "train_stride",  "encode_stride", "subvideos",
    "subvideo_frames", "transfer_bundle"};

struct ConfigFlags {
  std::optional<std::string> config_file;
  std::map<std::string, std::optional<std::string>> values;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "flat key = value config file");
    for (const auto& key : kConfigKeys) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      cmd->add_option(flag, values[key]);
    }
  }

  // Defaults for the protocol, then the config file, then explicit flags.
  ExperimentConfig resolve() const {
    KeyValues file_kv;
    if (config_file) {
      const auto bytes = read_file(*config_file);
      file_kv = parse_key_values(std::string(bytes.begin(), bytes.end()));
    }
    KeyValues flag_kv;
    for (const auto& [k, v] : values)
      if (v) flag_kv[k] = *v;
    std::string protocol = "synth";
    if (auto it = file_kv.find("protocol"); it != file_kv.end()) protocol = it->second;
    if (auto it = flag_kv.find("protocol"); it != flag_kv.end()) protocol = it->second;
    ExperimentConfig c = default_config(parse_protocol(protocol));
    apply_key_values(c, file_kv);
    apply_key_values(c, flag_kv);
    c.validate();
    return c;
  }
};

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

DatasetManifest training_entries(const DatasetManifest& m) {
  bool tagged = false;
  for (const auto& e : m.entries) tagged |= e.split.has_value();
  if (!tagged) return m;
  DatasetManifest out;
  for (const auto& e : m.entries)
    if (e.split && *e.split == "train") out.entries.push_back(e);
  if (out.entries.empty()) throw Error(ErrorCode::EmptyInput, "manifest has no entries tagged 'train'");
  return out;
}

int run_eval(const ConfigFlags& flags, const std::string& manifest_path,
             const std::string& report_path, const std::string& predictions_path,
             Method method) {
  const ExperimentConfig config = flags.resolve();
  const Dataset data = load_dataset(load_manifest(manifest_path));
  const Report report = run_protocol(config, data, method);
  std::cout << report.to_table();
  if (!report_path.empty()) write_text(report_path, report.to_csv());
  if (!predictions_path.empty()) write_text(predictions_path, report.predictions_csv(data.manifest));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PDV hashing + dictionary encoding for dynamic texture recognition"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic moving-grating dataset");
  SynthConfig sc;
  std::string synth_out;
  std::uint64_t synth_seed = 7;
  std::size_t cube = 0;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--classes", sc.classes);
  synth->add_option("--videos-per-class", sc.videos_per_class);
  synth->add_option("--frames", sc.frames);
  synth->add_option("--height", sc.height);
  synth->add_option("--width", sc.width);
  synth->add_option("--size", cube, "cube edge; overrides frames/height/width");
  synth->add_option("--noise", sc.noise, "Gaussian noise sigma");
  synth->add_option("--amplitude", sc.amplitude, "amplitude of each grating component");
  synth->add_flag("--flicker", sc.flicker);
  synth->add_option("--seed", synth_seed);

  // crop
  auto* crop = app.add_subcommand("crop", "crop every video to its most-moving window");
  std::string crop_manifest, crop_out;
  std::vector<std::size_t> crop_size;
  crop->add_option("--manifest", crop_manifest)->required();
  crop->add_option("--out", crop_out)->required();
  crop->add_option("--size", crop_size, "T H W")->expected(3)->required();

  // train
  auto* train = app.add_subcommand("train", "train hash functions, codebooks and PCA into a bundle");
  ConfigFlags train_flags;
  train_flags.attach(train);
  std::string train_manifest, train_out;
  train->add_option("--manifest", train_manifest)->required();
  train->add_option("--out", train_out, "bundle path")->required();

  // encode
  auto* encode = app.add_subcommand("encode", "export PCA features for a manifest");
  std::string enc_bundle, enc_manifest, enc_out;
  encode->add_option("--bundle", enc_bundle)->required();
  encode->add_option("--manifest", enc_manifest)->required();
  encode->add_option("--out", enc_out, "feature CSV")->required();

  // eval / baseline
  auto* eval = app.add_subcommand("eval", "run an evaluation protocol");
  ConfigFlags eval_flags;
  eval_flags.attach(eval);
  std::string eval_manifest, eval_report, eval_preds;
  eval->add_option("--manifest", eval_manifest)->required();
  eval->add_option("--report", eval_report, "report CSV path");
  eval->add_option("--predictions", eval_preds, "prediction CSV path");
  eval->get_option("--seed")->required();

  auto* baseline = app.add_subcommand("baseline", "run a protocol with LBP-TOP features");
  ConfigFlags base_flags;
  base_flags.attach(baseline);
  std::string base_manifest, base_report, base_preds;
  baseline->add_option("--manifest", base_manifest)->required();
  baseline->add_option("--report", base_report);
  baseline->add_option("--predictions", base_preds);

  // bundle inspect
  auto* bundle = app.add_subcommand("bundle", "model bundle utilities");
  bundle->require_subcommand(1);
  auto* inspect = bundle->add_subcommand("inspect", "print bundle contents");
  std::string inspect_path;
  inspect->add_option("path", inspect_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      if (cube > 0) sc.frames = sc.height = sc.width = cube;
      const Dataset ds = synth_dataset(sc, synth_seed);
      write_dataset(ds, synth_out);
      std::cout << "wrote " << ds.volumes.size() << " videos to " << synth_out << '\n';
    } else if (*crop) {
      const auto m = load_manifest(crop_manifest);
      fs::create_directories(crop_out);
      DatasetManifest out;
      for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const auto v = crop_motion_window(load_volume(m.entries[i].path), crop_size[0],
                                          crop_size[1], crop_size[2]);
        char name[32];
        std::snprintf(name, sizeof name, "v%05zu.dtvol", i);
        save_volume(v, (fs::path(crop_out) / name).string());
        auto e = m.entries[i];
        e.path = name;
        out.entries.push_back(e);
      }
      save_manifest(out, (fs::path(crop_out) / "manifest.csv").string());
    } else if (*train) {
      const ExperimentConfig config = train_flags.resolve();
      const Dataset data = load_dataset(training_entries(load_manifest(train_manifest)));
      std::vector<const VideoVolume*> vols;
      for (const auto& v : data.volumes) vols.push_back(&v);
      save_bundle(train_bundle(config, vols), train_out);
      std::cout << "trained on " << vols.size() << " videos -> " << train_out << '\n';
    } else if (*encode) {
      const auto bytes = read_file(enc_bundle);
      const ModelBundle b = decode_bundle(bytes);
      if (!b.pca) throw Error(ErrorCode::MalformedHeader, "bundle has no PCA section");
      const auto m = load_manifest(enc_manifest);
      const EncodeOptions opts{b.config.encode_stride, b.config.encode_cap};
      std::string csv = "video_path,label";
      for (std::size_t j = 0; j < b.pca->output_dim(); ++j) csv += ",f" + std::to_string(j);
      csv += '\n';
      char num[40];
      for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const auto raw = encode_video(load_volume(m.entries[i].path), b.scales, opts,
                                      encode_seed(b.config.seed, i));
        const Eigen::VectorXd f = project(*b.pca, raw);
        csv += m.entries[i].path + "," + std::to_string(m.entries[i].label);
        for (Eigen::Index j = 0; j < f.size(); ++j) {
          std::snprintf(num, sizeof num, ",%.17g", f(j));
          csv += num;
        }
        csv += '\n';
      }
      write_text(enc_out, csv);
    } else if (*eval) {
      return run_eval(eval_flags, eval_manifest, eval_report, eval_preds, Method::Hashing);
    } else if (*baseline) {
      return run_eval(base_flags, base_manifest, base_report, base_preds, Method::LbpTop);
    } else if (*inspect) {
      const auto bytes = read_file(inspect_path);
      std::printf("bundle id: %016llx\n", static_cast<unsigned long long>(bundle_id(bytes)));
      for (const auto& s : list_sections(bytes))
        std::printf("section %s: %llu bytes\n", s.tag.c_str(), static_cast<unsigned long long>(s.length));
      std::cout << describe_bundle(decode_bundle(bytes));
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return 2;
  }
  return 0;
}

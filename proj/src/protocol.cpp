#include "phd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "phd/classify.hpp"
#include "phd/error.hpp"
#include "phd/lbp_top.hpp"
#include "phd/rng.hpp"

namespace phd {
namespace {

// Stream ids for derive_seed.
enum : std::uint64_t {
  kSplitStream = 0x5b1,
  kModelStream = 0x30d,
  kEncodeStream = 0xe2c,
  kCorpusStream = 1,
  kHashStream = 2,
  kCodebookStream = 3,
};

std::map<int, std::vector<std::size_t>> by_class(std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  return groups;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

}  // namespace

Split stratified_halves(std::span<const int> labels, std::uint64_t seed) {
  Rng rng(seed);
  Split s;
  for (auto& [label, members] : by_class(labels)) {
    shuffle(members, rng);
    const std::size_t n_train = (members.size() + 1) / 2;
    s.train.insert(s.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.insert(s.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<Split> stratified_folds(std::span<const int> labels, std::size_t folds,
                                    std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "cross-validation needs at least 2 folds");
  Rng rng(seed);
  std::vector<std::size_t> fold_of(labels.size());
  for (auto& [label, members] : by_class(labels)) {
    if (members.size() < folds)
      throw Error(ErrorCode::InvalidArgument, "class " + std::to_string(label) + " has " +
                                                  std::to_string(members.size()) + " samples, fewer than " +
                                                  std::to_string(folds) + " folds");
    shuffle(members, rng);
    for (std::size_t i = 0; i < members.size(); ++i) fold_of[members[i]] = i % folds;
  }
  std::vector<Split> out(folds);
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t f = 0; f < folds; ++f) (fold_of[i] == f ? out[f].test : out[f].train).push_back(i);
  return out;
}

std::vector<ScaleModel> train_scale_models(const ExperimentConfig& config,
                                           std::span<const VideoVolume* const> train,
                                           std::uint64_t seed) {
  std::vector<int> scales = config.scales;
  std::sort(scales.begin(), scales.end());
  std::vector<ScaleModel> models;
  for (int p : scales) {
    const auto s = static_cast<std::uint64_t>(p);
    const PdvMatrix corpus = extract_pdv_corpus(train, p, config.train_stride, config.train_cap,
                                                derive_seed(seed, s, kCorpusStream));
    HashTrainOptions opts;
    opts.bits = config.bits;
    opts.lambdas = config.lambdas;
    opts.iterations = config.hash_iters;
    opts.descent_steps = config.descent_steps;
    opts.search = config.line_search;
    opts.seed = derive_seed(seed, s, kHashStream);
    ScaleModel m;
    m.hash = train_hash(corpus, opts).model;
    const BinaryCodeSet codes = binarize(m.hash, corpus);
    m.codebook = fit_codebook(codes, config.codebook_size, derive_seed(seed, s, kCodebookStream),
                              config.kmeans_iters).book;
    m.codebook.scale = p;
    models.push_back(std::move(m));
  }
  return models;
}

std::uint64_t encode_seed(std::uint64_t seed, std::size_t video, std::size_t sub) {
  return derive_seed(derive_seed(seed, kEncodeStream), video, sub);
}

ModelBundle train_bundle(const ExperimentConfig& config,
                         std::span<const VideoVolume* const> train) {
  config.validate();
  ModelBundle b;
  b.config = config;
  std::sort(b.config.scales.begin(), b.config.scales.end());
  b.config.transfer_bundle.reset();
  b.scales = train_scale_models(config, train, derive_seed(config.seed, kModelStream));
  Eigen::MatrixXd raw;
  const EncodeOptions enc{config.encode_stride, config.encode_cap};
  for (std::size_t i = 0; i < train.size(); ++i) {
    const Eigen::VectorXd f = encode_video(*train[i], b.scales, enc, encode_seed(config.seed, i));
    if (i == 0) raw.resize(static_cast<Eigen::Index>(train.size()), f.size());
    raw.row(static_cast<Eigen::Index>(i)) = f.transpose();
  }
  b.pca = fit_pca(raw, config.pca_dim);
  return b;
}

// ---------------------------------------------------------------------------

double Report::mean() const {
  if (repeats.empty()) return 0;
  double s = 0;
  for (const auto& r : repeats) s += r.accuracy;
  return s / static_cast<double>(repeats.size());
}

double Report::stddev() const {
  if (repeats.size() < 2) return 0;
  const double m = mean();
  double s = 0;
  for (const auto& r : repeats) s += (r.accuracy - m) * (r.accuracy - m);
  return std::sqrt(s / static_cast<double>(repeats.size() - 1));
}

std::string Report::to_csv() const {
  std::string out = "protocol,repeat,accuracy,n_train,n_test,seed\n";
  char line[256];
  for (const auto& r : repeats) {
    std::snprintf(line, sizeof line, "%s,%zu,%.6f,%zu,%zu,%llu\n", protocol.c_str(), r.repeat,
                  r.accuracy, r.n_train, r.n_test, static_cast<unsigned long long>(r.seed));
    out += line;
  }
  return out;
}

std::string Report::to_table() const {
  std::ostringstream out;
  char line[128];
  out << "protocol: " << protocol << '\n';
  out << "repeat  accuracy  n_train  n_test\n";
  for (const auto& r : repeats) {
    std::snprintf(line, sizeof line, "%6zu  %8.4f  %7zu  %6zu\n", r.repeat, r.accuracy, r.n_train, r.n_test);
    out << line;
  }
  std::snprintf(line, sizeof line, "mean %.4f  std %.4f\n", mean(), stddev());
  out << line;
  return out.str();
}

std::string Report::predictions_csv(const DatasetManifest& manifest) const {
  std::string out = "video_path,true_label,predicted_label,similarity\n";
  char tail[96];
  for (const auto& p : predictions) {
    std::snprintf(tail, sizeof tail, ",%d,%d,%.9f\n", p.true_label, p.predicted_label, p.similarity);
    out += manifest.entries.at(p.video).path + tail;
  }
  return out;
}

namespace {

struct Unit {
  std::size_t video;
  std::size_t sub;
  VideoVolume volume;
};

std::vector<Unit> make_units(const ExperimentConfig& config, const Dataset& data,
                             std::span<const std::size_t> videos) {
  std::vector<Unit> units;
  for (std::size_t v : videos) {
    if (config.protocol == Protocol::Ucla9) {
      auto subs = split_subvideos(data.volumes[v], config.subvideos, config.subvideo_frames);
      for (std::size_t s = 0; s < subs.size(); ++s) units.push_back({v, s, std::move(subs[s])});
    } else {
      units.push_back({v, 0, data.volumes[v]});
    }
  }
  return units;
}

RepeatResult evaluate_split(const ExperimentConfig& config, const Dataset& data,
                            const Split& split, std::size_t index, std::uint64_t split_seed,
                            Method method, const ModelBundle* transfer,
                            std::vector<VideoPrediction>& predictions) {
  if (split.train.empty() || split.test.empty())
    throw Error(ErrorCode::InvalidArgument, "split has an empty train or test side");
  const auto train_units = make_units(config, data, split.train);
  const auto test_units = make_units(config, data, split.test);

  std::vector<Eigen::VectorXd> train_feat, test_feat;
  if (method == Method::LbpTop) {
    for (const auto& u : train_units) train_feat.push_back(lbp_top_baseline(u.volume));
    for (const auto& u : test_units) test_feat.push_back(lbp_top_baseline(u.volume));
  } else {
    std::vector<ScaleModel> models;
    if (transfer != nullptr) {
      models = transfer->scales;
    } else {
      std::vector<const VideoVolume*> train_videos;
      for (std::size_t v : split.train) train_videos.push_back(&data.volumes[v]);
      models = train_scale_models(config, train_videos, derive_seed(config.seed, kModelStream, index));
    }
    const EncodeOptions enc{config.encode_stride, config.encode_cap};
    auto encode = [&](const Unit& u) {
      return encode_video(u.volume, models, enc, encode_seed(config.seed, u.video, u.sub));
    };
    Eigen::MatrixXd raw(static_cast<Eigen::Index>(train_units.size()), 0);
    for (std::size_t i = 0; i < train_units.size(); ++i) {
      const Eigen::VectorXd f = encode(train_units[i]);
      if (i == 0) raw.resize(raw.rows(), f.size());
      raw.row(static_cast<Eigen::Index>(i)) = f.transpose();
    }
    const PcaModel pca = fit_pca(raw, config.pca_dim);
    for (Eigen::Index i = 0; i < raw.rows(); ++i) train_feat.push_back(project(pca, raw.row(i).transpose()));
    for (const auto& u : test_units) test_feat.push_back(project(pca, encode(u)));
  }

  std::vector<int> train_labels;
  for (const auto& u : train_units) train_labels.push_back(data.manifest.entries[u.video].label);
  const GallerySet gallery(std::move(train_feat), std::move(train_labels));

  std::map<std::size_t, std::vector<Prediction>> per_video;
  for (std::size_t i = 0; i < test_units.size(); ++i)
    per_video[test_units[i].video].push_back(nn_cosine(gallery, test_feat[i]));
  std::size_t correct = 0;
  for (const auto& [video, preds] : per_video) {
    VideoPrediction vp;
    vp.repeat = index;
    vp.video = video;
    vp.true_label = data.manifest.entries[video].label;
    vp.predicted_label = vote_subvideos(preds);
    std::size_t votes = 0;
    for (const auto& p : preds)
      if (p.label == vp.predicted_label) {
        vp.similarity += p.similarity;
        ++votes;
      }
    vp.similarity /= static_cast<double>(votes);
    if (vp.predicted_label == vp.true_label) ++correct;
    predictions.push_back(vp);
  }

  RepeatResult r;
  r.repeat = index;
  r.n_train = split.train.size();
  r.n_test = split.test.size();
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n_test);
  r.seed = split_seed;
  return r;
}

}  // namespace

Report run_protocol(const ExperimentConfig& config, const Dataset& data, Method method) {
  config.validate();
  if (data.volumes.size() != data.manifest.entries.size())
    throw Error(ErrorCode::DimensionMismatch, "dataset volumes and manifest differ in length");
  if (data.volumes.empty()) throw Error(ErrorCode::EmptyInput, "dataset is empty");
  std::vector<int> labels;
  for (const auto& e : data.manifest.entries) labels.push_back(e.label);

  std::optional<ModelBundle> transfer;
  if (method == Method::Hashing && config.transfer_bundle) transfer = load_bundle(*config.transfer_bundle);

  Report report;
  report.protocol = protocol_name(config.protocol);
  if (method == Method::LbpTop) report.protocol += "+lbp-top";
  if (config.protocol == Protocol::Ucla50) {
    for (std::size_t r = 0; r < config.repeats; ++r) {
      const std::uint64_t s = derive_seed(config.seed, kSplitStream, r);
      const auto folds = stratified_folds(labels, config.folds, s);
      for (std::size_t f = 0; f < folds.size(); ++f)
        report.repeats.push_back(evaluate_split(config, data, folds[f], r * config.folds + f, s,
                                                method, transfer ? &*transfer : nullptr,
                                                report.predictions));
    }
  } else {
    for (std::size_t r = 0; r < config.repeats; ++r) {
      const std::uint64_t s = derive_seed(config.seed, kSplitStream, r);
      report.repeats.push_back(evaluate_split(config, data, stratified_halves(labels, s), r, s,
                                              method, transfer ? &*transfer : nullptr,
                                                report.predictions));
    }
  }
  return report;
}

}  // namespace phd

#include "phd/classify.hpp"

#include <limits>
#include <map>

#include "phd/error.hpp"

namespace phd {

GallerySet::GallerySet(std::vector<Eigen::VectorXd> features, std::vector<int> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.empty()) throw Error(ErrorCode::EmptyInput, "gallery is empty");
  if (features_.size() != labels_.size())
    throw Error(ErrorCode::DimensionMismatch, "gallery features and labels differ in length");
  norms_.reserve(features_.size());
  for (const auto& f : features_) {
    if (f.size() != features_.front().size())
      throw Error(ErrorCode::DimensionMismatch, "gallery features differ in dimension");
    const double n = f.norm();
    if (!(n > 0)) throw Error(ErrorCode::InvalidArgument, "gallery contains a zero-norm feature");
    norms_.push_back(n);
  }
}

Prediction nn_cosine(const GallerySet& gallery, const Eigen::VectorXd& probe) {
  if (static_cast<std::size_t>(probe.size()) != gallery.dim())
    throw Error(ErrorCode::DimensionMismatch, "probe dimension differs from gallery");
  const double pn = probe.norm();
  if (!(pn > 0)) throw Error(ErrorCode::InvalidArgument, "probe has zero norm");
  Prediction best;
  best.similarity = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    const double s = gallery.feature(i).dot(probe) / (gallery.norm(i) * pn);
    if (s > best.similarity) best = {gallery.label(i), s, i};
  }
  return best;
}

int vote_subvideos(std::span<const Prediction> predictions) {
  if (predictions.empty()) throw Error(ErrorCode::EmptyInput, "no sub-video predictions to vote on");
  struct Tally {
    std::size_t votes = 0;
    double similarity = 0;
  };
  std::map<int, Tally> tally;
  for (const auto& p : predictions) {
    auto& t = tally[p.label];
    ++t.votes;
    t.similarity += p.similarity;
  }
  int winner = tally.begin()->first;
  const Tally* w = &tally.begin()->second;
  for (const auto& [label, t] : tally) {
    if (t.votes > w->votes ||
        (t.votes == w->votes && t.similarity / double(t.votes) > w->similarity / double(w->votes))) {
      winner = label;
      w = &t;
    }
  }
  return winner;
}

std::vector<VideoVolume> split_subvideos(const VideoVolume& v, std::size_t count,
                                         std::size_t frames_each) {
  if (count == 0 || frames_each == 0)
    throw Error(ErrorCode::InvalidArgument, "sub-video count and length must be positive");
  if (count * frames_each > v.frames())
    throw Error(ErrorCode::InvalidArgument, "insufficient frames for the requested sub-videos");
  std::vector<VideoVolume> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(v.subvolume(i * frames_each, 0, 0, frames_each, v.height(), v.width()));
  return out;
}

}  // namespace phd

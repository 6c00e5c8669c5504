#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <unistd.h>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phd/error.hpp"
#include "phd/log.hpp"
#include "phd/rng.hpp"
#include "phd/video_io.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("phd_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Error code thrown by f as an int, -1 when nothing was thrown.
template <class F>
int error_code_of(F&& f) {
  try {
    f();
  } catch (const phd::Error& e) {
    return static_cast<int>(e.code());
  }
  return -1;
}

inline int code(phd::ErrorCode c) { return static_cast<int>(c); }

// Collects warnings for the lifetime of the object.
class WarningCapture {
 public:
  WarningCapture() {
    previous_ = phd::log::set_warning_sink([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarningCapture() { phd::log::set_warning_sink(previous_); }
  std::vector<std::string> messages;

 private:
  phd::log::Sink previous_;
};

inline phd::VideoVolume random_volume(std::size_t t, std::size_t h, std::size_t w, std::uint64_t seed) {
  phd::Rng rng(seed);
  std::vector<std::uint8_t> data(t * h * w);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng.uniform_index(256));
  return phd::VideoVolume(t, h, w, std::move(data));
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, phd::Rng& rng,
                                     double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  return m;
}

inline std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()),
                                       std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[std::size_t(i)][std::size_t(j)] = m(i, j);
  return out;
}

}  // namespace testing

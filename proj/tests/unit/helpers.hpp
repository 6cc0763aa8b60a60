#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "bodyio/lie.hpp"
#include "bodyio/random.hpp"

namespace test {

inline bodyio::Vec3 random_vec(bodyio::Rng& rng, double scale = 1.0) {
  return bodyio::Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)) * scale;
}

inline bodyio::RotationSO3 random_rotation(bodyio::Rng& rng) {
  bodyio::Vec3 axis = random_vec(rng).normalized();
  return bodyio::exp_so3(axis * rng.uniform(0.0, 3.0));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("bodyio_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace test

#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mhpl/feature_set.hpp"
#include "mhpl/rng.hpp"

namespace test_util {

// Scratch directory removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("mhpl_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string root() const { return dir_.string(); }

private:
  std::filesystem::path dir_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
}

// Random unit rows in the positive orthant, like post-activation embeddings.
inline mhpl::FeatureSet random_positive_features(mhpl::Index n, mhpl::Index d, int k,
                                                 std::uint64_t seed) {
  mhpl::Rng rng(seed);
  mhpl::FeatureSet fs;
  fs.n = n;
  fs.d = d;
  fs.k = k;
  fs.features.resize(n, d);
  for (mhpl::Index i = 0; i < n; ++i)
    for (mhpl::Index j = 0; j < d; ++j) fs.features(i, j) = rng.uniform() + 1e-3;
  return mhpl::normalize_rows(fs).fs;
}

}  // namespace test_util

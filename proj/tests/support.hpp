// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/embeddings.hpp"
#include "clmn/random.hpp"
#include "clmn/tensor.hpp"

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

namespace clmn::testing {

inline nn::Mat random_mat(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                          double scale = 1.0) {
  Rng rng(seed);
  nn::Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

inline nn::Tensor random_tensor(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                double scale = 1.0) {
  return nn::Tensor::from_mat(random_mat(rows, cols, seed, scale));
}

inline embed::EmbeddingTable table_from(const std::vector<std::string>& words, const nn::Mat& m) {
  embed::EmbeddingTable t(static_cast<std::size_t>(m.cols()));
  for (std::size_t i = 0; i < words.size(); ++i) {
    Eigen::RowVectorXd r = m.row(static_cast<Eigen::Index>(i));
    t.add(words[i], std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
  }
  return t;
}

inline std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("clmn_" + tag + "_" + std::to_string(fnv1a(tag) ^ static_cast<std::uint64_t>(::getpid())));
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

}  // namespace clmn::testing

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mhpl/error.hpp"

namespace mhpl {

// Row-major throughout: sample i is a contiguous row.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

enum class DomainTag : std::uint8_t { Unknown = 0, SourceLike = 1, TargetLike = 2 };

// Embedding matrix with optional per-sample labels and domain tags.
// Arithmetic is f64 in memory; the on-disk FMX1 format stores f32.
struct FeatureSet {
  Index n = 0;
  Index d = 0;
  int k = 0;  // class count; stored explicitly, never inferred from max label
  Mat features;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<DomainTag>> tags;

  bool has_labels() const { return labels.has_value(); }
};

// Throws the matching typed error when any invariant is violated.
void validate(const FeatureSet& fs);

enum class FileFormat { Binary, Csv };

// Binary format "FMX1" or CSV (`f0,...,f{d-1}[,label]`). For a CSV without a
// label column the class count cannot be read from the file, so k_override is
// required; with labels it defaults to max(label)+1 (at least 2).
FeatureSet load_feature_set(const std::string& path, FileFormat format,
                            std::optional<int> k_override = {});

void save_feature_set(const FeatureSet& fs, const std::string& path);
void save_feature_set_csv(const FeatureSet& fs, const std::string& path);

struct NormalizeResult {
  FeatureSet fs;
  std::vector<Index> zero_rows;  // rows left at zero, reported not rescaled
};

// Scales each nonzero row to unit L2 norm. Idempotent.
NormalizeResult normalize_rows(const FeatureSet& fs);

// Queried / not-yet-queried partition of {0..n-1}.
struct SplitAssignment {
  std::vector<Index> labeled_idx;    // ordered as selected
  std::vector<Index> unlabeled_idx;  // ascending
  Index budget = 0;
};

// Builds the complement split and checks the partition invariants.
SplitAssignment make_split(Index n, const std::vector<Index>& labeled_idx);

}  // namespace mhpl

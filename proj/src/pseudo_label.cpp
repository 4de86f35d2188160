#include "mhpl/pseudo_label.hpp"

#include <algorithm>
#include <cmath>

namespace mhpl {

namespace {

void normalize_centroid_row(Mat& c, Index k, std::vector<std::uint8_t>& empty, bool mark_empty) {
  const double norm = c.row(k).norm();
  if (norm == 0.0) {
    if (mark_empty) empty[static_cast<std::size_t>(k)] = 1;
    return;
  }
  c.row(k) /= norm;
}

std::vector<int> assign_by_cosine(const FeatureSet& fs, const Mat& centroids) {
  const Index n = fs.n;
  const int k = static_cast<int>(centroids.rows());
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    double best = -1.0;
    int best_k = 0;
    for (int c = 0; c < k; ++c) {
      const double sim = std::max(0.0, fs.features.row(i).dot(centroids.row(c)));
      if (sim > best) {  // strict: ties stay at the lower class index
        best = sim;
        best_k = c;
      }
    }
    labels[static_cast<std::size_t>(i)] = best_k;
  }
  return labels;
}

}  // namespace

PseudoLabels cluster_assign(const FeatureSet& fs, const Mat& probs, int rounds) {
  validate(fs);
  if (rounds < 0) throw ConfigError("cluster rounds must be >= 0");
  const Index n = fs.n;
  const int k = fs.k;
  if (probs.rows() != n || probs.cols() != k)
    throw DimensionMismatch(0, "probability matrix must be n x K");
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      const double p = probs(i, c);
      if (!(p >= 0.0) || !std::isfinite(p))
        throw NonProbabilityInput("negative or non-finite entry at row " + std::to_string(i));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw NonProbabilityInput("row " + std::to_string(i) + " sums to " + std::to_string(sum));
  }

  PseudoLabels pl;
  pl.empty_class.assign(static_cast<std::size_t>(k), 0);

  // Round 0: soft centroids weighted by class probability mass.
  pl.centroids = Mat::Zero(k, fs.d);
  for (int c = 0; c < k; ++c) {
    double mass = 0.0;
    for (Index i = 0; i < n; ++i) {
      pl.centroids.row(c) += probs(i, c) * fs.features.row(i);
      mass += probs(i, c);
    }
    if (mass == 0.0) throw DegenerateClassMass(c);
    pl.centroids.row(c) /= mass;
    normalize_centroid_row(pl.centroids, c, pl.empty_class, true);
  }
  pl.labels = assign_by_cosine(fs, pl.centroids);

  // Hard refinement rounds.
  for (int r = 0; r < rounds; ++r) {
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    Mat sums = Mat::Zero(k, fs.d);
    for (Index i = 0; i < n; ++i) {
      const int c = pl.labels[static_cast<std::size_t>(i)];
      sums.row(c) += fs.features.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    std::fill(pl.empty_class.begin(), pl.empty_class.end(), 0);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        pl.empty_class[static_cast<std::size_t>(c)] = 1;  // keep previous centroid
        continue;
      }
      const double norm = sums.row(c).norm();
      if (norm == 0.0) {
        pl.empty_class[static_cast<std::size_t>(c)] = 1;
        continue;
      }
      pl.centroids.row(c) = sums.row(c) / norm;
    }
    pl.labels = assign_by_cosine(fs, pl.centroids);
  }
  pl.rounds = rounds;
  return pl;
}

}  // namespace mhpl

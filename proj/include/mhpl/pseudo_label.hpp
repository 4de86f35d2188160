#pragma once

#include <vector>

#include "mhpl/feature_set.hpp"

namespace mhpl {

// Cluster-derived class assignments for every sample, together with the
// centroids that produced them. Re-assigning against the stored centroids
// reproduces the stored labels.
struct PseudoLabels {
  std::vector<int> labels;
  Mat centroids;                        // K x d, rows unit-norm unless flagged
  std::vector<std::uint8_t> empty_class;  // classes that had no mass/members in the last round
  int rounds = 0;

  int k() const { return static_cast<int>(centroids.rows()); }
};

// Weighted-centroid clustering: round 0 builds soft centroids from the given
// class probabilities and assigns by cosine argmax; each further round
// recomputes centroids as hard per-class means (keeping the previous centroid
// for an empty class) and reassigns. Ties go to the lower class index.
PseudoLabels cluster_assign(const FeatureSet& fs, const Mat& probs, int rounds);

}  // namespace mhpl

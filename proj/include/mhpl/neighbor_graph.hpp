#pragma once

#include <string>
#include <vector>

#include "mhpl/feature_set.hpp"

namespace mhpl {

struct PseudoLabels;

// Exact q-nearest-neighbor structure under clamped cosine similarity
// sim(i,j) = max(0, <z_i, z_j>) on unit rows. Self is excluded; ties go to
// the lower sample index. Immutable once built.
struct NeighborGraph {
  int q = 0;
  std::vector<std::vector<Index>> neighbor_idx;   // row i: neighbors, most similar first
  std::vector<std::vector<double>> neighbor_sim;  // matching similarities, in [0,1]

  Index n() const { return static_cast<Index>(neighbor_idx.size()); }
};

// Exhaustive O(n^2 d) search; requires row-normalized input and 1 <= q <= n-1.
NeighborGraph build_graph(const FeatureSet& fs, int q);

// First (most similar) neighbor of sample i.
Index nearest(const NeighborGraph& g, Index i);

// Fraction of sample i's q neighbors carrying each pseudo-label class.
std::vector<double> neighbor_label_distribution(const NeighborGraph& g,
                                                const std::vector<int>& labels, int k, Index i);
std::vector<double> neighbor_label_distribution(const NeighborGraph& g, const PseudoLabels& pl,
                                                Index i);

// Debug dump, columns `i,rank,neighbor,sim`. Not a stable format.
void dump_graph_csv(const NeighborGraph& g, const std::string& path);

}  // namespace mhpl

#pragma once

#include <span>
#include <vector>

#include "mhpl/feature_set.hpp"
#include "mhpl/neighbor_graph.hpp"
#include "mhpl/pseudo_label.hpp"

namespace mhpl {

// Per-sample selection scores. nau[i] == np[i] * na[i] exactly.
struct UncertaintyScores {
  std::vector<double> np;   // neighbor purity, nats, in [0, ln K]
  std::vector<double> na;   // neighbor affinity, in [0, 1]
  std::vector<double> nau;  // neighbor ambient uncertainty

  Index n() const { return static_cast<Index>(nau.size()); }
};

// Entropy (nats) of a probability vector, with 0 ln 0 := 0. Clamped into
// [0, ln K] against rounding.
double neighbor_purity(std::span<const double> dist);

// Arithmetic mean of the neighbor similarities.
double neighbor_affinity(std::span<const double> sims);

// NP, NA and their product for every sample.
UncertaintyScores compute_nau(const FeatureSet& fs, const NeighborGraph& g,
                              const PseudoLabels& pl);

}  // namespace mhpl

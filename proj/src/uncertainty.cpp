#include "mhpl/uncertainty.hpp"

#include <algorithm>
#include <cmath>

namespace mhpl {

double neighbor_purity(std::span<const double> dist) {
  if (dist.empty()) throw NonProbabilityInput("empty distribution");
  double sum = 0.0;
  double h = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || p > 1.0 + 1e-12 || !std::isfinite(p))
      throw NonProbabilityInput("entry " + std::to_string(p));
    sum += p;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw NonProbabilityInput("sums to " + std::to_string(sum));
  return std::clamp(h, 0.0, std::log(static_cast<double>(dist.size())));
}

double neighbor_affinity(std::span<const double> sims) {
  if (sims.empty()) throw NonProbabilityInput("empty similarity list");
  double s = 0.0;
  for (double v : sims) s += v;
  return s / static_cast<double>(sims.size());
}

UncertaintyScores compute_nau(const FeatureSet& fs, const NeighborGraph& g,
                              const PseudoLabels& pl) {
  if (g.n() != fs.n || static_cast<Index>(pl.labels.size()) != fs.n)
    throw DimensionMismatch(0, "feature set, graph, and pseudo-labels disagree on n");
  UncertaintyScores s;
  s.np.resize(static_cast<std::size_t>(fs.n));
  s.na.resize(static_cast<std::size_t>(fs.n));
  s.nau.resize(static_cast<std::size_t>(fs.n));
  for (Index i = 0; i < fs.n; ++i) {
    const auto dist = neighbor_label_distribution(g, pl, i);
    const double np = neighbor_purity(dist);
    const double na = neighbor_affinity(g.neighbor_sim[static_cast<std::size_t>(i)]);
    s.np[static_cast<std::size_t>(i)] = np;
    s.na[static_cast<std::size_t>(i)] = na;
    s.nau[static_cast<std::size_t>(i)] = np * na;
  }
  return s;
}

}  // namespace mhpl

#include "mhpl/neighbor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "mhpl/pseudo_label.hpp"

namespace mhpl {

namespace {

// Plain accumulation loop; the brute-force test oracle evaluates the same
// expression, so both sides see bit-identical similarities.
double clamped_cosine(const double* a, const double* b, Index d) {
  double acc = 0.0;
  for (Index k = 0; k < d; ++k) acc += a[k] * b[k];
  return acc > 0.0 ? std::min(acc, 1.0) : 0.0;
}

}  // namespace

NeighborGraph build_graph(const FeatureSet& fs, int q) {
  validate(fs);
  const Index n = fs.n;
  if (q < 1 || q > n - 1) throw QOutOfRange(q, n);
  for (Index i = 0; i < n; ++i) {
    double sq = 0.0;
    for (Index j = 0; j < fs.d; ++j) sq += fs.features(i, j) * fs.features(i, j);
    const double norm = std::sqrt(sq);
    if (norm != 0.0 && std::abs(norm - 1.0) > 1e-6) throw NotNormalized(i, norm);
  }

  NeighborGraph g;
  g.q = q;
  g.neighbor_idx.assign(static_cast<std::size_t>(n), {});
  g.neighbor_sim.assign(static_cast<std::size_t>(n), {});

  std::vector<Index> cand(static_cast<std::size_t>(n) - 1);
  std::vector<double> sim(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double* zi = fs.features.row(i).data();
    for (Index j = 0; j < n; ++j)
      sim[static_cast<std::size_t>(j)] = clamped_cosine(zi, fs.features.row(j).data(), fs.d);

    Index w = 0;
    for (Index j = 0; j < n; ++j)
      if (j != i) cand[static_cast<std::size_t>(w++)] = j;
    const auto better = [&sim](Index a, Index b) {
      const double sa = sim[static_cast<std::size_t>(a)];
      const double sb = sim[static_cast<std::size_t>(b)];
      return sa > sb || (sa == sb && a < b);
    };
    std::partial_sort(cand.begin(), cand.begin() + q, cand.end(), better);

    auto& row_idx = g.neighbor_idx[static_cast<std::size_t>(i)];
    auto& row_sim = g.neighbor_sim[static_cast<std::size_t>(i)];
    row_idx.assign(cand.begin(), cand.begin() + q);
    row_sim.resize(static_cast<std::size_t>(q));
    for (int r = 0; r < q; ++r)
      row_sim[static_cast<std::size_t>(r)] = sim[static_cast<std::size_t>(row_idx[static_cast<std::size_t>(r)])];
  }
  return g;
}

Index nearest(const NeighborGraph& g, Index i) {
  if (i < 0 || i >= g.n()) throw IndexOutOfRange(i, g.n());
  return g.neighbor_idx[static_cast<std::size_t>(i)][0];
}

std::vector<double> neighbor_label_distribution(const NeighborGraph& g,
                                                const std::vector<int>& labels, int k, Index i) {
  if (i < 0 || i >= g.n()) throw IndexOutOfRange(i, g.n());
  if (static_cast<Index>(labels.size()) != g.n())
    throw DimensionMismatch(0, "pseudo-label count does not cover the graph");
  std::vector<double> dist(static_cast<std::size_t>(k), 0.0);
  const auto& row = g.neighbor_idx[static_cast<std::size_t>(i)];
  const double inv_q = 1.0 / static_cast<double>(g.q);
  for (Index j : row) {
    const int l = labels[static_cast<std::size_t>(j)];
    if (l < 0 || l >= k) throw LabelOutOfRange(j, l, k);
    dist[static_cast<std::size_t>(l)] += inv_q;
  }
  return dist;
}

std::vector<double> neighbor_label_distribution(const NeighborGraph& g, const PseudoLabels& pl,
                                                Index i) {
  return neighbor_label_distribution(g, pl.labels, pl.k(), i);
}

void dump_graph_csv(const NeighborGraph& g, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw UnwritablePath(path);
  f << "i,rank,neighbor,sim\n";
  char buf[64];
  for (Index i = 0; i < g.n(); ++i) {
    const auto& idx = g.neighbor_idx[static_cast<std::size_t>(i)];
    const auto& sim = g.neighbor_sim[static_cast<std::size_t>(i)];
    for (int r = 0; r < g.q; ++r) {
      std::snprintf(buf, sizeof(buf), "%.17g", sim[static_cast<std::size_t>(r)]);
      f << i << ',' << r << ',' << idx[static_cast<std::size_t>(r)] << ',' << buf << "\n";
    }
  }
}

}  // namespace mhpl

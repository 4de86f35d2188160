#include "mhpl/neighbor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "mhpl/rng.hpp"
#include "test_util.hpp"

using namespace mhpl;

namespace {

FeatureSet unit_rows(const std::vector<std::vector<double>>& rows, int k = 2) {
  FeatureSet fs;
  fs.n = static_cast<Index>(rows.size());
  fs.d = static_cast<Index>(rows[0].size());
  fs.k = k;
  fs.features.resize(fs.n, fs.d);
  for (Index i = 0; i < fs.n; ++i)
    for (Index j = 0; j < fs.d; ++j) fs.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return fs;
}

// Independent oracle: full stable sort of all candidate pairs per row, same
// similarity expression as the production code but a different selection path.
struct OracleRow {
  std::vector<Index> idx;
  std::vector<double> sim;
};

OracleRow brute_force_row(const FeatureSet& fs, Index i, int q) {
  std::vector<std::pair<double, Index>> all;
  for (Index j = 0; j < fs.n; ++j) {
    if (j == i) continue;
    double acc = 0.0;
    for (Index t = 0; t < fs.d; ++t) acc += fs.features(i, t) * fs.features(j, t);
    double s = acc > 0.0 ? std::min(acc, 1.0) : 0.0;
    all.push_back({s, j});
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  OracleRow row;
  for (int r = 0; r < q; ++r) {
    row.idx.push_back(all[static_cast<std::size_t>(r)].second);
    row.sim.push_back(all[static_cast<std::size_t>(r)].first);
  }
  return row;
}

}  // namespace

TEST_CASE("nearest angular neighbor wins") {
  const double a = 10.0 * std::numbers::pi / 180.0;
  const FeatureSet fs =
      unit_rows({{1, 0}, {std::cos(a), std::sin(a)}, {0, 1}});
  const NeighborGraph g = build_graph(fs, 1);
  CHECK(g.neighbor_idx[0][0] == 1);
  CHECK(nearest(g, 0) == 1);
  CHECK(nearest(g, 1) == 0);
}

TEST_CASE("duplicated rows give similarity exactly 1 and index tie-breaks") {
  const FeatureSet fs = unit_rows({{1, 0}, {1, 0}, {0, 1}});
  const NeighborGraph g = build_graph(fs, 2);
  CHECK(g.neighbor_sim[0][0] == 1.0);
  CHECK(g.neighbor_sim[1][0] == 1.0);
  CHECK(nearest(g, 0) == 1);
  CHECK(nearest(g, 1) == 0);
  // sample 2 ties between the two duplicates: lower index first
  CHECK(nearest(g, 2) == 0);

  FeatureSet all_same = unit_rows({{1, 0}, {1, 0}, {1, 0}});
  const NeighborGraph g2 = build_graph(all_same, 2);
  for (Index i = 0; i < 3; ++i)
    for (double s : g2.neighbor_sim[static_cast<std::size_t>(i)]) CHECK(s == 1.0);
}

TEST_CASE("matches the brute-force oracle on random instances") {
  for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
    Rng rng(seed);
    const Index n = 50 + static_cast<Index>(rng.below(150));
    const Index d = 2 + static_cast<Index>(rng.below(14));
    const int q = 1 + static_cast<int>(rng.below(9));
    const FeatureSet fs = test_util::random_positive_features(n, d, 3, seed * 91 + 1);
    const NeighborGraph g = build_graph(fs, q);
    for (Index i = 0; i < n; ++i) {
      const OracleRow want = brute_force_row(fs, i, q);
      CHECK(g.neighbor_idx[static_cast<std::size_t>(i)] == want.idx);
      CHECK(g.neighbor_sim[static_cast<std::size_t>(i)] == want.sim);
    }
  }
}

TEST_CASE("n=200 q=9 matches the oracle exactly") {
  const FeatureSet fs = test_util::random_positive_features(200, 12, 3, 77);
  const NeighborGraph g = build_graph(fs, 9);
  for (Index i = 0; i < fs.n; ++i) {
    const OracleRow want = brute_force_row(fs, i, 9);
    REQUIRE(g.neighbor_idx[static_cast<std::size_t>(i)] == want.idx);
    CHECK(nearest(g, i) == want.idx[0]);
  }
}

TEST_CASE("permuting samples permutes the graph") {
  const Index n = 60;
  const FeatureSet fs = test_util::random_positive_features(n, 7, 3, 5);
  const NeighborGraph g = build_graph(fs, 4);

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(99);
  rng.shuffle(perm);  // perm[new] = old

  FeatureSet permuted = fs;
  for (Index i = 0; i < n; ++i)
    permuted.features.row(i) = fs.features.row(perm[static_cast<std::size_t>(i)]);
  const NeighborGraph gp = build_graph(permuted, 4);

  std::vector<Index> inv(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;

  for (Index i = 0; i < n; ++i) {
    const Index old_i = perm[static_cast<std::size_t>(i)];
    for (int r = 0; r < 4; ++r) {
      CHECK(gp.neighbor_idx[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)] ==
            inv[static_cast<std::size_t>(g.neighbor_idx[static_cast<std::size_t>(old_i)][static_cast<std::size_t>(r)])]);
      CHECK(gp.neighbor_sim[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)] ==
            g.neighbor_sim[static_cast<std::size_t>(old_i)][static_cast<std::size_t>(r)]);
    }
  }
}

TEST_CASE("neighbor label distribution") {
  // Synthetic graph: sample 0 has 10 neighbors with a known label split.
  NeighborGraph g;
  g.q = 10;
  g.neighbor_idx.assign(11, {});
  g.neighbor_sim.assign(11, {});
  for (Index j = 1; j <= 10; ++j) {
    g.neighbor_idx[0].push_back(j);
    g.neighbor_sim[0].push_back(1.0);
  }
  SUBCASE("3-4-3 split") {
    const std::vector<int> labels = {0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2};
    const auto dist = neighbor_label_distribution(g, labels, 3, 0);
    CHECK(dist[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(dist[1] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(dist[2] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(dist[0] + dist[1] + dist[2] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("2-1-7 split") {
    const std::vector<int> labels = {0, 0, 0, 1, 2, 2, 2, 2, 2, 2, 2};
    const auto dist = neighbor_label_distribution(g, labels, 3, 0);
    CHECK(dist[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(dist[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(dist[2] == doctest::Approx(0.7).epsilon(1e-12));
  }
  SUBCASE("pure neighborhood") {
    const std::vector<int> labels(11, 0);
    const auto dist = neighbor_label_distribution(g, labels, 3, 0);
    CHECK(dist == std::vector<double>{1.0, 0.0, 0.0});
  }
}

TEST_CASE("distribution outputs are valid probability vectors") {
  const FeatureSet fs = test_util::random_positive_features(80, 6, 4, 21);
  const NeighborGraph g = build_graph(fs, 7);
  Rng rng(22);
  std::vector<int> labels;
  for (Index i = 0; i < fs.n; ++i) labels.push_back(static_cast<int>(rng.below(4)));
  for (Index i = 0; i < fs.n; ++i) {
    const auto dist = neighbor_label_distribution(g, labels, 4, i);
    double sum = 0.0;
    for (double p : dist) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("graph input validation") {
  const FeatureSet fs = test_util::random_positive_features(5, 3, 2, 1);
  CHECK_THROWS_AS(build_graph(fs, 0), QOutOfRange);
  CHECK_THROWS_AS(build_graph(fs, 5), QOutOfRange);
  FeatureSet raw = fs;
  raw.features(2, 0) += 0.5;  // breaks the unit norm
  CHECK_THROWS_AS(build_graph(raw, 2), NotNormalized);
  const NeighborGraph g = build_graph(fs, 2);
  CHECK_THROWS_AS(nearest(g, 5), IndexOutOfRange);
  CHECK_THROWS_AS(nearest(g, -1), IndexOutOfRange);
}

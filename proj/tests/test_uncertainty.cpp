#include "mhpl/uncertainty.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "mhpl/rng.hpp"
#include "test_util.hpp"

using namespace mhpl;

TEST_CASE("neighbor purity values") {
  const std::vector<double> fig_a = {0.3, 0.4, 0.3};
  const double direct = -(2.0 * 0.3 * std::log(0.3) + 0.4 * std::log(0.4));
  CHECK(neighbor_purity(fig_a) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(std::abs(neighbor_purity(fig_a) - 1.08890) <= 1e-4);

  const std::vector<double> pure = {1.0, 0.0, 0.0};
  CHECK(neighbor_purity(pure) == 0.0);

  const std::vector<double> uniform = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  CHECK(std::abs(neighbor_purity(uniform) - std::log(3.0)) <= 1e-9);
}

TEST_CASE("neighbor purity rejects non-probability input") {
  CHECK_THROWS_AS(neighbor_purity(std::vector<double>{0.5, 0.6}), NonProbabilityInput);
  CHECK_THROWS_AS(neighbor_purity(std::vector<double>{-0.1, 1.1}), NonProbabilityInput);
  CHECK_THROWS_AS(neighbor_purity(std::vector<double>{}), NonProbabilityInput);
}

TEST_CASE("neighbor purity stays within [0, ln K]") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(6));
    std::vector<double> p(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (auto& v : p) {
      v = rng.uniform() + 1e-9;
      sum += v;
    }
    for (auto& v : p) v /= sum;
    const double h = neighbor_purity(p);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(k)));
  }
}

TEST_CASE("uniform distribution maximizes purity at fixed K") {
  Rng rng(4);
  const double target = std::log(3.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(3);
    double sum = 0.0;
    for (auto& v : p) {
      v = rng.uniform() + 1e-9;
      sum += v;
    }
    for (auto& v : p) v /= sum;
    CHECK(neighbor_purity(p) <= target + 1e-12);
  }
}

TEST_CASE("neighbor affinity is the arithmetic mean") {
  CHECK(neighbor_affinity(std::vector<double>{1.0, 1.0, 1.0}) == 1.0);
  CHECK(neighbor_affinity(std::vector<double>{0.8, 0.6, 0.4}) ==
        doctest::Approx(0.6).epsilon(1e-12));
  CHECK(neighbor_affinity(std::vector<double>{0.01, 0.02, 0.0}) ==
        doctest::Approx(0.01).epsilon(1e-12));
  CHECK_THROWS_AS(neighbor_affinity(std::vector<double>{}), NonProbabilityInput);
}

namespace {

// n samples where sample 0's neighborhood has a chosen label split and
// similarity profile.
struct Scenario {
  FeatureSet fs;
  NeighborGraph g;
  PseudoLabels pl;
};

Scenario make_scenario(const std::vector<int>& neighbor_labels,
                       const std::vector<double>& neighbor_sims, int k) {
  const Index n = static_cast<Index>(neighbor_labels.size()) + 1;
  Scenario s;
  s.fs = test_util::random_positive_features(n, 4, k, 42);
  s.g.q = static_cast<int>(neighbor_labels.size());
  s.g.neighbor_idx.assign(static_cast<std::size_t>(n), {});
  s.g.neighbor_sim.assign(static_cast<std::size_t>(n), {});
  for (Index i = 0; i < n; ++i) {
    for (Index j = 1; j <= static_cast<Index>(neighbor_labels.size()); ++j) {
      s.g.neighbor_idx[static_cast<std::size_t>(i)].push_back(j == i ? 0 : j);
      s.g.neighbor_sim[static_cast<std::size_t>(i)].push_back(
          neighbor_sims[static_cast<std::size_t>(j - 1)]);
    }
  }
  s.pl.labels.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t j = 0; j < neighbor_labels.size(); ++j)
    s.pl.labels[j + 1] = neighbor_labels[j];
  s.pl.centroids = Mat::Zero(k, 4);
  return s;
}

}  // namespace

TEST_CASE("compute_nau composes purity and affinity") {
  SUBCASE("single-class neighbors annihilate NAU") {
    const Scenario s = make_scenario({0, 0, 0, 0, 0}, {0.9, 0.9, 0.9, 0.9, 0.9}, 3);
    const auto scores = compute_nau(s.fs, s.g, s.pl);
    CHECK(scores.np[0] == 0.0);
    CHECK(scores.nau[0] == 0.0);
    CHECK(scores.na[0] == doctest::Approx(0.9).epsilon(1e-12));
  }
  SUBCASE("3-4-3 split with mean similarity 0.5") {
    std::vector<int> labels;
    for (int i = 0; i < 3; ++i) labels.push_back(0);
    for (int i = 0; i < 4; ++i) labels.push_back(1);
    for (int i = 0; i < 3; ++i) labels.push_back(2);
    const Scenario s = make_scenario(labels, std::vector<double>(10, 0.5), 3);
    const auto scores = compute_nau(s.fs, s.g, s.pl);
    CHECK(std::abs(scores.nau[0] - 0.54445) <= 1e-4);
  }
  SUBCASE("2-1-7 split with affinity 1") {
    std::vector<int> labels;
    for (int i = 0; i < 2; ++i) labels.push_back(0);
    labels.push_back(1);
    for (int i = 0; i < 7; ++i) labels.push_back(2);
    const Scenario s = make_scenario(labels, std::vector<double>(10, 1.0), 3);
    const auto scores = compute_nau(s.fs, s.g, s.pl);
    CHECK(std::abs(scores.nau[0] - 0.80182) <= 1e-4);
    CHECK(scores.na[0] == 1.0);
  }
}

TEST_CASE("nau is exactly the product of np and na") {
  const FeatureSet fs = test_util::random_positive_features(60, 6, 3, 8);
  const NeighborGraph g = build_graph(fs, 5);
  Rng rng(9);
  PseudoLabels pl;
  for (Index i = 0; i < fs.n; ++i) pl.labels.push_back(static_cast<int>(rng.below(3)));
  pl.centroids = Mat::Zero(3, 6);
  const auto scores = compute_nau(fs, g, pl);
  for (Index i = 0; i < fs.n; ++i) {
    CHECK(scores.nau[static_cast<std::size_t>(i)] ==
          scores.np[static_cast<std::size_t>(i)] * scores.na[static_cast<std::size_t>(i)]);
    CHECK(scores.na[static_cast<std::size_t>(i)] >= 0.0);
    CHECK(scores.na[static_cast<std::size_t>(i)] <= 1.0);
  }
}

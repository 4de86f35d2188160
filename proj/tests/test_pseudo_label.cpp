#include "mhpl/pseudo_label.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "mhpl/rng.hpp"
#include "mhpl/synth.hpp"
#include "test_util.hpp"

using namespace mhpl;

namespace {

// Two tight clusters near e0 and e1.
FeatureSet two_clusters(Index per_cluster, std::uint64_t seed, std::vector<int>* truth) {
  Rng rng(seed);
  FeatureSet fs;
  fs.n = 2 * per_cluster;
  fs.d = 4;
  fs.k = 2;
  fs.features.resize(fs.n, fs.d);
  truth->clear();
  for (Index i = 0; i < fs.n; ++i) {
    const int c = i < per_cluster ? 0 : 1;
    truth->push_back(c);
    for (Index j = 0; j < fs.d; ++j) fs.features(i, j) = 0.02 * rng.normal();
    fs.features(i, c) += 1.0;
  }
  return normalize_rows(fs).fs;
}

Mat one_hot(const std::vector<int>& labels, int k) {
  Mat probs = Mat::Zero(static_cast<Index>(labels.size()), k);
  for (Index i = 0; i < probs.rows(); ++i) probs(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  return probs;
}

}  // namespace

TEST_CASE("separated clusters recover their ids") {
  std::vector<int> truth;
  const FeatureSet fs = two_clusters(30, 3, &truth);
  const PseudoLabels pl = cluster_assign(fs, one_hot(truth, 2), 1);
  CHECK(pl.labels == truth);
  CHECK(pl.rounds == 1);
  for (int c = 0; c < 2; ++c)
    CHECK(pl.centroids.row(c).norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("uniform probabilities on identical features tie to class 0") {
  FeatureSet fs;
  fs.n = 5;
  fs.d = 3;
  fs.k = 3;
  fs.features.resize(5, 3);
  for (Index i = 0; i < 5; ++i) fs.features.row(i) << 1, 0, 0;
  const Mat probs = Mat::Constant(5, 3, 1.0 / 3.0);
  const PseudoLabels pl = cluster_assign(fs, probs, 1);
  for (int l : pl.labels) CHECK(l == 0);
  CHECK(pl.centroids.row(0) == pl.centroids.row(1));
}

TEST_CASE("3-class mixture agrees with the generating components") {
  ShiftSpec spec;
  spec.n_source = 300;
  spec.n_target = 300;
  spec.seed = 17;
  const SynthData data = generate(spec);
  const SourceFit fit = train_source_head(data.source);
  const Mat probs = fit.model.probs(data.source.features);
  const PseudoLabels pl = cluster_assign(data.source, probs, 1);
  Index agree = 0;
  for (Index i = 0; i < data.source.n; ++i)
    if (pl.labels[static_cast<std::size_t>(i)] == (*data.source.labels)[static_cast<std::size_t>(i)])
      ++agree;
  CHECK(static_cast<double>(agree) / static_cast<double>(data.source.n) >= 0.99);
}

TEST_CASE("an extra round at the fixed point changes nothing") {
  std::vector<int> truth;
  const FeatureSet fs = two_clusters(25, 9, &truth);
  const Mat probs = one_hot(truth, 2);
  const PseudoLabels one = cluster_assign(fs, probs, 1);
  const PseudoLabels two = cluster_assign(fs, probs, 2);
  REQUIRE(one.labels == two.labels);
  CHECK(one.centroids == two.centroids);
}

TEST_CASE("re-assignment against stored centroids reproduces stored labels") {
  std::vector<int> truth;
  const FeatureSet fs = two_clusters(20, 5, &truth);
  const PseudoLabels pl = cluster_assign(fs, one_hot(truth, 2), 1);
  for (Index i = 0; i < fs.n; ++i) {
    double best = -1.0;
    int best_k = 0;
    for (int c = 0; c < 2; ++c) {
      const double sim = std::max(0.0, fs.features.row(i).dot(pl.centroids.row(c)));
      if (sim > best) {
        best = sim;
        best_k = c;
      }
    }
    CHECK(best_k == pl.labels[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("permutation equivariance") {
  std::vector<int> truth;
  const FeatureSet fs = two_clusters(20, 13, &truth);
  const Mat probs = one_hot(truth, 2);
  const PseudoLabels pl = cluster_assign(fs, probs, 1);

  std::vector<Index> perm(static_cast<std::size_t>(fs.n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(31);
  rng.shuffle(perm);
  FeatureSet permuted = fs;
  Mat pprobs(fs.n, 2);
  for (Index i = 0; i < fs.n; ++i) {
    permuted.features.row(i) = fs.features.row(perm[static_cast<std::size_t>(i)]);
    pprobs.row(i) = probs.row(perm[static_cast<std::size_t>(i)]);
  }
  const PseudoLabels ppl = cluster_assign(permuted, pprobs, 1);
  for (Index i = 0; i < fs.n; ++i)
    CHECK(ppl.labels[static_cast<std::size_t>(i)] ==
          pl.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
}

TEST_CASE("empty hard class keeps its soft centroid") {
  // Class 1's probability mass comes from two rows placed symmetrically
  // around e0, so both soft centroids collapse onto e0 and every sample ties
  // to class 0. The hard round then sees an empty class 1.
  const double a = 5.0 * std::numbers::pi / 180.0;
  FeatureSet fs;
  fs.n = 4;
  fs.d = 3;
  fs.k = 2;
  fs.features.resize(4, 3);
  fs.features << 1, 0, 0,
                 1, 0, 0,
                 std::cos(a), std::sin(a), 0,
                 std::cos(a), -std::sin(a), 0;
  Mat probs(4, 2);
  probs << 1, 0, 1, 0, 0.5, 0.5, 0.5, 0.5;
  const PseudoLabels pl = cluster_assign(fs, probs, 1);
  for (int l : pl.labels) CHECK(l == 0);
  CHECK(pl.empty_class[1] == 1);
  CHECK(pl.centroids.row(1).norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("input validation") {
  std::vector<int> truth;
  const FeatureSet fs = two_clusters(5, 1, &truth);
  Mat bad = one_hot(truth, 2);
  bad(0, 0) = 0.7;  // row no longer sums to 1
  CHECK_THROWS_AS(cluster_assign(fs, bad, 1), NonProbabilityInput);

  // Valid rows but zero total mass in class 1.
  Mat zero_col = Mat::Zero(fs.n, 2);
  zero_col.col(0).setOnes();
  CHECK_THROWS_AS(cluster_assign(fs, zero_col, 1), DegenerateClassMass);

  CHECK_THROWS_AS(cluster_assign(fs, one_hot(truth, 2), -1), ConfigError);
}

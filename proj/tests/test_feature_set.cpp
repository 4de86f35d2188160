#include "mhpl/feature_set.hpp"

#include <cmath>

#include "doctest.h"
#include "mhpl/rng.hpp"
#include "test_util.hpp"

using namespace mhpl;
using test_util::TempDir;

namespace {

FeatureSet small_set() {
  FeatureSet fs;
  fs.n = 2;
  fs.d = 3;
  fs.k = 2;
  fs.features.resize(2, 3);
  fs.features << 1, 0, 0, 0, 1, 0;
  fs.labels = std::vector<int>{0, 1};
  return fs;
}

}  // namespace

TEST_CASE("binary round trip is bit exact") {
  TempDir tmp("fmx");
  const FeatureSet fs = small_set();
  save_feature_set(fs, tmp.path("a.fmx"));
  const FeatureSet back = load_feature_set(tmp.path("a.fmx"), FileFormat::Binary);
  CHECK(back.n == 2);
  CHECK(back.d == 3);
  CHECK(back.k == 2);
  CHECK(back.features == fs.features);
  CHECK(*back.labels == *fs.labels);
  CHECK_FALSE(back.tags.has_value());
}

TEST_CASE("csv parses the smallest labeled file") {
  TempDir tmp("csv");
  test_util::write_file(tmp.path("a.csv"), "f0,f1,label\n1,0,0\n0,1,1\n");
  const FeatureSet fs = load_feature_set(tmp.path("a.csv"), FileFormat::Csv);
  CHECK(fs.n == 2);
  CHECK(fs.d == 2);
  CHECK(fs.k == 2);
  CHECK(fs.features(0, 0) == 1.0);
  CHECK((*fs.labels)[1] == 1);
}

TEST_CASE("non-finite entry names the offending row") {
  TempDir tmp("nan");
  std::string csv = "f0,f1\n";
  for (int i = 0; i < 5; ++i) csv += "1,0\n";
  csv += "nan,0\n";  // row 5
  test_util::write_file(tmp.path("bad.csv"), csv);
  try {
    load_feature_set(tmp.path("bad.csv"), FileFormat::Csv, 2);
    FAIL("expected NonFiniteEntry");
  } catch (const NonFiniteEntry& e) {
    CHECK(e.row == 5);
  }
}

TEST_CASE("validation errors are typed") {
  TempDir tmp("errs");
  SUBCASE("malformed header") {
    test_util::write_file(tmp.path("h.csv"), "x0,x1\n1,2\n");
    CHECK_THROWS_AS(load_feature_set(tmp.path("h.csv"), FileFormat::Csv, 2), MalformedHeader);
  }
  SUBCASE("dimension mismatch") {
    test_util::write_file(tmp.path("d.csv"), "f0,f1\n1,2\n1\n");
    try {
      load_feature_set(tmp.path("d.csv"), FileFormat::Csv, 2);
      FAIL("expected DimensionMismatch");
    } catch (const DimensionMismatch& e) {
      CHECK(e.row == 1);
    }
  }
  SUBCASE("label out of range") {
    test_util::write_file(tmp.path("l.csv"), "f0,label\n1,0\n1,7\n");
    try {
      load_feature_set(tmp.path("l.csv"), FileFormat::Csv, 2);
      FAIL("expected LabelOutOfRange");
    } catch (const LabelOutOfRange& e) {
      CHECK(e.row == 1);
      CHECK(e.label == 7);
    }
  }
  SUBCASE("unlabeled csv needs K") {
    test_util::write_file(tmp.path("u.csv"), "f0,f1\n1,2\n");
    CHECK_THROWS_AS(load_feature_set(tmp.path("u.csv"), FileFormat::Csv), MissingClassCount);
    CHECK_NOTHROW(load_feature_set(tmp.path("u.csv"), FileFormat::Csv, 3));
  }
  SUBCASE("bad magic") {
    test_util::write_file(tmp.path("m.fmx"), "NOPE....................");
    CHECK_THROWS_AS(load_feature_set(tmp.path("m.fmx"), FileFormat::Binary), MalformedHeader);
  }
}

TEST_CASE("unlabeled save omits the label block") {
  TempDir tmp("nolab");
  FeatureSet fs = small_set();
  fs.labels.reset();
  save_feature_set(fs, tmp.path("u.fmx"));
  const FeatureSet back = load_feature_set(tmp.path("u.fmx"), FileFormat::Binary);
  CHECK_FALSE(back.labels.has_value());
}

TEST_CASE("empty set cannot be saved") {
  TempDir tmp("empty");
  FeatureSet fs;
  fs.n = 0;
  fs.d = 3;
  fs.k = 2;
  fs.features.resize(0, 3);
  CHECK_THROWS_AS(save_feature_set(fs, tmp.path("e.fmx")), EmptySet);
}

TEST_CASE("normalize scales the 3-4-5 row") {
  FeatureSet fs;
  fs.n = 1;
  fs.d = 2;
  fs.k = 2;
  fs.features.resize(1, 2);
  fs.features << 3, 4;
  const auto res = normalize_rows(fs);
  CHECK(res.fs.features(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(res.fs.features(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(res.zero_rows.empty());
}

TEST_CASE("normalize is idempotent and reports zero rows") {
  FeatureSet fs;
  fs.n = 3;
  fs.d = 2;
  fs.k = 2;
  fs.features.resize(3, 2);
  fs.features << 3, 4, 0, 0, 1, 1;
  const auto once = normalize_rows(fs);
  REQUIRE(once.zero_rows == std::vector<Index>{1});
  const auto twice = normalize_rows(once.fs);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 2; ++j)
      CHECK(std::abs(twice.fs.features(i, j) - once.fs.features(i, j)) <= 1e-12);
  CHECK(twice.fs.features(1, 0) == 0.0);
}

TEST_CASE("round trip property over random sets") {
  TempDir tmp("prop");
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    FeatureSet fs;
    fs.n = 1 + static_cast<Index>(rng.below(40));
    fs.d = 1 + static_cast<Index>(rng.below(12));
    fs.k = 2 + static_cast<int>(rng.below(5));
    fs.features.resize(fs.n, fs.d);
    for (Index i = 0; i < fs.n; ++i)
      for (Index j = 0; j < fs.d; ++j)
        fs.features(i, j) = static_cast<double>(static_cast<float>(rng.normal() * 10.0));
    if (rng.below(2)) {
      std::vector<int> labels;
      for (Index i = 0; i < fs.n; ++i)
        labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(fs.k))));
      fs.labels = labels;
    }
    if (rng.below(2)) {
      std::vector<DomainTag> tags;
      for (Index i = 0; i < fs.n; ++i) tags.push_back(static_cast<DomainTag>(rng.below(3)));
      fs.tags = tags;
    }
    save_feature_set(fs, tmp.path("rt.fmx"));
    const FeatureSet back = load_feature_set(tmp.path("rt.fmx"), FileFormat::Binary);
    CHECK(back.features == fs.features);
    CHECK(back.labels == fs.labels);
    CHECK(back.tags == fs.tags);
    CHECK(back.k == fs.k);
  }
}

TEST_CASE("csv round trip at f32 precision") {
  TempDir tmp("csvrt");
  const FeatureSet fs = test_util::random_positive_features(17, 5, 3, 3);
  save_feature_set_csv(fs, tmp.path("rt.csv"));
  const FeatureSet back = load_feature_set(tmp.path("rt.csv"), FileFormat::Csv, 3);
  for (Index i = 0; i < fs.n; ++i)
    for (Index j = 0; j < fs.d; ++j)
      CHECK(static_cast<float>(back.features(i, j)) ==
            static_cast<float>(fs.features(i, j)));
}

TEST_CASE("make_split partitions the index range") {
  const auto split = make_split(6, {4, 1});
  CHECK(split.budget == 2);
  CHECK(split.labeled_idx == std::vector<Index>{4, 1});
  CHECK(split.unlabeled_idx == std::vector<Index>{0, 2, 3, 5});
  CHECK_THROWS_AS(make_split(6, {4, 4}), Error);
  CHECK_THROWS_AS(make_split(6, {6}), IndexOutOfRange);
}

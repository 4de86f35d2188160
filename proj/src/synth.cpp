#include "mhpl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mhpl/rng.hpp"

namespace mhpl {

namespace {

// Pairwise distance between class means, in units of sigma. Calibrated so the
// default shift of 4 sigma pushes displaced clusters close enough to the
// decision boundary to confuse the source head while the clusters themselves
// stay separable.
constexpr double kSeparationSigmas = 9.0;

std::vector<Index> balanced_counts(Index n, int k) {
  std::vector<Index> counts(static_cast<std::size_t>(k), n / k);
  for (Index c = 0; c < n % k; ++c) ++counts[static_cast<std::size_t>(c)];
  return counts;
}

// Exactly `total` target-like slots spread over classes by largest remainder.
std::vector<Index> spread_slots(const std::vector<Index>& counts, Index n, Index total) {
  const int k = static_cast<int>(counts.size());
  std::vector<Index> slots(static_cast<std::size_t>(k));
  std::vector<std::pair<double, int>> rem;
  Index assigned = 0;
  for (int c = 0; c < k; ++c) {
    const double exact = static_cast<double>(total) * static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                         static_cast<double>(n);
    slots[static_cast<std::size_t>(c)] = static_cast<Index>(exact);
    assigned += slots[static_cast<std::size_t>(c)];
    rem.push_back({exact - std::floor(exact), c});
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % rem.size()) {
    const int c = rem[i].second;
    if (slots[static_cast<std::size_t>(c)] < counts[static_cast<std::size_t>(c)]) {
      ++slots[static_cast<std::size_t>(c)];
      ++assigned;
    }
  }
  return slots;
}

Vec random_unit(Rng& rng, Index d) {
  Vec v(d);
  while (true) {
    for (Index i = 0; i < d; ++i) v(i) = rng.normal();
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

FeatureSet sample_domain(Rng& rng, const ShiftSpec& spec, Index n, const Mat& means,
                         const std::vector<Index>& class_counts,
                         const std::vector<Index>& shifted_slots, const Mat& shifted_means,
                         std::vector<Index>& class_counts_out, Index& shifted_count_out) {
  struct Slot {
    int cls;
    bool shifted;
  };
  std::vector<Slot> order;
  order.reserve(static_cast<std::size_t>(n));
  for (int c = 0; c < spec.k; ++c)
    for (Index i = 0; i < class_counts[static_cast<std::size_t>(c)]; ++i)
      order.push_back({c, i < shifted_slots[static_cast<std::size_t>(c)]});
  rng.shuffle(order);

  FeatureSet fs;
  fs.n = n;
  fs.d = spec.d;
  fs.k = spec.k;
  fs.features.resize(n, spec.d);
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<DomainTag> tags(static_cast<std::size_t>(n));
  shifted_count_out = 0;
  for (Index i = 0; i < n; ++i) {
    const Slot s = order[static_cast<std::size_t>(i)];
    const Mat& m = s.shifted ? shifted_means : means;
    for (Index j = 0; j < spec.d; ++j)
      fs.features(i, j) = m(s.cls, j) + spec.sigma * rng.normal();
    labels[static_cast<std::size_t>(i)] = s.cls;
    tags[static_cast<std::size_t>(i)] = s.shifted ? DomainTag::TargetLike : DomainTag::SourceLike;
    if (s.shifted) ++shifted_count_out;
  }
  fs.labels = std::move(labels);
  fs.tags = std::move(tags);
  class_counts_out = class_counts;
  return normalize_rows(fs).fs;
}

}  // namespace

void validate(const ShiftSpec& spec) {
  if (spec.k < 2) throw ConfigError("K must be >= 2");
  if (spec.d < 2) throw ConfigError("d must be >= 2");
  if (spec.n_source < 1 || spec.n_target < 1) throw ConfigError("sample counts must be >= 1");
  if (!(spec.sigma > 0.0)) throw ConfigError("sigma must be > 0");
  if (!(spec.shift >= 0.0)) throw ConfigError("shift must be >= 0");
  if (spec.target_like_frac < 0.0 || spec.target_like_frac > 1.0)
    throw ConfigError("target_like_frac must be in [0,1]");
  if (spec.k > spec.d - 1)
    throw InfeasibleSeparation("need K <= d-1 (" + std::to_string(spec.k) + " classes in d=" +
                               std::to_string(spec.d) + ")");
  const double sep = std::max(kSeparationSigmas * spec.sigma,
                              4.0 * spec.sigma / std::sqrt(static_cast<double>(spec.d)));
  if (sep / std::numbers::sqrt2 > 1.0)
    throw InfeasibleSeparation("sigma " + std::to_string(spec.sigma) +
                               " demands mean separation " + std::to_string(sep) +
                               " which exceeds the unit sphere");
}

SynthData generate(const ShiftSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);

  // Means on a spherical cap: mu_c = cos(t)*u0 + sin(t)*e_c with orthonormal
  // e_c, giving equal pairwise distance sep = sin(t)*sqrt(2).
  const double sep = std::max(kSeparationSigmas * spec.sigma,
                              4.0 * spec.sigma / std::sqrt(static_cast<double>(spec.d)));
  const double s = sep / std::numbers::sqrt2;
  const double c = std::sqrt(std::max(0.0, 1.0 - s * s));

  const Vec u0 = random_unit(rng, spec.d);
  Mat frame(spec.k, spec.d);
  for (int i = 0; i < spec.k; ++i) {
    Vec v(spec.d);
    while (true) {
      for (Index j = 0; j < spec.d; ++j) v(j) = rng.normal();
      v -= v.dot(u0) * u0;
      for (int p = 0; p < i; ++p) v -= v.dot(frame.row(p)) * frame.row(p).transpose();
      const double norm = v.norm();
      if (norm > 1e-8) {
        frame.row(i) = v.transpose() / norm;
        break;
      }
    }
  }

  Mat means(spec.k, spec.d);
  for (int i = 0; i < spec.k; ++i) means.row(i) = c * u0.transpose() + s * frame.row(i);

  // Target-like means: displaced shift*sigma toward the next class, circular.
  Mat shifted = means;
  if (spec.shift > 0.0) {
    for (int i = 0; i < spec.k; ++i) {
      const int j = (i + 1) % spec.k;
      const Vec dir = (means.row(j) - means.row(i)).normalized().transpose();
      shifted.row(i) = means.row(i) + (spec.shift * spec.sigma) * dir.transpose();
    }
  }

  SynthData data;
  const auto src_counts = balanced_counts(spec.n_source, spec.k);
  const auto tgt_counts = balanced_counts(spec.n_target, spec.k);
  const Index want_target_like =
      static_cast<Index>(std::llround(spec.target_like_frac * static_cast<double>(spec.n_target)));
  const auto tgt_slots = spread_slots(tgt_counts, spec.n_target, want_target_like);
  const std::vector<Index> no_slots(static_cast<std::size_t>(spec.k), 0);

  Index dummy = 0;
  data.source = sample_domain(rng, spec, spec.n_source, means, src_counts, no_slots, shifted,
                              data.source_class_counts, dummy);
  data.target = sample_domain(rng, spec, spec.n_target, means, tgt_counts, tgt_slots, shifted,
                              data.target_class_counts, data.target_like_count);
  return data;
}

SourceFit train_source_head(const FeatureSet& source, double lr, int epochs, std::uint64_t seed,
                            double acc_threshold) {
  validate(source);
  if (!source.labels) throw MissingLabel(0);
  (void)seed;  // reserved: full-batch fitting from zero init is already deterministic

  const Index n = source.n;
  const int k = source.k;
  Mat w = Mat::Zero(k, source.d);
  Vec b = Vec::Zero(k);
  Mat vw = Mat::Zero(k, source.d);
  Vec vb = Vec::Zero(k);
  constexpr double kMomentum = 0.9;

  const Mat& x = source.features;
  Mat onehot = Mat::Zero(n, k);
  for (Index i = 0; i < n; ++i) onehot(i, (*source.labels)[static_cast<std::size_t>(i)]) = 1.0;

  int epoch = 0;
  for (; epoch < epochs; ++epoch) {
    Mat logits = (x * w.transpose()).rowwise() + b.transpose();
    for (Index i = 0; i < n; ++i) {
      const double mx = logits.row(i).maxCoeff();
      logits.row(i) = (logits.row(i).array() - mx).exp();
      logits.row(i) /= logits.row(i).sum();
    }
    const Mat diff = (logits - onehot) / static_cast<double>(n);
    vw = kMomentum * vw + diff.transpose() * x;
    vb = kMomentum * vb + diff.colwise().sum().transpose();
    w -= lr * vw;
    b -= lr * vb;
  }

  SourceFit fit;
  fit.model = make_identity_model(std::move(w), std::move(b));
  fit.epochs_run = epoch;
  fit.train_acc = accuracy(fit.model, source);
  if (fit.train_acc < acc_threshold) throw NonConvergence(fit.train_acc, acc_threshold, epochs);
  return fit;
}

}  // namespace mhpl

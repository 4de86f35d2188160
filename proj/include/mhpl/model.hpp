#pragma once

#include <string>
#include <vector>

#include "mhpl/feature_set.hpp"

namespace mhpl {

// Trainable adapter in front of a frozen linear classifier head.
//
// hidden == 0: adapter(x) = W x + b with W = I, b = 0 at init.
// hidden == h: adapter(x) = x + W2 lrelu(W1 x + b1) + b2 with W2 = b2 = 0 at
// init, so either form is exactly the identity before training and the model
// reproduces the source head's predictions bit for bit.
struct AdapterShape {
  Index d = 0;
  int hidden = 0;
};

inline std::size_t adapter_param_count(const AdapterShape& s) {
  if (s.hidden == 0) return static_cast<std::size_t>(s.d * s.d + s.d);
  return static_cast<std::size_t>(2 * s.hidden * s.d + s.hidden + s.d);
}

constexpr double kLeakySlope = 0.01;

struct AdaptModel {
  AdapterShape shape;
  std::vector<double> adapter;  // flat: W|b or W1|b1|W2|b2, matrices row-major
  Mat head_w;                   // K x d, frozen
  Vec head_b;                   // K, frozen

  Index d() const { return shape.d; }
  int k() const { return static_cast<int>(head_w.rows()); }

  Mat adapt(const Mat& x) const;        // B x d -> B x d
  Mat logits(const Mat& x) const;       // B x K
  Mat probs(const Mat& x) const;        // row-wise softmax of logits
  std::vector<int> predict(const Mat& x) const;  // argmax, ties to lower class
};

// Identity-initialized model around a given frozen head. For hidden > 0 the
// first layer is seeded with small random weights; the output layer starts at
// zero so the adapter is still the exact identity.
AdaptModel make_identity_model(Mat head_w, Vec head_b, int hidden = 0, std::uint64_t seed = 0);

// Fraction of rows whose argmax prediction matches the stored label.
double accuracy(const AdaptModel& model, const FeatureSet& fs);

// Versioned binary checkpoint (magic "MHC1") of adapter + head parameters.
void save_checkpoint(const AdaptModel& model, const std::string& path);
AdaptModel load_checkpoint(const std::string& path);

}  // namespace mhpl

#pragma once

#include <cstdint>
#include <vector>

#include "mhpl/feature_set.hpp"
#include "mhpl/model.hpp"

namespace mhpl {

// Two-domain covariate-shift benchmark. Class means sit on the unit sphere at
// a controlled pairwise distance; target-like samples are drawn from means
// displaced by shift*sigma toward the next class, which is what makes the
// shifted clusters genuinely hard for the source head while leaving them
// separable from every other cluster.
struct ShiftSpec {
  int k = 3;
  Index d = 16;
  Index n_source = 600;
  Index n_target = 600;
  double sigma = 0.08;            // per-coordinate noise std
  double shift = 4.0;             // displacement magnitude, units of sigma
  double target_like_frac = 0.5;  // fraction of target samples drawn from displaced means
  std::uint64_t seed = 0;
};

void validate(const ShiftSpec& spec);

struct SynthData {
  FeatureSet source;  // labels + source_like tags
  FeatureSet target;  // labels + source_like/target_like tags
  std::vector<Index> source_class_counts;
  std::vector<Index> target_class_counts;
  Index target_like_count = 0;
};

SynthData generate(const ShiftSpec& spec);

struct SourceFit {
  AdaptModel model;  // identity adapter, trained softmax-regression head
  double train_acc = 0.0;
  int epochs_run = 0;
};

// Fits the frozen classifier head on labeled source features by full-batch
// gradient descent with momentum. Throws NonConvergence when training
// accuracy stays below acc_threshold.
SourceFit train_source_head(const FeatureSet& source, double lr = 1.0, int epochs = 300,
                            std::uint64_t seed = 0, double acc_threshold = 0.99);

}  // namespace mhpl

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mhpl/config.hpp"
#include "mhpl/losses.hpp"
#include "mhpl/rng.hpp"
#include "mhpl/selection.hpp"

namespace mhpl {

// Shuffled ring over sample indices; reshuffles when a pass is exhausted, so
// one epoch of n_b batches visits every index at most ceil(n_b*batch/n) times.
class EpochSampler {
public:
  EpochSampler(Index n, Rng& rng) : rng_(rng), perm_(static_cast<std::size_t>(n)) {
    for (std::size_t i = 0; i < perm_.size(); ++i) perm_[i] = static_cast<Index>(i);
    rng_.shuffle(perm_);
  }

  std::vector<Index> next_batch(int batch_size) {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(batch_size));
    for (int i = 0; i < batch_size; ++i) {
      if (pos_ == perm_.size()) {
        rng_.shuffle(perm_);
        pos_ = 0;
      }
      out.push_back(perm_[pos_++]);
    }
    return out;
  }

private:
  Rng& rng_;
  std::vector<Index> perm_;
  std::size_t pos_ = 0;
};

struct SgdState {
  std::vector<double> velocity;
};

// v <- momentum * v + g; theta <- theta - lr * v. Only adapter parameters
// move; the head is frozen.
void sgd_momentum_step(AdaptModel& model, const Grad& grad, double lr, double momentum,
                       SgdState& state);

struct EpochStats {
  int epoch = 0;
  LossBreakdown mean_loss;  // averaged over the epoch's iterations
  std::optional<double> target_acc;
};

struct RunReport {
  TrainConfig config;
  SelectionResult selection;
  std::vector<EpochStats> epochs;
  std::optional<double> source_acc;  // before any training
  std::optional<double> final_acc;
  std::int64_t wall_ms = 0;
};

struct RunResult {
  AdaptModel model;
  RunReport report;
};

// Supplies the ground-truth label for a queried index; throws MissingLabel.
using LabelOracle = std::function<int(Index)>;

LabelOracle oracle_from_labels(const FeatureSet& fs);

// The full loop: one-shot query m samples with the source model (or, under
// the query_epoch ablation, with the partially trained model), label them via
// the oracle, then train the adapter for cfg.epochs epochs of minibatch SGD
// on the combined objective, re-clustering pseudo-labels each epoch.
RunResult run_mhpl(const FeatureSet& target, const AdaptModel& source_model,
                   const TrainConfig& cfg, Index m, const LabelOracle& oracle);

// Same training loop with a selection that was computed elsewhere (baseline
// strategies, selections loaded from disk).
RunResult run_adapt(const FeatureSet& target, const AdaptModel& source_model,
                    const TrainConfig& cfg, const SelectionResult& selection,
                    const LabelOracle& oracle);

// Fraction of the selection tagged target-like; empty when tags are absent.
std::optional<double> target_like_fraction(const FeatureSet& fs, const SelectionResult& sel);

}  // namespace mhpl

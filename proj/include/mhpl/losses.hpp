#pragma once

#include <vector>

#include "mhpl/config.hpp"
#include "mhpl/model.hpp"

namespace mhpl {

// Gradient with respect to the adapter parameters, same flat layout as
// AdaptModel::adapter. The head is frozen and has no gradient.
using Grad = std::vector<double>;

struct LossValue {
  double value = 0.0;
  Grad grad;
};

// Queried samples with ground-truth labels and their query-time NP weights.
struct LabeledBatch {
  Mat x;                   // B x d
  std::vector<int> y;
  std::vector<double> np;  // frozen neighbor purity, one per sample
};

// Pseudo-labeled samples.
struct UnlabeledBatch {
  Mat x;
  std::vector<int> pseudo;
};

struct LossBreakdown {
  double nf_labeled = 0.0;
  double nf_unlabeled = 0.0;
  double ent = 0.0;
  double div = 0.0;
  double total = 0.0;
};

// Mean over the batch of alpha * NP(x) * (-log p_y). Empty batch -> 0.
LossValue nf_loss_labeled(const AdaptModel& model, const LabeledBatch& batch, double alpha);

// Mean over the batch of beta * (-log p_pseudo). Empty batch -> 0.
LossValue nf_loss_unlabeled(const AdaptModel& model, const UnlabeledBatch& batch, double beta);

// Mean prediction entropy over the batch.
LossValue entropy_loss(const AdaptModel& model, const Mat& x);

// KL(batch-mean prediction || uniform); zero exactly when the mean prediction
// is balanced. Minimized, encouraging class balance.
LossValue div_loss(const AdaptModel& model, const Mat& x);

struct TotalLoss {
  LossBreakdown parts;
  Grad grad;
};

// NF terms on their own batches plus entropy/divergence over the union.
// parts.total is the literal sum of the four components; the gradient is the
// sum of the component gradients.
TotalLoss total_loss(const AdaptModel& model, const LabeledBatch& labeled,
                     const UnlabeledBatch& unlabeled, double alpha, double beta);

}  // namespace mhpl

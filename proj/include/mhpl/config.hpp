#pragma once

#include <cstdint>

#include "mhpl/error.hpp"

namespace mhpl {

// Sweep/diagnostic switches. query_epoch > 0 delays the label query: the
// model first trains unsupervised for that many epochs and the selection then
// runs against the partially adapted model instead of the raw source model.
struct Ablation {
  bool no_np = false;
  bool no_na = false;
  bool no_ndr = false;
  bool no_nf_weight = false;  // labeled loss falls back to plain cross-entropy
  int query_epoch = 0;
};

struct TrainConfig {
  double alpha = 3.0;        // labeled NF loss scale
  double beta = 0.3;         // pseudo-labeled NF loss scale
  double lr = 0.1;
  double momentum = 0.9;
  int batch_size = 64;
  int epochs = 30;
  int iters_per_epoch = 0;   // 0 means ceil(n / batch_size)
  int q = 9;                 // neighbor count at query time
  std::uint64_t seed = 0;
  bool recluster_each_epoch = true;
  int cluster_rounds = 1;
  int hidden = 0;            // adapter hidden width; 0 = plain linear adapter
  double lr_decay_power = 0.0;  // 0 = constant lr; else lr/(1+10*t/T)^power
  Ablation ablation;
};

inline void validate(const TrainConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (!(cfg.beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(cfg.lr > 0.0)) throw ConfigError("lr must be > 0");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw ConfigError("momentum must be in [0,1)");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cfg.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (cfg.iters_per_epoch < 0) throw ConfigError("iters_per_epoch must be >= 0");
  if (cfg.q < 1) throw ConfigError("q must be >= 1");
  if (cfg.cluster_rounds < 0) throw ConfigError("cluster_rounds must be >= 0");
  if (cfg.hidden < 0) throw ConfigError("hidden must be >= 0");
  if (cfg.ablation.query_epoch < 0) throw ConfigError("query_epoch must be >= 0");
}

}  // namespace mhpl

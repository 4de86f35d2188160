#include "mhpl/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "mhpl/rng.hpp"

namespace mhpl {

void sgd_momentum_step(AdaptModel& model, const Grad& grad, double lr, double momentum,
                       SgdState& state) {
  if (grad.size() != model.adapter.size())
    throw DimensionMismatch(0, "gradient length does not match adapter parameters");
  if (state.velocity.empty()) state.velocity.assign(grad.size(), 0.0);
  if (state.velocity.size() != grad.size())
    throw DimensionMismatch(0, "velocity length does not match adapter parameters");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    state.velocity[i] = momentum * state.velocity[i] + grad[i];
    model.adapter[i] -= lr * state.velocity[i];
  }
}

LabelOracle oracle_from_labels(const FeatureSet& fs) {
  if (!fs.labels) throw MissingLabel(0);
  const auto labels = *fs.labels;
  const Index n = fs.n;
  return [labels, n](Index i) {
    if (i < 0 || i >= n) throw MissingLabel(i);
    return labels[static_cast<std::size_t>(i)];
  };
}

std::optional<double> target_like_fraction(const FeatureSet& fs, const SelectionResult& sel) {
  if (!fs.tags || sel.selected.empty()) return std::nullopt;
  Index hits = 0;
  for (const auto& s : sel.selected)
    if ((*fs.tags)[static_cast<std::size_t>(s.index)] == DomainTag::TargetLike) ++hits;
  return static_cast<double>(hits) / static_cast<double>(sel.selected.size());
}

namespace {

FeatureSet adapted_space(const FeatureSet& fs, const AdaptModel& model) {
  FeatureSet out = fs;
  out.features = model.adapt(fs.features);
  return normalize_rows(out).fs;
}

RunResult run_core(const FeatureSet& fs, const AdaptModel& source_model, const TrainConfig& cfg,
                   Index m, const LabelOracle& oracle,
                   const std::optional<SelectionResult>& premade) {
  validate(cfg);
  validate(fs);
  if (m < 0 || m > fs.n) throw BudgetExceedsN(m, fs.n);
  const auto t0 = std::chrono::steady_clock::now();

  AdaptModel model = cfg.hidden == source_model.shape.hidden
                         ? source_model
                         : make_identity_model(source_model.head_w, source_model.head_b,
                                               cfg.hidden, cfg.seed);
  const Index n = fs.n;
  Rng rng(cfg.seed);

  const SelectionAblation sel_ablation{cfg.ablation.no_np, cfg.ablation.no_na,
                                       cfg.ablation.no_ndr};
  const int query_epoch = premade ? 0 : cfg.ablation.query_epoch;

  RunResult out;
  out.report.config = cfg;
  if (fs.labels) out.report.source_acc = accuracy(model, fs);

  bool selected = false;
  std::vector<char> is_labeled(static_cast<std::size_t>(n), 0);
  std::vector<int> oracle_label(static_cast<std::size_t>(n), -1);
  std::vector<double> frozen_np(static_cast<std::size_t>(n), 0.0);

  const auto apply_selection = [&](SelectionResult sel) {
    for (const auto& s : sel.selected) {
      if (s.index < 0 || s.index >= n) throw IndexOutOfRange(s.index, n);
      const int y = oracle(s.index);
      if (y < 0 || y >= fs.k) throw LabelOutOfRange(s.index, y, fs.k);
      is_labeled[static_cast<std::size_t>(s.index)] = 1;
      oracle_label[static_cast<std::size_t>(s.index)] = y;
      frozen_np[static_cast<std::size_t>(s.index)] = s.np;  // query-time value, never refreshed
    }
    out.report.selection = std::move(sel);
    selected = true;
  };

  if (premade) {
    apply_selection(*premade);
  } else if (query_epoch == 0) {
    apply_selection(one_shot_query(fs, model, cfg.q, m, cfg.cluster_rounds, sel_ablation));
  }

  const int n_b = cfg.iters_per_epoch > 0
                      ? cfg.iters_per_epoch
                      : static_cast<int>((n + cfg.batch_size - 1) / cfg.batch_size);
  const double alpha_eff = cfg.ablation.no_nf_weight ? 1.0 : cfg.alpha;
  const long total_steps = static_cast<long>(cfg.epochs) * n_b;
  long step = 0;

  SgdState sgd;
  PseudoLabels pl;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (!selected && epoch == query_epoch + 1) {
      // Deferred querying: score on the current adapter's feature space.
      apply_selection(select_by_nau(adapted_space(fs, model), model.probs(fs.features), cfg.q, m,
                                    cfg.cluster_rounds, sel_ablation));
    }
    if (cfg.recluster_each_epoch || epoch == 1)
      pl = cluster_assign(adapted_space(fs, model), model.probs(fs.features), cfg.cluster_rounds);

    EpochSampler sampler(n, rng);
    LossBreakdown sum;
    for (int it = 0; it < n_b; ++it) {
      const auto batch = sampler.next_batch(cfg.batch_size);
      std::vector<Index> lab, unlab;
      for (Index i : batch)
        (is_labeled[static_cast<std::size_t>(i)] ? lab : unlab).push_back(i);

      LabeledBatch lb;
      lb.x.resize(static_cast<Index>(lab.size()), fs.d);
      for (std::size_t r = 0; r < lab.size(); ++r) {
        lb.x.row(static_cast<Index>(r)) = fs.features.row(lab[r]);
        lb.y.push_back(oracle_label[static_cast<std::size_t>(lab[r])]);
        lb.np.push_back(cfg.ablation.no_nf_weight ? 1.0
                                                  : frozen_np[static_cast<std::size_t>(lab[r])]);
      }
      UnlabeledBatch ub;
      ub.x.resize(static_cast<Index>(unlab.size()), fs.d);
      for (std::size_t r = 0; r < unlab.size(); ++r) {
        ub.x.row(static_cast<Index>(r)) = fs.features.row(unlab[r]);
        ub.pseudo.push_back(pl.labels[static_cast<std::size_t>(unlab[r])]);
      }

      const TotalLoss tl = total_loss(model, lb, ub, alpha_eff, cfg.beta);
      double lr = cfg.lr;
      if (cfg.lr_decay_power > 0.0 && total_steps > 0)
        lr = cfg.lr / std::pow(1.0 + 10.0 * static_cast<double>(step) /
                                         static_cast<double>(total_steps),
                               cfg.lr_decay_power);
      sgd_momentum_step(model, tl.grad, lr, cfg.momentum, sgd);
      ++step;

      sum.nf_labeled += tl.parts.nf_labeled;
      sum.nf_unlabeled += tl.parts.nf_unlabeled;
      sum.ent += tl.parts.ent;
      sum.div += tl.parts.div;
      sum.total += tl.parts.total;
    }

    EpochStats stats;
    stats.epoch = epoch;
    if (n_b > 0) {
      const double inv = 1.0 / n_b;
      stats.mean_loss = {sum.nf_labeled * inv, sum.nf_unlabeled * inv, sum.ent * inv,
                         sum.div * inv, sum.total * inv};
    }
    if (fs.labels) stats.target_acc = accuracy(model, fs);
    out.report.epochs.push_back(stats);
  }

  if (!selected) {
    // epochs == 0 (dry run) or query_epoch beyond the horizon: still query,
    // so the selection is part of the report.
    apply_selection(one_shot_query(fs, model, cfg.q, m, cfg.cluster_rounds, sel_ablation));
  }

  if (fs.labels) out.report.final_acc = accuracy(model, fs);
  out.report.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
  out.model = std::move(model);
  return out;
}

}  // namespace

RunResult run_mhpl(const FeatureSet& target, const AdaptModel& source_model,
                   const TrainConfig& cfg, Index m, const LabelOracle& oracle) {
  return run_core(target, source_model, cfg, m, oracle, std::nullopt);
}

RunResult run_adapt(const FeatureSet& target, const AdaptModel& source_model,
                    const TrainConfig& cfg, const SelectionResult& selection,
                    const LabelOracle& oracle) {
  return run_core(target, source_model, cfg, static_cast<Index>(selection.selected.size()),
                  oracle, selection);
}

}  // namespace mhpl

#include "mhpl/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mhpl/rng.hpp"

namespace mhpl {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Mhpl: return "mhpl";
    case Strategy::Random: return "random";
    case Strategy::Entropy: return "entropy";
    case Strategy::Bvsb: return "bvsb";
    case Strategy::Lc: return "lc";
    case Strategy::Ctc: return "ctc";
    case Strategy::Coreset: return "coreset";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(const std::string& name) {
  for (Strategy s : {Strategy::Mhpl, Strategy::Random, Strategy::Entropy, Strategy::Bvsb,
                     Strategy::Lc, Strategy::Ctc, Strategy::Coreset})
    if (strategy_name(s) == name) return s;
  return std::nullopt;
}

std::vector<Index> SelectionResult::selected_indices() const {
  std::vector<Index> out;
  out.reserve(selected.size());
  for (const auto& s : selected) out.push_back(s.index);
  return out;
}

namespace {

// Candidate order shared by NDR and top-k: descending score, ties to the
// lower sample index.
std::vector<Index> score_order(const std::vector<double>& score) {
  std::vector<Index> order(score.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&score](Index a, Index b) {
    const double sa = score[static_cast<std::size_t>(a)];
    const double sb = score[static_cast<std::size_t>(b)];
    return sa > sb || (sa == sb && a < b);
  });
  return order;
}

SelectedSample sample_entry(const UncertaintyScores& scores, Index i, bool fallback) {
  SelectedSample s;
  s.index = i;
  if (i < scores.n()) {
    s.nau = scores.nau[static_cast<std::size_t>(i)];
    s.np = scores.np[static_cast<std::size_t>(i)];
    s.na = scores.na[static_cast<std::size_t>(i)];
  }
  s.fallback = fallback;
  return s;
}

double clamped_cosine(const double* a, const double* b, Index d) {
  double acc = 0.0;
  for (Index k = 0; k < d; ++k) acc += a[k] * b[k];
  return acc > 0.0 ? std::min(acc, 1.0) : 0.0;
}

}  // namespace

SelectionResult ndr_select(const UncertaintyScores& scores, const NeighborGraph& g, Index m) {
  const Index n = scores.n();
  if (g.n() != n) throw DimensionMismatch(0, "scores and graph disagree on n");
  if (m < 0 || m > n) throw BudgetExceedsN(m, n);

  SelectionResult res;
  res.strategy = Strategy::Mhpl;
  res.budget = m;
  res.scores = scores;

  std::vector<char> in_selected(static_cast<std::size_t>(n), 0);
  const auto order = score_order(scores.nau);
  for (Index i : order) {
    if (static_cast<Index>(res.selected.size()) == m) break;
    if (in_selected[static_cast<std::size_t>(nearest(g, i))]) {
      res.skipped.push_back({i, "nearest-selected"});
      continue;
    }
    res.selected.push_back(sample_entry(scores, i, false));
    in_selected[static_cast<std::size_t>(i)] = 1;
  }
  // Budget fallback: the diversity rule can starve the selection when every
  // remaining candidate's nearest neighbor is already in. Admit skipped
  // candidates in score order, flagged, until the budget is met.
  for (const auto& skip : res.skipped) {
    if (static_cast<Index>(res.selected.size()) == m) break;
    res.selected.push_back(sample_entry(scores, skip.index, true));
    in_selected[static_cast<std::size_t>(skip.index)] = 1;
  }
  return res;
}

SelectionResult top_k_select(const UncertaintyScores& scores, Index m) {
  const Index n = scores.n();
  if (m < 0 || m > n) throw BudgetExceedsN(m, n);
  SelectionResult res;
  res.strategy = Strategy::Mhpl;
  res.budget = m;
  res.scores = scores;
  const auto order = score_order(scores.nau);
  for (Index r = 0; r < m; ++r) res.selected.push_back(sample_entry(scores, order[static_cast<std::size_t>(r)], false));
  return res;
}

SelectionResult select_by_nau(const FeatureSet& fs, const Mat& probs, int q, Index m,
                              int cluster_rounds, SelectionAblation ablation) {
  const PseudoLabels pl = cluster_assign(fs, probs, cluster_rounds);
  const NeighborGraph g = build_graph(fs, q);
  const UncertaintyScores scores = compute_nau(fs, g, pl);

  UncertaintyScores ranking = scores;
  if (ablation.no_np || ablation.no_na) {
    for (Index i = 0; i < scores.n(); ++i) {
      const double np = ablation.no_np ? 1.0 : scores.np[static_cast<std::size_t>(i)];
      const double na = ablation.no_na ? 1.0 : scores.na[static_cast<std::size_t>(i)];
      ranking.nau[static_cast<std::size_t>(i)] = np * na;
    }
  }

  SelectionResult res = ablation.no_ndr ? top_k_select(ranking, m) : ndr_select(ranking, g, m);
  // The ranking may have been ablated; the frozen report always carries the
  // true scores (NF loss weights read NP from here).
  res.scores = scores;
  for (auto& s : res.selected) {
    s.nau = scores.nau[static_cast<std::size_t>(s.index)];
    s.np = scores.np[static_cast<std::size_t>(s.index)];
    s.na = scores.na[static_cast<std::size_t>(s.index)];
  }
  return res;
}

SelectionResult one_shot_query(const FeatureSet& fs, const AdaptModel& source_model, int q,
                               Index m, int cluster_rounds, SelectionAblation ablation) {
  return select_by_nau(fs, source_model.probs(fs.features), q, m, cluster_rounds, ablation);
}

SelectionResult baseline_select(Strategy strategy, const FeatureSet& fs, const Mat* probs,
                                const NeighborGraph* g, const PseudoLabels* pl, Index m,
                                std::uint64_t seed) {
  validate(fs);
  const Index n = fs.n;
  if (m < 0 || m > n) throw BudgetExceedsN(m, n);
  if (strategy == Strategy::Mhpl)
    throw MissingStrategyInput("mhpl", "the one_shot_query path, not baseline_select");
  const bool needs_probs =
      strategy == Strategy::Entropy || strategy == Strategy::Bvsb || strategy == Strategy::Lc;
  if (needs_probs && probs == nullptr)
    throw MissingStrategyInput(strategy_name(strategy), "a prediction probability matrix");
  if (strategy == Strategy::Ctc && pl == nullptr)
    throw MissingStrategyInput(strategy_name(strategy), "pseudo-labels with centroids");
  if (probs && (probs->rows() != n || probs->cols() != fs.k))
    throw DimensionMismatch(0, "probability matrix must be n x K");

  SelectionResult res;
  res.strategy = strategy;
  res.budget = m;
  res.seed = seed;
  if (g && pl) res.scores = compute_nau(fs, *g, *pl);

  std::vector<Index> picks;
  picks.reserve(static_cast<std::size_t>(m));

  switch (strategy) {
    case Strategy::Random: {
      Rng rng(seed);
      std::vector<Index> pool(static_cast<std::size_t>(n));
      std::iota(pool.begin(), pool.end(), Index{0});
      for (Index i = 0; i < m; ++i) {
        const Index j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        picks.push_back(pool[static_cast<std::size_t>(i)]);
      }
      break;
    }
    case Strategy::Entropy: {
      std::vector<double> score(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) {
        double h = 0.0;
        for (int c = 0; c < fs.k; ++c) {
          const double p = (*probs)(i, c);
          if (p > 0.0) h -= p * std::log(p);
        }
        score[static_cast<std::size_t>(i)] = h;
      }
      const auto order = score_order(score);
      picks.assign(order.begin(), order.begin() + m);
      break;
    }
    case Strategy::Bvsb:
    case Strategy::Lc: {
      // Both rank ascending; negate so score_order's descending sort applies.
      std::vector<double> score(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) {
        double top1 = -1.0, top2 = -1.0;
        for (int c = 0; c < fs.k; ++c) {
          const double p = (*probs)(i, c);
          if (p > top1) {
            top2 = top1;
            top1 = p;
          } else if (p > top2) {
            top2 = p;
          }
        }
        score[static_cast<std::size_t>(i)] =
            strategy == Strategy::Bvsb ? -(top1 - top2) : -top1;
      }
      const auto order = score_order(score);
      picks.assign(order.begin(), order.begin() + m);
      break;
    }
    case Strategy::Ctc: {
      const int k = pl->k();
      std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(k));
      std::vector<double> sim(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) {
        const int c = pl->labels[static_cast<std::size_t>(i)];
        sim[static_cast<std::size_t>(i)] =
            clamped_cosine(fs.features.row(i).data(), pl->centroids.row(c).data(), fs.d);
        by_class[static_cast<std::size_t>(c)].push_back(i);
      }
      for (auto& members : by_class)
        std::sort(members.begin(), members.end(), [&sim](Index a, Index b) {
          const double sa = sim[static_cast<std::size_t>(a)];
          const double sb = sim[static_cast<std::size_t>(b)];
          return sa > sb || (sa == sb && a < b);
        });
      // Round-robin over classes, best remaining member of each in turn.
      for (std::size_t rank = 0; static_cast<Index>(picks.size()) < m; ++rank) {
        bool any = false;
        for (int c = 0; c < k && static_cast<Index>(picks.size()) < m; ++c) {
          const auto& members = by_class[static_cast<std::size_t>(c)];
          if (rank < members.size()) {
            picks.push_back(members[rank]);
            any = true;
          }
        }
        if (!any) break;  // all classes exhausted (only possible when m > n)
      }
      break;
    }
    case Strategy::Coreset: {
      if (m == 0) break;
      // k-center greedy on 1 - sim, seeded from the point farthest from the
      // dataset mean.
      Vec mean = fs.features.colwise().mean();
      const double mean_norm = mean.norm();
      if (mean_norm > 0.0) mean /= mean_norm;
      std::vector<double> min_dist(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i)
        min_dist[static_cast<std::size_t>(i)] =
            1.0 - (mean_norm > 0.0 ? clamped_cosine(fs.features.row(i).data(), mean.data(), fs.d)
                                   : 0.0);
      for (Index r = 0; r < m; ++r) {
        Index best = 0;
        double best_d = -1.0;
        for (Index i = 0; i < n; ++i) {
          const double dv = min_dist[static_cast<std::size_t>(i)];
          if (dv > best_d) {
            best_d = dv;
            best = i;
          }
        }
        picks.push_back(best);
        for (Index i = 0; i < n; ++i) {
          const double dv =
              1.0 - clamped_cosine(fs.features.row(i).data(), fs.features.row(best).data(), fs.d);
          if (dv < min_dist[static_cast<std::size_t>(i)]) min_dist[static_cast<std::size_t>(i)] = dv;
        }
        min_dist[static_cast<std::size_t>(best)] = -1.0;  // a center cannot be picked twice
      }
      break;
    }
    case Strategy::Mhpl:
      break;  // unreachable
  }

  for (Index i : picks) res.selected.push_back(sample_entry(res.scores, i, false));
  return res;
}

}  // namespace mhpl

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mhpl/model.hpp"
#include "mhpl/uncertainty.hpp"

namespace mhpl {

enum class Strategy { Mhpl, Random, Entropy, Bvsb, Lc, Ctc, Coreset };

std::string strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& name);

struct SelectedSample {
  Index index = 0;
  double nau = 0.0, np = 0.0, na = 0.0;
  bool fallback = false;  // admitted by the budget fallback pass, not by the diversity rule
};

struct SkipRecord {
  Index index = 0;
  std::string reason;
};

struct SelectionResult {
  Strategy strategy = Strategy::Mhpl;
  Index budget = 0;
  std::uint64_t seed = 0;
  std::vector<SelectedSample> selected;  // insertion order
  std::vector<SkipRecord> skipped;
  UncertaintyScores scores;  // population snapshot at query time (empty when unavailable)

  std::vector<Index> selected_indices() const;
};

// Score ablations used by sweeps: drop one NAU factor or the relaxation.
struct SelectionAblation {
  bool no_np = false;
  bool no_na = false;
  bool no_ndr = false;
};

// Greedy admission in descending NAU (ties to lower index); a candidate whose
// nearest neighbor is already selected is skipped. If the pass ends short of
// the budget, skipped candidates are admitted in score order and flagged.
SelectionResult ndr_select(const UncertaintyScores& scores, const NeighborGraph& g, Index m);

// Plain top-m by score with no relaxation (the no-NDR ablation).
SelectionResult top_k_select(const UncertaintyScores& scores, Index m);

// Score pipeline on an explicit feature space and prediction matrix:
// pseudo-labels -> graph -> NAU -> NDR (or top-k under no_ndr). The recorded
// scores are always the unablated values.
SelectionResult select_by_nau(const FeatureSet& fs, const Mat& probs, int q, Index m,
                              int cluster_rounds, SelectionAblation ablation);

// The full one-shot query pipeline against a raw source model: probabilities
// -> pseudo-labels -> graph -> NAU -> NDR. Scores are frozen into the result.
SelectionResult one_shot_query(const FeatureSet& fs, const AdaptModel& source_model, int q,
                               Index m, int cluster_rounds = 1, SelectionAblation ablation = {});

// Classical baselines. probs is needed by entropy/bvsb/lc, the graph inputs
// by ctc (centroids) and the scores snapshot; coreset needs only features.
SelectionResult baseline_select(Strategy strategy, const FeatureSet& fs, const Mat* probs,
                                const NeighborGraph* g, const PseudoLabels* pl, Index m,
                                std::uint64_t seed);

}  // namespace mhpl

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mhpl/config.hpp"
#include "mhpl/synth.hpp"

namespace mhpl {

// Grid description parsed from the key=value sweep config. Cells are the
// cross product strategies x budgets x seeds x ablations; each cell is an
// independent pure run.
struct SweepSpec {
  // data source: synthetic spec, or feature files
  bool synthetic = true;
  ShiftSpec shift_spec;
  std::string target_features;  // file mode
  std::string source_features;  // file mode: head is trained per run
  std::string source_model;     // file mode alternative: checkpoint
  std::optional<int> k_override;

  std::vector<std::string> strategies;
  std::vector<std::string> budgets;  // raw tokens; fraction if they contain '.'
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> ablations;  // none | no_np | no_na | no_ndr | no_nf_weight | query_epoch_<N>
  TrainConfig train;
  int workers = 1;
};

SweepSpec parse_sweep_config(std::istream& in);
SweepSpec parse_sweep_config_file(const std::string& path);

// Budget token -> absolute count: tokens with '.' or exponent are fractions
// of n (rounded), anything else is an absolute count.
Index parse_budget(const std::string& token, Index n);

Ablation parse_ablation(const std::string& token);

struct SweepRow {
  std::string strategy;
  std::string budget;
  std::uint64_t seed = 0;
  std::string ablation;
  double final_acc = 0.0;
  std::optional<double> target_like_frac_selected;
  std::int64_t wall_ms = 0;
};

struct SweepOutput {
  std::vector<SweepRow> rows;  // config enumeration order
};

SweepOutput run_sweep(const SweepSpec& spec);

// `strategy,budget,seed,ablation,final_acc,target_like_frac_selected,wall_ms`
void write_sweep_csv(const SweepOutput& out, std::ostream& os);
// mean +/- std of final accuracy per (strategy, budget, ablation)
void write_sweep_summary(const SweepOutput& out, std::ostream& os);

}  // namespace mhpl

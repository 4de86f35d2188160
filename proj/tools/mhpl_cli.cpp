// Command-line front end: generate / select / train / eval / sweep.
// Every command is a pure function of its input files, flags, and seed;
// re-running reproduces identical outputs except the report timestamp and
// measured wall time.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "mhpl/serialize.hpp"
#include "mhpl/sweep.hpp"
#include "mhpl/train.hpp"

namespace fs = std::filesystem;
using namespace mhpl;

namespace {

bool g_quiet = false;

void info(const std::string& msg) {
  if (!g_quiet) std::cout << msg << "\n";
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

FileFormat format_for(const std::string& path, const std::string& override_fmt) {
  if (override_fmt == "csv") return FileFormat::Csv;
  if (override_fmt == "fmx") return FileFormat::Binary;
  return path.ends_with(".csv") ? FileFormat::Csv : FileFormat::Binary;
}

FeatureSet load_normalized(const std::string& path, const std::string& fmt,
                           std::optional<int> k_override) {
  const FeatureSet raw = load_feature_set(path, format_for(path, fmt), k_override);
  auto norm = normalize_rows(raw);
  if (!norm.zero_rows.empty())
    std::cerr << "warning: " << norm.zero_rows.size() << " zero rows left unnormalized in "
              << path << "\n";
  return std::move(norm.fs);
}

struct SourceModelArgs {
  std::string model_path;
  std::string source_features;
  std::string format;
  std::optional<int> k_override;
  double source_lr = 1.0;
  int source_epochs = 300;
};

AdaptModel resolve_source_model(const SourceModelArgs& args, std::uint64_t seed) {
  if (!args.model_path.empty()) return load_checkpoint(args.model_path);
  if (args.source_features.empty())
    throw ConfigError("need --model or --train-source with --source");
  const FeatureSet src = load_normalized(args.source_features, args.format, args.k_override);
  const SourceFit fit = train_source_head(src, args.source_lr, args.source_epochs, seed);
  info("trained source head: train_acc=" + std::to_string(fit.train_acc));
  return fit.model;
}

LabelOracle resolve_oracle(const FeatureSet& target, const std::string& annotation_path) {
  if (!annotation_path.empty()) {
    auto map = read_annotation_csv(annotation_path);
    return [map](Index i) {
      const auto it = map.find(i);
      if (it == map.end()) throw MissingLabel(i);
      return it->second;
    };
  }
  if (!target.labels) throw MissingLabel(0);
  return oracle_from_labels(target);
}

int cmd_generate(const ShiftSpec& spec, const std::string& out_dir) {
  const SynthData data = generate(spec);
  fs::create_directories(out_dir);
  save_feature_set(data.source, out_dir + "/source.fmx");
  save_feature_set(data.target, out_dir + "/target.fmx");
  write_json_file(manifest_to_json(spec, data), out_dir + "/manifest.json");
  info("wrote " + out_dir + "/source.fmx, target.fmx, manifest.json");
  return 0;
}

struct SelectArgs {
  std::string features;
  std::string format;
  std::optional<int> k_override;
  SourceModelArgs source;
  std::string strategy = "mhpl";
  std::string budget = "0.05";
  int q = 9;
  int cluster_rounds = 1;
  std::uint64_t seed = 0;
  std::string out = "selection.json";
  std::string annotate_template;
  std::string dump_graph;
};

SelectionResult compute_selection(const FeatureSet& target, const AdaptModel& source,
                                  const std::string& strategy_token, const std::string& budget,
                                  int q, int cluster_rounds, std::uint64_t seed,
                                  const std::string& dump_graph_path) {
  const auto strat = parse_strategy(strategy_token);
  if (!strat) throw ConfigError("unknown strategy '" + strategy_token + "'");
  const Index m = parse_budget(budget, target.n);

  const Mat probs = source.probs(target.features);
  const NeighborGraph g = build_graph(target, q);
  const PseudoLabels pl = cluster_assign(target, probs, cluster_rounds);
  if (!dump_graph_path.empty()) dump_graph_csv(g, dump_graph_path);

  SelectionResult sel;
  if (*strat == Strategy::Mhpl) {
    const UncertaintyScores scores = compute_nau(target, g, pl);
    sel = ndr_select(scores, g, m);
    sel.seed = seed;
  } else {
    sel = baseline_select(*strat, target, &probs, &g, &pl, m, seed);
  }
  return sel;
}

int cmd_select(const SelectArgs& args) {
  const FeatureSet target = load_normalized(args.features, args.format, args.k_override);
  const AdaptModel source = resolve_source_model(args.source, args.seed);
  const SelectionResult sel =
      compute_selection(target, source, args.strategy, args.budget, args.q, args.cluster_rounds,
                        args.seed, args.dump_graph);
  write_json_file(selection_to_json(sel), args.out);
  if (!args.annotate_template.empty()) write_annotation_template(sel, args.annotate_template);
  info("selected " + std::to_string(sel.selected.size()) + " samples -> " + args.out);
  return 0;
}

struct TrainArgs {
  std::string features;
  std::string format;
  std::optional<int> k_override;
  SourceModelArgs source;
  std::string selection_path;
  std::string strategy = "mhpl";
  std::string budget = "0.05";
  std::string annotation;
  std::string ablation = "none";
  TrainConfig cfg;
  std::string out_dir = ".";
};

int cmd_train(const TrainArgs& args) {
  const FeatureSet target = load_normalized(args.features, args.format, args.k_override);
  const AdaptModel source = resolve_source_model(args.source, args.cfg.seed);
  const LabelOracle oracle = resolve_oracle(target, args.annotation);

  TrainConfig cfg = args.cfg;
  cfg.ablation = parse_ablation(args.ablation);

  RunResult run;
  if (!args.selection_path.empty()) {
    const SelectionResult sel = selection_from_json(read_json_file(args.selection_path));
    if (sel.strategy != Strategy::Mhpl) cfg.ablation.no_nf_weight = true;
    run = run_adapt(target, source, cfg, sel, oracle);
  } else if (args.strategy == "mhpl") {
    run = run_mhpl(target, source, cfg, parse_budget(args.budget, target.n), oracle);
  } else {
    const SelectionResult sel = compute_selection(target, source, args.strategy, args.budget,
                                                  cfg.q, cfg.cluster_rounds, cfg.seed, "");
    cfg.ablation.no_nf_weight = true;  // baselines exploit labels with plain cross-entropy
    run = run_adapt(target, source, cfg, sel, oracle);
  }

  fs::create_directories(args.out_dir);
  write_json_file(report_to_json(run.report, utc_timestamp()), args.out_dir + "/report.json");
  save_checkpoint(run.model, args.out_dir + "/model.ckpt");
  if (run.report.final_acc)
    info("final target accuracy: " + std::to_string(*run.report.final_acc));
  info("wrote " + args.out_dir + "/report.json and model.ckpt");
  return 0;
}

struct EvalArgs {
  std::string features;
  std::string format;
  std::optional<int> k_override;
  std::string model;
  std::string out;
};

int cmd_eval(const EvalArgs& args) {
  const FeatureSet target = load_normalized(args.features, args.format, args.k_override);
  const AdaptModel model = load_checkpoint(args.model);
  const double acc = accuracy(model, target);

  nlohmann::json j = {{"schema_version", kSchemaVersion}, {"n", target.n}, {"accuracy", acc}};
  if (target.tags) {
    Index src_n = 0, src_ok = 0, tgt_n = 0, tgt_ok = 0;
    const auto pred = model.predict(target.features);
    for (Index i = 0; i < target.n; ++i) {
      const bool ok = pred[static_cast<std::size_t>(i)] ==
                      (*target.labels)[static_cast<std::size_t>(i)];
      if ((*target.tags)[static_cast<std::size_t>(i)] == DomainTag::TargetLike) {
        ++tgt_n;
        tgt_ok += ok;
      } else if ((*target.tags)[static_cast<std::size_t>(i)] == DomainTag::SourceLike) {
        ++src_n;
        src_ok += ok;
      }
    }
    if (src_n > 0) j["source_like_acc"] = static_cast<double>(src_ok) / static_cast<double>(src_n);
    if (tgt_n > 0) j["target_like_acc"] = static_cast<double>(tgt_ok) / static_cast<double>(tgt_n);
  }
  if (!args.out.empty()) write_json_file(j, args.out);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  const SweepSpec spec = parse_sweep_config_file(config_path);
  const SweepOutput out = run_sweep(spec);
  fs::create_directories(out_dir);
  {
    std::ofstream f(out_dir + "/sweep.csv", std::ios::trunc);
    if (!f) throw UnwritablePath(out_dir + "/sweep.csv");
    write_sweep_csv(out, f);
  }
  {
    std::ofstream f(out_dir + "/summary.csv", std::ios::trunc);
    if (!f) throw UnwritablePath(out_dir + "/summary.csv");
    write_sweep_summary(out, f);
  }
  info("wrote " + out_dir + "/sweep.csv and summary.csv (" + std::to_string(out.rows.size()) +
       " cells)");
  return 0;
}

void add_feature_opts(CLI::App* cmd, std::string& features, std::string& format,
                      std::optional<int>& k_override) {
  cmd->add_option("--features", features, "feature file (.fmx binary or .csv)")->required();
  cmd->add_option("--format", format, "force input format: fmx|csv")
      ->check(CLI::IsMember({"fmx", "csv"}));
  cmd->add_option("--k", k_override, "class count override (required for unlabeled CSV)");
}

void add_source_opts(CLI::App* cmd, SourceModelArgs& args) {
  cmd->add_option("--model", args.model_path, "source model checkpoint");
  cmd->add_flag("--train-source", "fit the source head from --source features");
  cmd->add_option("--source", args.source_features, "labeled source feature file");
  cmd->add_option("--source-lr", args.source_lr, "source head learning rate");
  cmd->add_option("--source-epochs", args.source_epochs, "source head epochs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"query selection and source-free adaptation on feature embeddings"};
  app.require_subcommand(1);
  app.add_flag("--quiet", g_quiet, "suppress progress output");
  app.set_config("--config", "", "read option defaults from an ini file");

  // generate
  ShiftSpec spec;
  std::string gen_out = "out";
  auto* gen = app.add_subcommand("generate", "write a synthetic two-domain benchmark");
  gen->add_option("--k", spec.k, "class count");
  gen->add_option("--d", spec.d, "embedding dimension");
  gen->add_option("--n-source", spec.n_source, "source sample count");
  gen->add_option("--n-target", spec.n_target, "target sample count");
  gen->add_option("--sigma", spec.sigma, "within-cluster std");
  gen->add_option("--shift", spec.shift, "mean displacement in units of sigma");
  gen->add_option("--target-like-frac", spec.target_like_frac, "fraction drawn from shifted means");
  gen->add_option("--seed", spec.seed, "generator seed");
  gen->add_option("-o,--out", gen_out, "output directory");

  // select
  SelectArgs sel_args;
  auto* sel = app.add_subcommand("select", "score and query an annotation batch");
  add_feature_opts(sel, sel_args.features, sel_args.format, sel_args.k_override);
  add_source_opts(sel, sel_args.source);
  sel->add_option("--strategy", sel_args.strategy,
                  "mhpl|random|entropy|bvsb|lc|ctc|coreset");
  sel->add_option("--budget", sel_args.budget, "fraction (0,1] or absolute count");
  sel->add_option("--q", sel_args.q, "neighbor count");
  sel->add_option("--cluster-rounds", sel_args.cluster_rounds, "pseudo-label refinement rounds");
  sel->add_option("--seed", sel_args.seed, "selection seed");
  sel->add_option("-o,--out", sel_args.out, "selection JSON path");
  sel->add_option("--annotate-template", sel_args.annotate_template,
                  "write an index,label CSV skeleton for external annotation");
  sel->add_option("--dump-graph", sel_args.dump_graph, "debug CSV of the neighbor graph");

  // train
  TrainArgs tr;
  auto* train = app.add_subcommand("train", "run the full adaptation loop");
  add_feature_opts(train, tr.features, tr.format, tr.k_override);
  add_source_opts(train, tr.source);
  train->add_option("--selection", tr.selection_path, "selection JSON from `select`");
  train->add_option("--strategy", tr.strategy, "query strategy when no --selection is given");
  train->add_option("--budget", tr.budget, "fraction (0,1] or absolute count");
  train->add_option("--oracle", tr.annotation, "annotation CSV index,label");
  train->add_option("--ablation", tr.ablation,
                    "none|no_np|no_na|no_ndr|no_nf_weight|query_epoch_<N>");
  train->add_option("--alpha", tr.cfg.alpha, "labeled NF loss scale");
  train->add_option("--beta", tr.cfg.beta, "pseudo-labeled NF loss scale");
  train->add_option("--lr", tr.cfg.lr, "learning rate");
  train->add_option("--momentum", tr.cfg.momentum, "SGD momentum");
  train->add_option("--batch-size", tr.cfg.batch_size, "minibatch size");
  train->add_option("--epochs", tr.cfg.epochs, "training epochs");
  train->add_option("--iters", tr.cfg.iters_per_epoch, "iterations per epoch (0 = ceil(n/batch))");
  train->add_option("--q", tr.cfg.q, "neighbor count");
  train->add_option("--cluster-rounds", tr.cfg.cluster_rounds, "pseudo-label refinement rounds");
  train->add_option("--hidden", tr.cfg.hidden, "adapter hidden width (0 = linear)");
  train->add_option("--lr-decay-power", tr.cfg.lr_decay_power, "power-decay exponent (0 = constant)");
  train->add_option("--seed", tr.cfg.seed, "run seed");
  train->add_option("-o,--out", tr.out_dir, "output directory");

  // eval
  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "accuracy of a checkpoint on labeled features");
  add_feature_opts(eval, ev.features, ev.format, ev.k_override);
  eval->add_option("--model", ev.model, "checkpoint to evaluate")->required();
  eval->add_option("-o,--out", ev.out, "optional JSON output path");

  // sweep
  std::string sweep_config;
  std::string sweep_out = "sweep_out";
  auto* sweep = app.add_subcommand("sweep", "grid of strategies x budgets x seeds x ablations");
  sweep->add_option("--config", sweep_config, "sweep config file (key = value)")->required();
  sweep->add_option("-o,--out", sweep_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(spec, gen_out);
    if (sel->parsed()) return cmd_select(sel_args);
    if (train->parsed()) return cmd_train(tr);
    if (eval->parsed()) return cmd_eval(ev);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

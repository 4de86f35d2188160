#include "mhpl/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "mhpl/train.hpp"

namespace mhpl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      const auto t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  const auto t = trim(cur);
  if (!t.empty()) out.push_back(t);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + " = '" + v + "' is not a number");
  }
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError(key + " = '" + v + "' is not an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError(key + " = '" + v + "' is not a boolean");
}

}  // namespace

Index parse_budget(const std::string& token, Index n) {
  const bool fractional = token.find('.') != std::string::npos ||
                          token.find('e') != std::string::npos ||
                          token.find('E') != std::string::npos;
  if (fractional) {
    const double f = to_double("budget", token);
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("budget fraction must be in (0,1]");
    return static_cast<Index>(std::llround(f * static_cast<double>(n)));
  }
  const long m = to_long("budget", token);
  if (m < 0 || m > n) throw BudgetExceedsN(m, n);
  return m;
}

Ablation parse_ablation(const std::string& token) {
  Ablation a;
  if (token == "none" || token.empty()) return a;
  if (token == "no_np") {
    a.no_np = true;
  } else if (token == "no_na") {
    a.no_na = true;
  } else if (token == "no_ndr") {
    a.no_ndr = true;
  } else if (token == "no_nf_weight") {
    a.no_nf_weight = true;
  } else if (token.rfind("query_epoch_", 0) == 0) {
    a.query_epoch = static_cast<int>(to_long("ablation", token.substr(12)));
    if (a.query_epoch < 0) throw ConfigError("query_epoch must be >= 0");
  } else {
    throw ConfigError("unknown ablation '" + token + "'");
  }
  return a;
}

SweepSpec parse_sweep_config(std::istream& in) {
  SweepSpec spec;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "data") {
      if (val == "synthetic") spec.synthetic = true;
      else if (val == "files") spec.synthetic = false;
      else throw ConfigError("data must be synthetic or files");
    } else if (key == "k") spec.shift_spec.k = static_cast<int>(to_long(key, val));
    else if (key == "d") spec.shift_spec.d = to_long(key, val);
    else if (key == "n_source") spec.shift_spec.n_source = to_long(key, val);
    else if (key == "n_target") spec.shift_spec.n_target = to_long(key, val);
    else if (key == "sigma") spec.shift_spec.sigma = to_double(key, val);
    else if (key == "shift") spec.shift_spec.shift = to_double(key, val);
    else if (key == "target_like_frac") spec.shift_spec.target_like_frac = to_double(key, val);
    else if (key == "target_features") spec.target_features = val;
    else if (key == "source_features") spec.source_features = val;
    else if (key == "source_model") spec.source_model = val;
    else if (key == "k_override") spec.k_override = static_cast<int>(to_long(key, val));
    else if (key == "strategies") spec.strategies = split_list(val);
    else if (key == "budgets") spec.budgets = split_list(val);
    else if (key == "seeds") {
      spec.seeds.clear();
      for (const auto& t : split_list(val))
        spec.seeds.push_back(static_cast<std::uint64_t>(to_long(key, t)));
    } else if (key == "ablations") spec.ablations = split_list(val);
    else if (key == "alpha") spec.train.alpha = to_double(key, val);
    else if (key == "beta") spec.train.beta = to_double(key, val);
    else if (key == "lr") spec.train.lr = to_double(key, val);
    else if (key == "momentum") spec.train.momentum = to_double(key, val);
    else if (key == "batch_size") spec.train.batch_size = static_cast<int>(to_long(key, val));
    else if (key == "epochs") spec.train.epochs = static_cast<int>(to_long(key, val));
    else if (key == "iters_per_epoch") spec.train.iters_per_epoch = static_cast<int>(to_long(key, val));
    else if (key == "q") spec.train.q = static_cast<int>(to_long(key, val));
    else if (key == "cluster_rounds") spec.train.cluster_rounds = static_cast<int>(to_long(key, val));
    else if (key == "hidden") spec.train.hidden = static_cast<int>(to_long(key, val));
    else if (key == "lr_decay_power") spec.train.lr_decay_power = to_double(key, val);
    else if (key == "recluster_each_epoch") spec.train.recluster_each_epoch = to_bool(key, val);
    else if (key == "workers") spec.workers = static_cast<int>(to_long(key, val));
    else throw ConfigError("unknown key '" + key + "'");
  }
  if (spec.strategies.empty()) throw ConfigError("strategies list is empty");
  if (spec.budgets.empty()) throw ConfigError("budgets list is empty");
  if (spec.seeds.empty()) throw ConfigError("seeds list is empty");
  if (spec.ablations.empty()) spec.ablations = {"none"};
  for (const auto& s : spec.strategies)
    if (!parse_strategy(s)) throw ConfigError("unknown strategy '" + s + "'");
  for (const auto& a : spec.ablations) parse_ablation(a);  // validates
  if (!spec.synthetic && spec.target_features.empty())
    throw ConfigError("data = files needs target_features");
  if (!spec.synthetic && spec.source_features.empty() && spec.source_model.empty())
    throw ConfigError("data = files needs source_features or source_model");
  if (spec.workers < 1) throw ConfigError("workers must be >= 1");
  return spec;
}

SweepSpec parse_sweep_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open " + path);
  return parse_sweep_config(in);
}

namespace {

struct Cell {
  std::string strategy;
  std::string budget;
  std::uint64_t seed = 0;
  std::string ablation;
};

SweepRow run_cell(const SweepSpec& spec, const Cell& cell) {
  // Build the data and the source model for this cell.
  FeatureSet target;
  AdaptModel source;
  if (spec.synthetic) {
    ShiftSpec ss = spec.shift_spec;
    ss.seed = cell.seed;
    SynthData data = generate(ss);
    source = train_source_head(data.source).model;
    target = std::move(data.target);
  } else {
    target = load_feature_set(spec.target_features,
                              spec.target_features.ends_with(".csv") ? FileFormat::Csv
                                                                     : FileFormat::Binary,
                              spec.k_override);
    target = normalize_rows(target).fs;
    if (!spec.source_model.empty()) {
      source = load_checkpoint(spec.source_model);
    } else {
      FeatureSet src = load_feature_set(spec.source_features,
                                        spec.source_features.ends_with(".csv")
                                            ? FileFormat::Csv
                                            : FileFormat::Binary,
                                        spec.k_override);
      src = normalize_rows(src).fs;
      source = train_source_head(src).model;
    }
  }

  TrainConfig cfg = spec.train;
  cfg.seed = cell.seed;
  cfg.ablation = parse_ablation(cell.ablation);

  const Index m = parse_budget(cell.budget, target.n);
  const auto oracle = oracle_from_labels(target);
  const Strategy strat = *parse_strategy(cell.strategy);

  RunResult run;
  if (strat == Strategy::Mhpl) {
    run = run_mhpl(target, source, cfg, m, oracle);
  } else {
    // Baselines exploit their labels with plain cross-entropy.
    cfg.ablation.no_nf_weight = true;
    const Mat probs = source.probs(target.features);
    const NeighborGraph g = build_graph(target, cfg.q);
    const PseudoLabels pl = cluster_assign(target, probs, cfg.cluster_rounds);
    SelectionResult sel = baseline_select(strat, target, &probs, &g, &pl, m, cell.seed);
    run = run_adapt(target, source, cfg, sel, oracle);
  }

  SweepRow row;
  row.strategy = cell.strategy;
  row.budget = cell.budget;
  row.seed = cell.seed;
  row.ablation = cell.ablation;
  row.final_acc = run.report.final_acc.value_or(std::nan(""));
  row.target_like_frac_selected = target_like_fraction(target, run.report.selection);
  row.wall_ms = run.report.wall_ms;
  return row;
}

}  // namespace

SweepOutput run_sweep(const SweepSpec& spec) {
  std::vector<Cell> cells;
  for (const auto& strategy : spec.strategies)
    for (const auto& budget : spec.budgets)
      for (const auto& seed : spec.seeds)
        for (const auto& ablation : spec.ablations) cells.push_back({strategy, budget, seed, ablation});

  SweepOutput out;
  out.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::string first_error;

  const int workers = std::min<int>(spec.workers, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        try {
          out.rows[i] = run_cell(spec, cells[i]);
        } catch (const std::exception& e) {
          std::lock_guard lock(err_mutex);
          if (first_error.empty())
            first_error = "cell " + cells[i].strategy + "/" + cells[i].budget + "/seed " +
                          std::to_string(cells[i].seed) + "/" + cells[i].ablation + ": " + e.what();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (!first_error.empty()) throw Error(first_error);
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void write_sweep_csv(const SweepOutput& out, std::ostream& os) {
  os << "strategy,budget,seed,ablation,final_acc,target_like_frac_selected,wall_ms\n";
  for (const auto& r : out.rows) {
    os << r.strategy << ',' << r.budget << ',' << r.seed << ',' << r.ablation << ','
       << fmt(r.final_acc) << ',';
    if (r.target_like_frac_selected) os << fmt(*r.target_like_frac_selected);
    os << ',' << r.wall_ms << "\n";
  }
}

void write_sweep_summary(const SweepOutput& out, std::ostream& os) {
  struct Agg {
    std::vector<double> acc;
    std::vector<double> tl;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Agg> groups;
  for (const auto& r : out.rows) {
    auto& g = groups[{r.strategy, r.budget, r.ablation}];
    g.acc.push_back(r.final_acc);
    if (r.target_like_frac_selected) g.tl.push_back(*r.target_like_frac_selected);
  }
  os << "strategy,budget,ablation,runs,mean_acc,std_acc,mean_target_like_frac\n";
  for (const auto& [key, g] : groups) {
    double mean = 0.0;
    for (double a : g.acc) mean += a;
    mean /= static_cast<double>(g.acc.size());
    double var = 0.0;
    for (double a : g.acc) var += (a - mean) * (a - mean);
    var = g.acc.size() > 1 ? var / static_cast<double>(g.acc.size() - 1) : 0.0;
    double tl_mean = 0.0;
    for (double t : g.tl) tl_mean += t;
    os << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
       << g.acc.size() << ',' << fmt(mean) << ',' << fmt(std::sqrt(var)) << ',';
    if (!g.tl.empty()) os << fmt(tl_mean / static_cast<double>(g.tl.size()));
    os << "\n";
  }
}

}  // namespace mhpl

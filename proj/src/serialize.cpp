#include "mhpl/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mhpl {

using nlohmann::json;

json selection_to_json(const SelectionResult& sel) {
  json selected = json::array();
  for (const auto& s : sel.selected)
    selected.push_back({{"index", s.index},
                        {"nau", s.nau},
                        {"np", s.np},
                        {"na", s.na},
                        {"fallback", s.fallback}});
  json skipped = json::array();
  for (const auto& s : sel.skipped)
    skipped.push_back({{"index", s.index}, {"reason", s.reason}});
  return {{"schema_version", kSchemaVersion},
          {"strategy", strategy_name(sel.strategy)},
          {"budget", sel.budget},
          {"seed", sel.seed},
          {"selected", selected},
          {"skipped", skipped}};
}

SelectionResult selection_from_json(const json& j) {
  SelectionResult sel;
  const auto strat = parse_strategy(j.at("strategy").get<std::string>());
  if (!strat) throw MalformedFile("unknown strategy in selection JSON");
  sel.strategy = *strat;
  sel.budget = j.at("budget").get<Index>();
  sel.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& e : j.at("selected")) {
    SelectedSample s;
    s.index = e.at("index").get<Index>();
    s.nau = e.at("nau").get<double>();
    s.np = e.at("np").get<double>();
    s.na = e.at("na").get<double>();
    s.fallback = e.at("fallback").get<bool>();
    sel.selected.push_back(s);
  }
  if (j.contains("skipped"))
    for (const auto& e : j.at("skipped"))
      sel.skipped.push_back({e.at("index").get<Index>(), e.at("reason").get<std::string>()});
  return sel;
}

json config_to_json(const TrainConfig& cfg) {
  return {{"alpha", cfg.alpha},
          {"beta", cfg.beta},
          {"lr", cfg.lr},
          {"momentum", cfg.momentum},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"iters_per_epoch", cfg.iters_per_epoch},
          {"q", cfg.q},
          {"seed", cfg.seed},
          {"recluster_each_epoch", cfg.recluster_each_epoch},
          {"cluster_rounds", cfg.cluster_rounds},
          {"hidden", cfg.hidden},
          {"lr_decay_power", cfg.lr_decay_power},
          {"ablation",
           {{"no_np", cfg.ablation.no_np},
            {"no_na", cfg.ablation.no_na},
            {"no_ndr", cfg.ablation.no_ndr},
            {"no_nf_weight", cfg.ablation.no_nf_weight},
            {"query_epoch", cfg.ablation.query_epoch}}}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.beta = j.value("beta", cfg.beta);
  cfg.lr = j.value("lr", cfg.lr);
  cfg.momentum = j.value("momentum", cfg.momentum);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.iters_per_epoch = j.value("iters_per_epoch", cfg.iters_per_epoch);
  cfg.q = j.value("q", cfg.q);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.recluster_each_epoch = j.value("recluster_each_epoch", cfg.recluster_each_epoch);
  cfg.cluster_rounds = j.value("cluster_rounds", cfg.cluster_rounds);
  cfg.hidden = j.value("hidden", cfg.hidden);
  cfg.lr_decay_power = j.value("lr_decay_power", cfg.lr_decay_power);
  if (j.contains("ablation")) {
    const auto& a = j.at("ablation");
    cfg.ablation.no_np = a.value("no_np", false);
    cfg.ablation.no_na = a.value("no_na", false);
    cfg.ablation.no_ndr = a.value("no_ndr", false);
    cfg.ablation.no_nf_weight = a.value("no_nf_weight", false);
    cfg.ablation.query_epoch = a.value("query_epoch", 0);
  }
  return cfg;
}

json report_to_json(const RunReport& report, const std::string& timestamp) {
  json epochs = json::array();
  for (const auto& e : report.epochs) {
    json je = {{"epoch", e.epoch},
               {"nf_labeled", e.mean_loss.nf_labeled},
               {"nf_unlabeled", e.mean_loss.nf_unlabeled},
               {"ent", e.mean_loss.ent},
               {"div", e.mean_loss.div},
               {"total", e.mean_loss.total}};
    if (e.target_acc) je["target_acc"] = *e.target_acc;
    epochs.push_back(je);
  }
  json j = {{"schema_version", kSchemaVersion},
            {"config", config_to_json(report.config)},
            {"selection", selection_to_json(report.selection)},
            {"epochs", epochs},
            {"wall_ms", report.wall_ms},
            {"timestamp", timestamp}};
  if (report.source_acc) j["source_acc"] = *report.source_acc;
  if (report.final_acc) j["final_acc"] = *report.final_acc;
  return j;
}

json manifest_to_json(const ShiftSpec& spec, const SynthData& data) {
  return {{"schema_version", kSchemaVersion},
          {"spec",
           {{"k", spec.k},
            {"d", spec.d},
            {"n_source", spec.n_source},
            {"n_target", spec.n_target},
            {"sigma", spec.sigma},
            {"shift", spec.shift},
            {"target_like_frac", spec.target_like_frac}}},
          {"seed", spec.seed},
          {"per_class_counts",
           {{"source", data.source_class_counts}, {"target", data.target_class_counts}}},
          {"tag_counts",
           {{"source_like", data.target.n - data.target_like_count},
            {"target_like", data.target_like_count}}}};
}

void write_annotation_template(const SelectionResult& sel, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw UnwritablePath(path);
  f << "index,label\n";
  for (const auto& s : sel.selected) f << s.index << ",\n";
  if (!f) throw UnwritablePath(path);
}

std::map<Index, int> read_annotation_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw MalformedHeader("empty annotation file " + path);
  if (line.rfind("index,label", 0) != 0)
    throw MalformedHeader("annotation file must start with 'index,label'");
  std::map<Index, int> out;
  Index row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DimensionMismatch(row, "annotation rows need two fields");
    Index idx = 0;
    int label = 0;
    const auto r1 = std::from_chars(line.data(), line.data() + comma, idx);
    const char* lbl_begin = line.data() + comma + 1;
    const char* lbl_end = line.data() + line.size();
    while (lbl_end > lbl_begin && (lbl_end[-1] == '\r' || lbl_end[-1] == ' ')) --lbl_end;
    const auto r2 = std::from_chars(lbl_begin, lbl_end, label);
    if (r1.ec != std::errc() || r2.ec != std::errc() || r2.ptr != lbl_end)
      throw DimensionMismatch(row, "unparseable annotation row '" + line + "'");
    out[idx] = label;
  }
  return out;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw UnwritablePath(path);
  f << j.dump(2) << "\n";
  if (!f) throw UnwritablePath(path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw MalformedFile(path + ": " + e.what());
  }
  return j;
}

}  // namespace mhpl

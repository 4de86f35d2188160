#pragma once

#include <map>
#include <string>

#include "mhpl/selection.hpp"
#include "mhpl/synth.hpp"
#include "mhpl/train.hpp"

#include "json.hpp"

namespace mhpl {

// All emitted JSON documents carry this version.
constexpr int kSchemaVersion = 1;

nlohmann::json selection_to_json(const SelectionResult& sel);
SelectionResult selection_from_json(const nlohmann::json& j);

// Run report. Every field is a pure function of (inputs, seed) except the
// "timestamp" key and the measured "wall_ms" duration.
nlohmann::json report_to_json(const RunReport& report, const std::string& timestamp);

nlohmann::json manifest_to_json(const ShiftSpec& spec, const SynthData& data);

nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& j);

// Annotation files: CSV `index,label`, one row per selected index. The
// template writer leaves the label column empty for the annotator.
void write_annotation_template(const SelectionResult& sel, const std::string& path);
std::map<Index, int> read_annotation_csv(const std::string& path);

void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

}  // namespace mhpl

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "switchsim/pipeline.hpp"

namespace switchsim::io {

using json = nlohmann::ordered_json;

std::string fnv1a_hex(const std::string& data);

// Shortest round-trip decimal form; used everywhere a double lands in a
// text file so outputs stay diff-stable.
std::string format_double(double v);

json env_config_to_json(const EnvConfig& c);
EnvConfig env_config_from_json(const json& j);
json shift_spec_to_json(const ShiftSpec& s);
ShiftSpec shift_spec_from_json(const json& j);
json optimizer_to_json(const OptimizerConfig& o);
OptimizerConfig optimizer_from_json(const json& j);
json run_config_to_json(const RunConfig& c);
RunConfig run_config_from_json(const json& j);

std::string config_hash(const RunConfig& c);

// Loads and validates a config file. When the stopping section references a
// tuning record (crossval file), the four criteria are derived here via
// make_criterion; relative paths resolve against the config file's directory.
RunConfig load_run_config(const std::string& path);

json policy_to_json(const PolicyNet& net, const json& meta);
PolicyNet policy_from_json(const json& j);
void save_policy(const PolicyNet& net, const std::string& path,
                 const json& meta);
PolicyNet load_policy(const std::string& path);

// metrics.csv: header "iteration,kind,value", rows ordered by iteration then
// kind (sim_reward first).
void write_metrics_csv(const RunLog& log, const std::string& path);

struct MetricsCsv {
  MetricSeries reward;
  MetricSeries uncertainty;
};
// Strict parse; malformed rows and out-of-order iterations are reported with
// their 1-based line number.
MetricsCsv read_metrics_csv(const std::string& path);

void write_crossval(const CrossValRecord& record, const std::string& path);
CrossValRecord read_crossval(const std::string& path);

json decisions_to_json(const std::map<std::string, StopDecision>& decisions);

json deployment_report_to_json(const DeploymentReport& r);
DeploymentReport deployment_report_from_json(const json& j);

// Run directory layout: run.json (config, decisions, snapshot registry),
// runlog.jsonl, metrics.csv, crossval.json, stopping.json, snapshots/.
void write_run_dir(const RunLog& log, const std::string& dir);

struct StoredRun {
  RunLog log;  // snapshots left empty; use snapshot_paths
  std::map<int, std::string> snapshot_paths;
  std::string dir;

  PolicyNet load_snapshot(int iteration) const;
};
StoredRun load_run_dir(const std::string& dir);

// Creates (or with fresh=true, wipes and recreates) an output directory. A
// marker file guards against deleting directories this tool does not own.
// Refuses to reuse a nonempty directory without fresh.
void prepare_out_dir(const std::string& dir, bool fresh);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace switchsim::io

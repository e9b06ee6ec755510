#include "switchsim/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "switchsim/errors.hpp"

namespace switchsim::io {

namespace fs = std::filesystem;

namespace {
constexpr const char* kRunMarker = ".switchsim";
constexpr int kRunFormat = 1;
}  // namespace

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) h = (h ^ c) * 0x100000001b3ULL;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json env_config_to_json(const EnvConfig& c) {
  return json{{"grid_size", c.grid_size},
              {"cloth_side", c.cloth_side},
              {"spring_stiffness", c.spring_stiffness},
              {"spring_damping", c.spring_damping},
              {"ground_friction", c.ground_friction},
              {"integration_dt", c.integration_dt},
              {"relaxation_steps", c.relaxation_steps},
              {"obs_size", c.obs_size},
              {"face_brightness_top", c.face_brightness_top},
              {"face_brightness_bottom", c.face_brightness_bottom},
              {"background_brightness", c.background_brightness},
              {"obs_noise_std", c.obs_noise_std},
              {"coverage_target", c.coverage_target},
              {"max_actions", c.max_actions},
              {"crumple_actions", c.crumple_actions}};
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace

EnvConfig env_config_from_json(const json& j) {
  EnvConfig c;
  read_field(j, "grid_size", c.grid_size);
  read_field(j, "cloth_side", c.cloth_side);
  read_field(j, "spring_stiffness", c.spring_stiffness);
  read_field(j, "spring_damping", c.spring_damping);
  read_field(j, "ground_friction", c.ground_friction);
  read_field(j, "integration_dt", c.integration_dt);
  read_field(j, "relaxation_steps", c.relaxation_steps);
  read_field(j, "obs_size", c.obs_size);
  read_field(j, "face_brightness_top", c.face_brightness_top);
  read_field(j, "face_brightness_bottom", c.face_brightness_bottom);
  read_field(j, "background_brightness", c.background_brightness);
  read_field(j, "obs_noise_std", c.obs_noise_std);
  read_field(j, "coverage_target", c.coverage_target);
  read_field(j, "max_actions", c.max_actions);
  read_field(j, "crumple_actions", c.crumple_actions);
  c.validate();
  return c;
}

json shift_spec_to_json(const ShiftSpec& s) {
  return json{{"stiffness_scale", s.stiffness_scale},
              {"damping_scale", s.damping_scale},
              {"friction_scale", s.friction_scale},
              {"brightness_offset_top", s.brightness_offset_top},
              {"brightness_offset_bottom", s.brightness_offset_bottom},
              {"brightness_offset_background", s.brightness_offset_background},
              {"noise_std_offset", s.noise_std_offset}};
}

ShiftSpec shift_spec_from_json(const json& j) {
  ShiftSpec s;
  read_field(j, "stiffness_scale", s.stiffness_scale);
  read_field(j, "damping_scale", s.damping_scale);
  read_field(j, "friction_scale", s.friction_scale);
  read_field(j, "brightness_offset_top", s.brightness_offset_top);
  read_field(j, "brightness_offset_bottom", s.brightness_offset_bottom);
  read_field(j, "brightness_offset_background", s.brightness_offset_background);
  read_field(j, "noise_std_offset", s.noise_std_offset);
  return s;
}

json optimizer_to_json(const OptimizerConfig& o) {
  return json{{"learning_rate", o.learning_rate},
              {"l2_coefficient", o.l2_coefficient},
              {"minibatch_size", o.minibatch_size},
              {"steps_per_epoch", o.steps_per_epoch},
              {"beta1", o.beta1},
              {"beta2", o.beta2},
              {"epsilon", o.epsilon}};
}

OptimizerConfig optimizer_from_json(const json& j) {
  OptimizerConfig o;
  read_field(j, "learning_rate", o.learning_rate);
  read_field(j, "l2_coefficient", o.l2_coefficient);
  read_field(j, "minibatch_size", o.minibatch_size);
  read_field(j, "steps_per_epoch", o.steps_per_epoch);
  read_field(j, "beta1", o.beta1);
  read_field(j, "beta2", o.beta2);
  read_field(j, "epsilon", o.epsilon);
  o.validate();
  return o;
}

namespace {

json value_stop_to_json(const ValueStopConfig& v) {
  return json{{"threshold_a", v.threshold_a},
              {"direction", v.direction == StopDirection::at_least
                                ? "at_least"
                                : "at_most"},
              {"min_history", v.min_history}};
}

ValueStopConfig value_stop_from_json(const json& j) {
  ValueStopConfig v;
  read_field(j, "threshold_a", v.threshold_a);
  std::string dir = v.direction == StopDirection::at_least ? "at_least" : "at_most";
  read_field(j, "direction", dir);
  if (dir == "at_least")
    v.direction = StopDirection::at_least;
  else if (dir == "at_most")
    v.direction = StopDirection::at_most;
  else
    throw ConfigError("direction must be at_least or at_most");
  read_field(j, "min_history", v.min_history);
  return v;
}

json gradient_stop_to_json(const GradientStopConfig& g) {
  return json{{"epsilon", g.epsilon},
              {"max_consecutive", g.max_consecutive},
              {"max_total", g.max_total},
              {"min_history", g.min_history},
              {"delta", g.delta}};
}

GradientStopConfig gradient_stop_from_json(const json& j) {
  GradientStopConfig g;
  read_field(j, "epsilon", g.epsilon);
  read_field(j, "max_consecutive", g.max_consecutive);
  read_field(j, "max_total", g.max_total);
  read_field(j, "min_history", g.min_history);
  read_field(j, "delta", g.delta);
  return g;
}

json criterion_to_json(const CriterionConfig& c) {
  json j{{"metric", metric_kind_name(c.metric)},
         {"condition", c.condition == ConditionKind::value ? "value" : "gradient"}};
  if (c.condition == ConditionKind::value)
    j["value"] = value_stop_to_json(c.value);
  else
    j["gradient"] = gradient_stop_to_json(c.gradient);
  return j;
}

CriterionConfig criterion_from_json(const json& j, MetricKind metric,
                                    ConditionKind condition) {
  CriterionConfig c;
  c.metric = metric;
  c.condition = condition;
  if (condition == ConditionKind::value) {
    c.value = value_stop_from_json(j.contains("value") ? j.at("value") : j);
  } else {
    c.gradient =
        gradient_stop_from_json(j.contains("gradient") ? j.at("gradient") : j);
  }
  return c;
}

json stopping_to_json(const StoppingSetup& s) {
  json j;
  j["designated"] = s.designated;
  if (s.reward_value) j["reward_value"] = criterion_to_json(*s.reward_value);
  if (s.reward_gradient)
    j["reward_gradient"] = criterion_to_json(*s.reward_gradient);
  if (s.uncertainty_value)
    j["uncertainty_value"] = criterion_to_json(*s.uncertainty_value);
  if (s.uncertainty_gradient)
    j["uncertainty_gradient"] = criterion_to_json(*s.uncertainty_gradient);
  return j;
}

TuningConstants tuning_constants_from_json(const json& j) {
  TuningConstants t;
  read_field(j, "reward_slack", t.reward_slack);
  read_field(j, "uncertainty_margin", t.uncertainty_margin);
  read_field(j, "early_fraction", t.early_fraction);
  read_field(j, "early_quantile", t.early_quantile);
  read_field(j, "max_consecutive", t.max_consecutive);
  read_field(j, "max_total", t.max_total);
  read_field(j, "min_history", t.min_history);
  read_field(j, "delta", t.delta);
  return t;
}

}  // namespace

json run_config_to_json(const RunConfig& c) {
  json j;
  j["env"] = env_config_to_json(c.env);
  j["shift"] = shift_spec_to_json(c.shift);
  j["optimizer"] = optimizer_to_json(c.optimizer);
  j["spline"] = json{{"lambda", c.spline_lambda}};
  j["run"] = json{{"iterations", c.iterations},
                  {"demos_per_iteration", c.demos_per_iteration},
                  {"eval_rollouts", c.eval_rollouts},
                  {"ensemble_size", c.ensemble_size},
                  {"master_seed", c.master_seed},
                  {"ensemble_refresh", c.ensemble_refresh},
                  {"ensemble_epochs", c.ensemble_epochs},
                  {"holdout_episodes", c.holdout_episodes},
                  {"eval_episodes", c.eval_episodes},
                  {"hidden_layers", c.hidden_layers}};
  if (c.stopping) j["stopping"] = stopping_to_json(*c.stopping);
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  if (j.contains("env")) c.env = env_config_from_json(j.at("env"));
  if (j.contains("shift")) c.shift = shift_spec_from_json(j.at("shift"));
  if (j.contains("optimizer"))
    c.optimizer = optimizer_from_json(j.at("optimizer"));
  if (j.contains("spline")) read_field(j.at("spline"), "lambda", c.spline_lambda);
  if (j.contains("run")) {
    const json& r = j.at("run");
    read_field(r, "iterations", c.iterations);
    read_field(r, "demos_per_iteration", c.demos_per_iteration);
    read_field(r, "eval_rollouts", c.eval_rollouts);
    read_field(r, "ensemble_size", c.ensemble_size);
    read_field(r, "master_seed", c.master_seed);
    read_field(r, "ensemble_refresh", c.ensemble_refresh);
    read_field(r, "ensemble_epochs", c.ensemble_epochs);
    read_field(r, "holdout_episodes", c.holdout_episodes);
    read_field(r, "eval_episodes", c.eval_episodes);
    read_field(r, "hidden_layers", c.hidden_layers);
  }
  if (j.contains("stopping")) {
    const json& s = j.at("stopping");
    StoppingSetup setup;
    read_field(s, "designated", setup.designated);
    if (s.contains("tuning")) {
      // resolved by load_run_config, which knows the config file directory
      throw ConfigError(
          "stopping.tuning must be resolved via load_run_config");
    }
    if (s.contains("reward_value"))
      setup.reward_value = criterion_from_json(
          s.at("reward_value"), MetricKind::sim_reward, ConditionKind::value);
    if (s.contains("reward_gradient"))
      setup.reward_gradient =
          criterion_from_json(s.at("reward_gradient"), MetricKind::sim_reward,
                              ConditionKind::gradient);
    if (s.contains("uncertainty_value"))
      setup.uncertainty_value = criterion_from_json(
          s.at("uncertainty_value"), MetricKind::epistemic_uncertainty,
          ConditionKind::value);
    if (s.contains("uncertainty_gradient"))
      setup.uncertainty_gradient = criterion_from_json(
          s.at("uncertainty_gradient"), MetricKind::epistemic_uncertainty,
          ConditionKind::gradient);
    c.stopping = setup;
  }
  c.validate();
  return c;
}

std::string config_hash(const RunConfig& c) {
  return fnv1a_hex(run_config_to_json(c).dump());
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " +
                      e.what());
  }

  std::optional<json> tuning;
  if (j.contains("stopping") && j.at("stopping").contains("tuning")) {
    tuning = j.at("stopping").at("tuning");
    j.at("stopping").erase("tuning");
  }
  RunConfig cfg = run_config_from_json(j);

  if (tuning) {
    if (!tuning->contains("crossval_path"))
      throw ConfigError("stopping.tuning requires crossval_path");
    std::string cv_path = tuning->at("crossval_path").get<std::string>();
    if (!fs::path(cv_path).is_absolute()) {
      cv_path = (fs::path(path).parent_path() / cv_path).string();
    }
    const CrossValRecord record = read_crossval(cv_path);
    const TuningConstants constants = tuning_constants_from_json(*tuning);
    StoppingSetup setup = cfg.stopping.value_or(StoppingSetup{});
    if (j.contains("stopping") && j.at("stopping").contains("designated"))
      setup.designated = j.at("stopping").at("designated").get<std::string>();
    setup.reward_value =
        make_criterion(MetricKind::sim_reward, ConditionKind::value, record,
                       constants, cfg.spline_lambda);
    setup.reward_gradient =
        make_criterion(MetricKind::sim_reward, ConditionKind::gradient, record,
                       constants, cfg.spline_lambda);
    setup.uncertainty_value =
        make_criterion(MetricKind::epistemic_uncertainty, ConditionKind::value,
                       record, constants, cfg.spline_lambda);
    setup.uncertainty_gradient =
        make_criterion(MetricKind::epistemic_uncertainty,
                       ConditionKind::gradient, record, constants,
                       cfg.spline_lambda);
    cfg.stopping = setup;
    cfg.validate();
  }
  return cfg;
}

json policy_to_json(const PolicyNet& net, const json& meta) {
  json j;
  j["format"] = kRunFormat;
  j["kind"] = "policy";
  j["meta"] = meta;
  j["layer_sizes"] = net.layer_sizes;
  j["activation"] = "tanh";
  j["weights"] = net.weights;
  j["biases"] = net.biases;
  return j;
}

PolicyNet policy_from_json(const json& j) {
  if (!j.contains("layer_sizes") || !j.contains("weights") ||
      !j.contains("biases"))
    throw ConfigError("policy file missing layer_sizes/weights/biases");
  PolicyNet net;
  net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  net.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  net.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  if (net.weights.size() + 1 != net.layer_sizes.size() ||
      net.biases.size() != net.weights.size())
    throw ConfigError("policy file layer shape mismatch");
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const std::size_t rows = static_cast<std::size_t>(net.layer_sizes[l + 1]);
    const std::size_t cols = static_cast<std::size_t>(net.layer_sizes[l]);
    if (net.weights[l].size() != rows * cols || net.biases[l].size() != rows)
      throw ConfigError("policy file parameter count mismatch");
  }
  return net;
}

void save_policy(const PolicyNet& net, const std::string& path,
                 const json& meta) {
  write_text_file(path, policy_to_json(net, meta).dump());
}

PolicyNet load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("policy file " + path + " is not valid JSON: " + e.what());
  }
  return policy_from_json(j);
}

void write_metrics_csv(const RunLog& log, const std::string& path) {
  std::ostringstream out;
  out << "iteration,kind,value\n";
  for (const IterationRecord& r : log.records) {
    out << r.iteration << ",sim_reward," << format_double(r.sim_reward)
        << "\n";
    out << r.iteration << ",epistemic_uncertainty,"
        << format_double(r.epistemic_uncertainty) << "\n";
  }
  write_text_file(path, out.str());
}

MetricsCsv read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open metrics csv: " + path);
  MetricsCsv csv;
  csv.reward.kind = MetricKind::sim_reward;
  csv.uncertainty.kind = MetricKind::epistemic_uncertainty;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "iteration,kind,value")
        throw ConfigError("metrics csv line 1: expected header "
                          "'iteration,kind,value'");
      continue;
    }
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw ConfigError("metrics csv line " + std::to_string(line_no) +
                        ": expected 3 comma-separated fields");
    const std::string it_str = line.substr(0, c1);
    const std::string kind_str = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string val_str = line.substr(c2 + 1);

    int iteration = 0;
    auto [p1, e1] =
        std::from_chars(it_str.data(), it_str.data() + it_str.size(), iteration);
    if (e1 != std::errc() || p1 != it_str.data() + it_str.size())
      throw ConfigError("metrics csv line " + std::to_string(line_no) +
                        ": bad iteration '" + it_str + "'");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(val_str, &used);
      if (used != val_str.size()) throw std::invalid_argument(val_str);
    } catch (const std::exception&) {
      throw ConfigError("metrics csv line " + std::to_string(line_no) +
                        ": bad value '" + val_str + "'");
    }

    MetricSeries* series = nullptr;
    if (kind_str == "sim_reward")
      series = &csv.reward;
    else if (kind_str == "epistemic_uncertainty")
      series = &csv.uncertainty;
    else
      throw ConfigError("metrics csv line " + std::to_string(line_no) +
                        ": unknown kind '" + kind_str + "'");
    try {
      series->append(iteration, value);
    } catch (const ConfigError&) {
      throw ConfigError("metrics csv line " + std::to_string(line_no) +
                        ": iterations out of order for kind '" + kind_str +
                        "'");
    }
  }
  return csv;
}

void write_crossval(const CrossValRecord& record, const std::string& path) {
  json j;
  j["format"] = kRunFormat;
  j["iterations"] = record.iterations;
  j["reward"] = record.reward;
  j["uncertainty"] = record.uncertainty;
  j["rollout_seeds"] = record.rollout_seeds;
  write_text_file(path, j.dump(2));
}

CrossValRecord read_crossval(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open crossval file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("crossval file " + path + " is not valid JSON: " +
                      e.what());
  }
  CrossValRecord record;
  record.iterations = j.at("iterations").get<std::vector<int>>();
  record.reward = j.at("reward").get<std::vector<double>>();
  record.uncertainty = j.at("uncertainty").get<std::vector<double>>();
  if (j.contains("rollout_seeds"))
    record.rollout_seeds = j.at("rollout_seeds").get<std::vector<std::uint64_t>>();
  if (record.reward.size() != record.iterations.size() ||
      record.uncertainty.size() != record.iterations.size())
    throw ConfigError("crossval file series lengths disagree");
  return record;
}

json decisions_to_json(const std::map<std::string, StopDecision>& decisions) {
  json j = json::array();
  for (const auto& [name, d] : decisions) {
    j.push_back(json{{"criterion", name},
                     {"fired", d.fired},
                     {"fired_iteration", d.fired ? d.iteration : -1},
                     {"reason", stop_reason_name(d.reason)},
                     {"diagnostic", d.diagnostic}});
  }
  return j;
}

json deployment_report_to_json(const DeploymentReport& r) {
  json episodes = json::array();
  for (const auto& e : r.episodes) {
    episodes.push_back(json{{"initial_coverage", e.initial_coverage},
                            {"final_coverage", e.final_coverage},
                            {"coverage_curve", e.coverage_curve},
                            {"actions_used", e.actions_used}});
  }
  return json{{"snapshot_iteration", r.snapshot_iteration},
              {"episodes", episodes},
              {"mean_initial", r.mean_initial},
              {"mean_final", r.mean_final},
              {"stderr_final", r.stderr_final},
              {"improvement_ratio", r.improvement_ratio},
              {"mean_actions", r.mean_actions}};
}

DeploymentReport deployment_report_from_json(const json& j) {
  DeploymentReport r;
  r.snapshot_iteration = j.at("snapshot_iteration").get<int>();
  for (const json& e : j.at("episodes")) {
    DeploymentEpisode ep;
    ep.initial_coverage = e.at("initial_coverage").get<double>();
    ep.final_coverage = e.at("final_coverage").get<double>();
    ep.coverage_curve = e.at("coverage_curve").get<std::vector<double>>();
    ep.actions_used = e.at("actions_used").get<int>();
    r.episodes.push_back(std::move(ep));
  }
  r.mean_initial = j.at("mean_initial").get<double>();
  r.mean_final = j.at("mean_final").get<double>();
  r.stderr_final = j.at("stderr_final").get<double>();
  r.improvement_ratio = j.at("improvement_ratio").get<double>();
  r.mean_actions = j.at("mean_actions").get<double>();
  return r;
}

void write_run_dir(const RunLog& log, const std::string& dir) {
  const std::string hash = config_hash(log.config);
  fs::create_directories(fs::path(dir) / "snapshots");

  // per-iteration records
  std::ostringstream runlog;
  for (const IterationRecord& r : log.records) {
    json j{{"iteration", r.iteration},
           {"dataset_size", r.dataset_size},
           {"bc_loss", r.bc_loss},
           {"sim_reward", r.sim_reward},
           {"epistemic_uncertainty", r.epistemic_uncertainty},
           {"eval_seed", r.eval_seed}};
    runlog << j.dump() << "\n";
  }
  write_text_file((fs::path(dir) / "runlog.jsonl").string(), runlog.str());

  write_metrics_csv(log, (fs::path(dir) / "metrics.csv").string());
  write_crossval(to_crossval(log), (fs::path(dir) / "crossval.json").string());
  write_text_file((fs::path(dir) / "stopping.json").string(),
                  json{{"criteria", decisions_to_json(log.decisions)}}.dump(2));

  json snapshots = json::object();
  for (const auto& [iteration, net] : log.snapshots) {
    char name[64];
    std::snprintf(name, sizeof(name), "iter_%06d_%s.json", iteration,
                  hash.substr(0, 12).c_str());
    const std::string rel = std::string("snapshots/") + name;
    save_policy(net, (fs::path(dir) / rel).string(),
                json{{"iteration", iteration}, {"config_hash", hash}});
    snapshots[std::to_string(iteration)] = rel;
  }

  json run;
  run["format"] = kRunFormat;
  run["config"] = run_config_to_json(log.config);
  run["config_hash"] = hash;
  run["completed"] = log.completed;
  run["failure"] = log.failure;
  run["demo_episodes"] = log.demo_episodes;
  run["decisions"] = decisions_to_json(log.decisions);
  run["snapshots"] = snapshots;
  run["train_shards"] = log.train_shards;
  run["holdout_shards"] = log.holdout_shards;
  write_text_file((fs::path(dir) / "run.json").string(), run.dump(2));
}

StoredRun load_run_dir(const std::string& dir) {
  const std::string run_path = (fs::path(dir) / "run.json").string();
  std::ifstream in(run_path);
  if (!in) throw ConfigError("not a run directory (missing run.json): " + dir);
  json run;
  try {
    in >> run;
  } catch (const json::exception& e) {
    throw ConfigError("run.json is not valid JSON: " + std::string(e.what()));
  }

  StoredRun stored;
  stored.dir = dir;
  stored.log.config = run_config_from_json(run.at("config"));
  stored.log.completed = run.at("completed").get<bool>();
  stored.log.failure = run.at("failure").get<std::string>();
  stored.log.demo_episodes = run.at("demo_episodes").get<int>();
  if (run.contains("train_shards"))
    stored.log.train_shards =
        run.at("train_shards").get<std::vector<std::string>>();
  if (run.contains("holdout_shards"))
    stored.log.holdout_shards =
        run.at("holdout_shards").get<std::vector<std::string>>();

  for (const json& d : run.at("decisions")) {
    StopDecision decision;
    decision.fired = d.at("fired").get<bool>();
    decision.iteration = decision.fired ? d.at("fired_iteration").get<int>() : 0;
    decision.reason = stop_reason_from_name(d.at("reason").get<std::string>());
    decision.diagnostic = d.at("diagnostic").get<double>();
    stored.log.decisions[d.at("criterion").get<std::string>()] = decision;
  }
  for (const auto& [iter_str, rel] : run.at("snapshots").items()) {
    stored.snapshot_paths[std::stoi(iter_str)] =
        (fs::path(dir) / rel.get<std::string>()).string();
  }

  stored.log.reward_series.kind = MetricKind::sim_reward;
  stored.log.uncertainty_series.kind = MetricKind::epistemic_uncertainty;
  std::ifstream rl((fs::path(dir) / "runlog.jsonl").string());
  if (!rl) throw ConfigError("run directory missing runlog.jsonl: " + dir);
  std::string line;
  while (std::getline(rl, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    IterationRecord r;
    r.iteration = j.at("iteration").get<int>();
    r.dataset_size = j.at("dataset_size").get<int>();
    r.bc_loss = j.at("bc_loss").get<double>();
    r.sim_reward = j.at("sim_reward").get<double>();
    r.epistemic_uncertainty = j.at("epistemic_uncertainty").get<double>();
    r.eval_seed = j.at("eval_seed").get<std::uint64_t>();
    stored.log.records.push_back(r);
    stored.log.reward_series.append(r.iteration, r.sim_reward);
    stored.log.uncertainty_series.append(r.iteration, r.epistemic_uncertainty);
  }
  return stored;
}

PolicyNet StoredRun::load_snapshot(int iteration) const {
  const auto it = snapshot_paths.find(iteration);
  if (it == snapshot_paths.end())
    throw ConfigError("no snapshot stored for iteration " +
                      std::to_string(iteration));
  return load_policy(it->second);
}

void prepare_out_dir(const std::string& dir, bool fresh) {
  const fs::path p(dir);
  const fs::path marker = p / kRunMarker;
  if (fs::exists(p)) {
    if (!fs::is_directory(p))
      throw ConfigError("output path exists and is not a directory: " + dir);
    const bool empty = fs::directory_iterator(p) == fs::directory_iterator();
    if (!empty) {
      if (!fresh)
        throw ConfigError("output directory is not empty (pass --fresh to "
                          "rebuild): " + dir);
      if (!fs::exists(marker))
        throw ConfigError("refusing --fresh on a directory this tool did not "
                          "create (missing " + std::string(kRunMarker) +
                          " marker): " + dir);
      fs::remove_all(p);
    }
  }
  fs::create_directories(p);
  write_text_file(marker.string(), "switchsim output directory\n");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace switchsim::io

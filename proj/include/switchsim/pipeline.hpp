#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "switchsim/cloth.hpp"
#include "switchsim/metrics.hpp"
#include "switchsim/stopping.hpp"
#include "switchsim/train.hpp"

namespace switchsim {

// The four switching criteria for a run. Any subset may be configured;
// `designated` names the one that halts the loop in stop_at_first_fire mode.
struct StoppingSetup {
  std::optional<CriterionConfig> reward_value;
  std::optional<CriterionConfig> reward_gradient;
  std::optional<CriterionConfig> uncertainty_value;
  std::optional<CriterionConfig> uncertainty_gradient;
  std::string designated = "uncertainty_value";

  std::vector<std::pair<std::string, CriterionConfig>> configured() const;
};

struct RunConfig {
  int iterations = 60;        // N
  int demos_per_iteration = 10;  // K
  int eval_rollouts = 5;      // L
  int ensemble_size = 5;      // E
  EnvConfig env;
  ShiftSpec shift;
  OptimizerConfig optimizer;
  std::vector<int> hidden_layers = {128, 128};
  double spline_lambda = 150.0;
  std::optional<StoppingSetup> stopping;
  std::uint64_t master_seed = 1;
  int ensemble_refresh = 5;   // retrain the ensemble from scratch this often
  int ensemble_epochs = 2;    // update epochs per member at each refresh
  int holdout_episodes = 20;  // uncertainty holdout size (episodes)
  int eval_episodes = 4;      // deployment episodes per snapshot

  std::vector<int> layer_sizes() const;
  void validate() const;
};

enum class RunMode { full_horizon, stop_at_first_fire };

struct IterationRecord {
  int iteration = 0;
  int dataset_size = 0;
  double bc_loss = 0.0;
  double sim_reward = 0.0;
  double epistemic_uncertainty = 0.0;
  std::uint64_t eval_seed = 0;
};

struct RunLog {
  RunConfig config;
  std::vector<IterationRecord> records;
  MetricSeries reward_series;
  MetricSeries uncertainty_series;
  // criterion name -> first firing (fired=false while it has not fired)
  std::map<std::string, StopDecision> decisions;
  std::map<int, PolicyNet> snapshots;  // iteration -> parameters
  std::vector<std::string> train_shards;
  std::vector<std::string> holdout_shards;
  int demo_episodes = 0;
  bool completed = false;
  std::string failure;  // divergence marker when not completed
};

RunLog run_training(const RunConfig& cfg, RunMode mode);

struct DeploymentEpisode {
  double initial_coverage = 0.0;
  double final_coverage = 0.0;
  std::vector<double> coverage_curve;  // after each action
  int actions_used = 0;
};

struct DeploymentReport {
  int snapshot_iteration = 0;
  std::vector<DeploymentEpisode> episodes;
  double mean_initial = 0.0;
  double mean_final = 0.0;
  double stderr_final = 0.0;
  double improvement_ratio = 0.0;  // mean final / mean initial
  double mean_actions = 0.0;
};

// Seeded rollouts of a snapshot on the (shifted) target environment with
// pick-mask projection; aggregates match the deployment table metrics.
DeploymentReport evaluate_deployment(const PolicyNet& net,
                                     const EnvConfig& target_env, int episodes,
                                     std::uint64_t seed_base,
                                     int snapshot_iteration);

struct CriterionOutcome {
  std::string name;
  bool fired = false;
  int iteration = 0;
  StopReason reason = StopReason::not_fired;
  double diagnostic = 0.0;
  double budget_fraction = 0.0;      // fired iteration / N
  double target_coverage = 0.0;      // deployment mean at the fired snapshot
  double gap_to_final = 0.0;         // final-snapshot coverage minus above
};

struct ReportBundle {
  std::vector<CriterionOutcome> criteria;
  int final_iteration = 0;
  DeploymentReport final_report;
  double rank_correlation = 0.0;  // sim reward vs target coverage, Spearman
  std::vector<int> evaluated_iterations;
};

// Requires a deployment report for every fired iteration and for the final
// recorded iteration; throws ConfigError naming any missing checkpoint.
ReportBundle correlation_report(const RunLog& log,
                                const std::map<int, DeploymentReport>& reports);

// Reference-run data reshaped for criterion tuning.
CrossValRecord to_crossval(const RunLog& log);

double spearman_rank_correlation(const std::vector<double>& a,
                                 const std::vector<double>& b);

}  // namespace switchsim

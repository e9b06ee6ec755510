#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "switchsim/cloth.hpp"
#include "switchsim/mlp.hpp"
#include "switchsim/spline.hpp"
#include "switchsim/train.hpp"

namespace switchsim {

enum class MetricKind { sim_reward, epistemic_uncertainty };

const char* metric_kind_name(MetricKind k);
MetricKind metric_kind_from_name(const std::string& name);

struct MetricPoint {
  int iteration;
  double value;
};

struct MetricSeries {
  MetricKind kind = MetricKind::sim_reward;
  std::vector<MetricPoint> points;

  void append(int iteration, double value);  // iterations strictly increasing
};

// Holdout demonstration pairs for the uncertainty metric; disjoint from the
// training dataset by shard bookkeeping.
struct HoldoutSet {
  std::vector<TrainPair> pairs;
  std::vector<std::string> origin;  // shard ids
};

// Reference-run data used to tune the stopping criteria: per-iteration mean
// rewards and uncertainties plus the rollout seeds that produced them.
struct CrossValRecord {
  std::vector<int> iterations;
  std::vector<double> reward;
  std::vector<double> uncertainty;
  std::vector<std::uint64_t> rollout_seeds;
};

// Policy callback for rollouts. Learned policies ignore the state argument;
// the privileged oracle ignores the observation.
using PolicyFn = std::function<Action(const ClothState&, const Observation&)>;

struct EpisodeResult {
  double initial_coverage = 0.0;
  double final_coverage = 0.0;
  std::vector<double> coverage_curve;  // after each action
  int actions_used = 0;
  DoneReason done_reason = DoneReason::none;
};

EpisodeResult rollout_episode(const PolicyFn& policy, const EnvConfig& config,
                              std::uint64_t seed);

PolicyFn policy_fn(const PolicyNet& net);
PolicyFn oracle_fn(const EnvConfig& config);

// Final coverages of L seeded episodes in `config`.
std::vector<double> sim_reward_rollouts(const PolicyFn& policy,
                                        const EnvConfig& config, int rollouts,
                                        std::uint64_t seed);
// Mean final coverage over L rollouts.
double sim_reward(const PolicyNet& net, const EnvConfig& config, int rollouts,
                  std::uint64_t seed);

// Mean over holdout observations of the per-component population variance of
// the ensemble's predictions, averaged over the 4 action components.
double epistemic_uncertainty(const Ensemble& ensemble,
                             const HoldoutSet& holdout);

// `episodes` noise-free oracle demonstrations from a dedicated seed stream.
HoldoutSet make_holdout(const EnvConfig& config, int episodes,
                        std::uint64_t seed);

// Spline fit over the points with iteration < upto (the "previous i-1"
// points). Throws if fewer than 4 such points exist.
SplineFit fit_series_spline(const MetricSeries& series, int upto,
                            double lambda);

double mean(const std::vector<double>& v);
// Sample standard error of the mean (0 for fewer than 2 values).
double standard_error(const std::vector<double>& v);

}  // namespace switchsim

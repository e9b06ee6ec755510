#include "switchsim/metrics.hpp"

#include <cmath>

#include "switchsim/errors.hpp"
#include "switchsim/oracle.hpp"
#include "switchsim/rng.hpp"

namespace switchsim {

const char* metric_kind_name(MetricKind k) {
  return k == MetricKind::sim_reward ? "sim_reward" : "epistemic_uncertainty";
}

MetricKind metric_kind_from_name(const std::string& name) {
  if (name == "sim_reward") return MetricKind::sim_reward;
  if (name == "epistemic_uncertainty") return MetricKind::epistemic_uncertainty;
  throw ConfigError("unknown metric kind '" + name + "'");
}

void MetricSeries::append(int iteration, double value) {
  if (!points.empty() && iteration <= points.back().iteration)
    throw ConfigError("metric iterations must be strictly increasing");
  if (!std::isfinite(value))
    throw ConfigError("metric values must be finite");
  points.push_back({iteration, value});
}

EpisodeResult rollout_episode(const PolicyFn& policy, const EnvConfig& config,
                              std::uint64_t seed) {
  EpisodeResult result;
  ClothState state = reset(config, derive_seed(seed, seed_tag("reset")));
  result.initial_coverage = coverage(state, config);
  for (int t = 0;; ++t) {
    const Observation obs =
        render(state, config,
               derive_seed(seed, seed_tag("render"), static_cast<std::uint64_t>(t)));
    const Action act = policy(state, obs);
    StepResult res = step(state, act, config);
    result.final_coverage = res.coverage;
    result.coverage_curve.push_back(res.coverage);
    result.actions_used = t + 1;
    state = std::move(res.next_state);
    if (res.done) {
      result.done_reason = res.done_reason;
      break;
    }
  }
  return result;
}

PolicyFn policy_fn(const PolicyNet& net) {
  return [&net](const ClothState&, const Observation& obs) {
    return predict(net, obs);
  };
}

PolicyFn oracle_fn(const EnvConfig& config) {
  return [config](const ClothState& state, const Observation&) {
    return demo_action(state, config);
  };
}

std::vector<double> sim_reward_rollouts(const PolicyFn& policy,
                                        const EnvConfig& config, int rollouts,
                                        std::uint64_t seed) {
  if (rollouts < 1) throw ConfigError("sim_reward requires L >= 1 rollouts");
  std::vector<double> finals;
  finals.reserve(static_cast<std::size_t>(rollouts));
  for (int l = 0; l < rollouts; ++l) {
    const EpisodeResult ep = rollout_episode(
        policy, config,
        derive_seed(seed, seed_tag("rollout"), static_cast<std::uint64_t>(l)));
    finals.push_back(ep.final_coverage);
  }
  return finals;
}

double sim_reward(const PolicyNet& net, const EnvConfig& config, int rollouts,
                  std::uint64_t seed) {
  return mean(sim_reward_rollouts(policy_fn(net), config, rollouts, seed));
}

double epistemic_uncertainty(const Ensemble& ensemble,
                             const HoldoutSet& holdout) {
  const int E = static_cast<int>(ensemble.members.size());
  if (E < 2) throw ConfigError("epistemic uncertainty needs >= 2 members");
  if (holdout.pairs.empty())
    throw ConfigError("epistemic uncertainty needs a nonempty holdout set");

  double total = 0.0;
  std::vector<std::array<double, 4>> actions(static_cast<std::size_t>(E));
  for (const auto& pair : holdout.pairs) {
    const Observation& obs = pair.first;
    for (int e = 0; e < E; ++e)
      actions[e] = forward4(ensemble.members[e], obs.pixels.data());
    double per_obs = 0.0;
    for (int j = 0; j < 4; ++j) {
      double mu = 0.0;
      for (int e = 0; e < E; ++e) mu += actions[e][j];
      mu /= E;
      double var = 0.0;
      for (int e = 0; e < E; ++e) {
        const double d = actions[e][j] - mu;
        var += d * d;
      }
      per_obs += var / E;  // population variance
    }
    total += per_obs / 4.0;
  }
  return total / static_cast<double>(holdout.pairs.size());
}

HoldoutSet make_holdout(const EnvConfig& config, int episodes,
                        std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("holdout needs >= 1 episodes");
  HoldoutSet holdout;
  const auto demos = generate_demos(
      config, episodes, derive_seed(seed, seed_tag("holdout")));
  for (std::size_t j = 0; j < demos.size(); ++j) {
    for (const auto& pair : demos[j].steps) holdout.pairs.push_back(pair);
    holdout.origin.push_back("holdout/" + std::to_string(seed) + "/" +
                             std::to_string(j));
  }
  return holdout;
}

SplineFit fit_series_spline(const MetricSeries& series, int upto,
                            double lambda) {
  std::vector<double> x, y;
  for (const MetricPoint& p : series.points) {
    if (p.iteration < upto) {
      x.push_back(static_cast<double>(p.iteration));
      y.push_back(p.value);
    }
  }
  if (x.size() < 4)
    throw ConfigError("spline fit needs at least 4 prior points");
  return fit_smoothing_spline(x, y, lambda);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw ConfigError("mean of empty vector");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  const double sample_var = ss / static_cast<double>(n - 1);
  return std::sqrt(sample_var / static_cast<double>(n));
}

}  // namespace switchsim

#include "switchsim/stopping.hpp"

#include <algorithm>
#include <cmath>

#include "switchsim/errors.hpp"

namespace switchsim {

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::not_fired: return "not_fired";
    case StopReason::value_threshold: return "value_threshold";
    case StopReason::consec_counter: return "consec_counter";
    case StopReason::total_counter: return "total_counter";
  }
  return "not_fired";
}

StopReason stop_reason_from_name(const std::string& name) {
  if (name == "not_fired") return StopReason::not_fired;
  if (name == "value_threshold") return StopReason::value_threshold;
  if (name == "consec_counter") return StopReason::consec_counter;
  if (name == "total_counter") return StopReason::total_counter;
  throw ConfigError("unknown stop reason '" + name + "'");
}

namespace {

// Both rules need a spline over the previous points, which requires at least
// 4 of them; warm-up is therefore the larger of min_history and 5.
bool in_warmup(int history, int min_history) {
  return history < std::max(min_history, 5);
}

}  // namespace

StopDecision value_stop_update(const ValueStopConfig& cfg,
                               const MetricSeries& series, double lambda) {
  if (series.points.empty())
    throw ConfigError("value_stop_update requires a nonempty series");
  const int current = series.points.back().iteration;
  StopDecision decision;
  decision.iteration = current;
  if (in_warmup(static_cast<int>(series.points.size()), cfg.min_history))
    return decision;

  const SplineFit fit = fit_series_spline(series, current, lambda);
  const double value = eval_spline(fit, static_cast<double>(current));
  decision.diagnostic = value;
  const bool hit = cfg.direction == StopDirection::at_least
                       ? value >= cfg.threshold_a
                       : value <= cfg.threshold_a;
  if (hit) {
    decision.fired = true;
    decision.reason = StopReason::value_threshold;
  }
  return decision;
}

std::pair<GradientStopState, StopDecision> gradient_stop_update(
    const GradientStopConfig& cfg, const GradientStopState& state,
    const MetricSeries& series, double lambda) {
  if (series.points.empty())
    throw ConfigError("gradient_stop_update requires a nonempty series");
  const int current = series.points.back().iteration;
  GradientStopState next = state;
  StopDecision decision;
  decision.iteration = current;
  if (in_warmup(static_cast<int>(series.points.size()), cfg.min_history))
    return {next, decision};

  const SplineFit fit = fit_series_spline(series, current, lambda);
  const double g =
      spline_gradient(fit, static_cast<double>(current), cfg.delta);
  decision.diagnostic = g;
  next.last_decision_iteration = current;

  if (std::abs(g) <= cfg.epsilon) {
    next.w_consec += 1;
    next.w_total += 1;
  } else {
    next.w_consec = 0;
  }

  if (next.w_consec > cfg.max_consecutive) {
    decision.fired = true;
    decision.reason = StopReason::consec_counter;
  } else if (next.w_total > cfg.max_total) {
    decision.fired = true;
    decision.reason = StopReason::total_counter;
  }
  return {next, decision};
}

std::string criterion_name(MetricKind metric, ConditionKind condition) {
  std::string name =
      metric == MetricKind::sim_reward ? "reward" : "uncertainty";
  name += condition == ConditionKind::value ? "_value" : "_gradient";
  return name;
}

CriterionConfig make_criterion(MetricKind metric, ConditionKind condition,
                               const CrossValRecord& record,
                               const TuningConstants& constants,
                               double lambda) {
  const std::vector<double>& values =
      metric == MetricKind::sim_reward ? record.reward : record.uncertainty;
  if (record.iterations.size() != values.size() || values.size() < 8)
    throw ConfigError("tuning record too short for criterion derivation");

  CriterionConfig cfg;
  cfg.metric = metric;
  cfg.condition = condition;
  cfg.value.min_history = constants.min_history;
  cfg.gradient.min_history = constants.min_history;
  cfg.gradient.delta = constants.delta;
  cfg.gradient.max_consecutive = constants.max_consecutive;
  cfg.gradient.max_total = constants.max_total;

  if (condition == ConditionKind::value) {
    if (metric == MetricKind::sim_reward) {
      const double peak = *std::max_element(values.begin(), values.end());
      cfg.value.threshold_a = peak * (1.0 - constants.reward_slack);
      cfg.value.direction = StopDirection::at_least;
    } else {
      const double floor = *std::min_element(values.begin(), values.end());
      cfg.value.threshold_a = floor * (1.0 + constants.uncertainty_margin);
      cfg.value.direction = StopDirection::at_most;
    }
    return cfg;
  }

  // Gradient condition: replay the reference series through the same spline
  // machinery and take a low quantile of the early |gradient| values, so few
  // early iterations would count as flat.
  MetricSeries series;
  series.kind = metric;
  std::vector<double> grads;
  for (std::size_t k = 0; k < values.size(); ++k) {
    series.append(record.iterations[k], values[k]);
    if (in_warmup(static_cast<int>(series.points.size()),
                  constants.min_history))
      continue;
    const SplineFit fit =
        fit_series_spline(series, record.iterations[k], lambda);
    grads.push_back(std::abs(spline_gradient(
        fit, static_cast<double>(record.iterations[k]), constants.delta)));
  }
  if (grads.empty())
    throw ConfigError("tuning record shorter than the warm-up window");

  const std::size_t early =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   constants.early_fraction * grads.size()));
  std::vector<double> pool(grads.begin(), grads.begin() + early);
  std::sort(pool.begin(), pool.end());
  std::size_t pick = static_cast<std::size_t>(constants.early_quantile *
                                              static_cast<double>(pool.size()));
  pick = std::min(pick, pool.size() - 1);
  cfg.gradient.epsilon = pool[pick];
  return cfg;
}

void CriterionTracker::update(const MetricSeries& series, double lambda) {
  StopDecision decision;
  if (config.condition == ConditionKind::value) {
    decision = value_stop_update(config.value, series, lambda);
  } else {
    auto [next, d] = gradient_stop_update(config.gradient, state, series, lambda);
    state = next;
    decision = d;
  }
  last_decision = decision;
  if (decision.fired && !first_fire.fired) first_fire = decision;
}

}  // namespace switchsim

#pragma once

#include <string>
#include <utility>

#include "switchsim/metrics.hpp"

namespace switchsim {

enum class StopDirection { at_least, at_most };
enum class ConditionKind { value, gradient };
enum class StopReason { not_fired, value_threshold, consec_counter, total_counter };

const char* stop_reason_name(StopReason r);
StopReason stop_reason_from_name(const std::string& name);

struct ValueStopConfig {
  double threshold_a = 0.0;
  StopDirection direction = StopDirection::at_least;
  int min_history = 10;  // iterations of warm-up before any decision
};

struct GradientStopConfig {
  double epsilon = 0.0;     // gradient band half-width
  int max_consecutive = 3;  // U: fire when w_consec > U
  int max_total = 8;        // V: fire when w_total > V
  int min_history = 10;
  double delta = 1.0;       // backward difference gap
};

struct GradientStopState {
  int w_consec = 0;
  int w_total = 0;
  int last_decision_iteration = 0;
};

struct StopDecision {
  bool fired = false;
  int iteration = 0;
  StopReason reason = StopReason::not_fired;
  double diagnostic = 0.0;  // spline value or gradient at decision time
};

// Value-based rule: fit a spline to the points before the current iteration,
// evaluate it at the current iteration, and compare against the absolute
// threshold. Warm-up (history < min_history) never fires.
StopDecision value_stop_update(const ValueStopConfig& cfg,
                               const MetricSeries& series, double lambda);

// Gradient-based rule: backward difference of the spline at the current
// iteration; |g| <= epsilon increments both counters, otherwise w_consec
// resets. Fires when w_consec > U (consec_counter) or w_total > V
// (total_counter), strict inequalities.
std::pair<GradientStopState, StopDecision> gradient_stop_update(
    const GradientStopConfig& cfg, const GradientStopState& state,
    const MetricSeries& series, double lambda);

// Constants used to derive thresholds from a reference run. These stand in
// for the tuned values of the original study and live in the config file.
struct TuningConstants {
  double reward_slack = 0.02;       // A = (1 - slack) * max reference reward
  double uncertainty_margin = 0.10; // A = (1 + margin) * min reference value
  double early_fraction = 0.25;     // "early" = first quarter of gradient pts
  double early_quantile = 0.05;     // epsilon = that quantile of early |g|
  int max_consecutive = 3;          // U
  int max_total = 8;                // V
  int min_history = 10;
  double delta = 1.0;
};

struct CriterionConfig {
  MetricKind metric = MetricKind::sim_reward;
  ConditionKind condition = ConditionKind::value;
  ValueStopConfig value;
  GradientStopConfig gradient;
};

std::string criterion_name(MetricKind metric, ConditionKind condition);

// Derive one of the four switching criteria from reference-run data:
//  - reward/value:       A just below the maximum reference reward
//  - uncertainty/value:  A within a margin of the minimum reference value
//  - gradient (either):  epsilon below almost all early reference gradients
CriterionConfig make_criterion(MetricKind metric, ConditionKind condition,
                               const CrossValRecord& record,
                               const TuningConstants& constants,
                               double lambda);

// Latching tracker: feeds a growing series through the configured rule and
// keeps the first firing decision.
struct CriterionTracker {
  CriterionConfig config;
  GradientStopState state;
  StopDecision first_fire;
  StopDecision last_decision;

  void update(const MetricSeries& series, double lambda);
  bool fired() const { return first_fire.fired; }
};

}  // namespace switchsim

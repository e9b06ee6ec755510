#include "switchsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "switchsim/errors.hpp"
#include "switchsim/oracle.hpp"
#include "switchsim/rng.hpp"

namespace switchsim {

std::vector<std::pair<std::string, CriterionConfig>> StoppingSetup::configured()
    const {
  std::vector<std::pair<std::string, CriterionConfig>> out;
  if (reward_value) out.emplace_back("reward_value", *reward_value);
  if (reward_gradient) out.emplace_back("reward_gradient", *reward_gradient);
  if (uncertainty_value)
    out.emplace_back("uncertainty_value", *uncertainty_value);
  if (uncertainty_gradient)
    out.emplace_back("uncertainty_gradient", *uncertainty_gradient);
  return out;
}

std::vector<int> RunConfig::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(env.obs_size * env.obs_size);
  for (int h : hidden_layers) sizes.push_back(h);
  sizes.push_back(4);
  return sizes;
}

void RunConfig::validate() const {
  env.validate();
  optimizer.validate();
  if (iterations < 1) throw ConfigError("N must be >= 1");
  if (demos_per_iteration < 1) throw ConfigError("K must be >= 1");
  if (eval_rollouts < 1) throw ConfigError("L must be >= 1");
  if (ensemble_size < 2) throw ConfigError("E must be >= 2");
  if (ensemble_refresh < 1) throw ConfigError("ensemble_refresh must be >= 1");
  if (ensemble_epochs < 1) throw ConfigError("ensemble_epochs must be >= 1");
  if (holdout_episodes < 1) throw ConfigError("holdout_episodes must be >= 1");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (!(spline_lambda >= 0.0)) throw ConfigError("spline_lambda must be >= 0");
  for (int h : hidden_layers)
    if (h < 1) throw ConfigError("hidden layer sizes must be positive");
  if (stopping) {
    const auto configured = stopping->configured();
    bool found = configured.empty();
    for (const auto& [name, cfg] : configured) {
      (void)cfg;
      if (name == stopping->designated) found = true;
    }
    if (!found)
      throw ConfigError("designated criterion '" + stopping->designated +
                        "' is not configured");
  }
}

RunLog run_training(const RunConfig& cfg, RunMode mode) {
  cfg.validate();
  RunLog log;
  log.config = cfg;
  log.reward_series.kind = MetricKind::sim_reward;
  log.uncertainty_series.kind = MetricKind::epistemic_uncertainty;

  const std::uint64_t master = cfg.master_seed;
  const auto layers = cfg.layer_sizes();

  Trainer trainer =
      Trainer::make(layers, derive_seed(master, seed_tag("policy")));

  const std::uint64_t holdout_seed =
      derive_seed(master, seed_tag("holdout-root"));
  HoldoutSet holdout =
      make_holdout(cfg.env, cfg.holdout_episodes, holdout_seed);
  log.holdout_shards = holdout.origin;

  std::vector<std::pair<std::string, CriterionTracker>> trackers;
  if (cfg.stopping) {
    for (const auto& [name, crit] : cfg.stopping->configured()) {
      CriterionTracker tracker;
      tracker.config = crit;
      trackers.emplace_back(name, tracker);
      log.decisions[name] = StopDecision{};
    }
  }

  Dataset data;
  Ensemble ensemble;
  int refresh_count = 0;
  const int checkpoint_every = std::max(1, cfg.iterations / 10);

  try {
    for (int i = 1; i <= cfg.iterations; ++i) {
      // 1) collect a batch of demonstrations and aggregate
      const auto demos = generate_demos(
          cfg.env, cfg.demos_per_iteration,
          derive_seed(master, seed_tag("train-demo"),
                      static_cast<std::uint64_t>(i)));
      for (std::size_t j = 0; j < demos.size(); ++j) {
        const std::string shard =
            "train/" + std::to_string(i) + "/" + std::to_string(j);
        data.append(demos[j], i, shard);
        log.train_shards.push_back(shard);
      }
      log.demo_episodes += static_cast<int>(demos.size());

      // 2) one model update epoch on the aggregated dataset
      update_epoch(trainer, data, cfg.optimizer,
                   derive_seed(master, seed_tag("epoch"),
                               static_cast<std::uint64_t>(i)));

      // 3) refresh the bootstrapped ensemble on schedule
      if ((i - 1) % cfg.ensemble_refresh == 0) {
        std::vector<std::uint64_t> member_seeds;
        for (int e = 0; e < cfg.ensemble_size; ++e) {
          member_seeds.push_back(
              derive_seed(master, seed_tag("member"),
                          static_cast<std::uint64_t>(refresh_count),
                          static_cast<std::uint64_t>(e)));
        }
        ensemble = train_ensemble(data, cfg.optimizer, cfg.ensemble_size,
                                  member_seeds, cfg.ensemble_epochs, layers);
        refresh_count += 1;
      }

      // 4) both switching metrics
      const std::uint64_t eval_seed =
          derive_seed(master, seed_tag("eval"), static_cast<std::uint64_t>(i));
      const double reward = mean(sim_reward_rollouts(
          policy_fn(trainer.net), cfg.env, cfg.eval_rollouts, eval_seed));
      const double uncertainty = epistemic_uncertainty(ensemble, holdout);
      log.reward_series.append(i, reward);
      log.uncertainty_series.append(i, uncertainty);

      IterationRecord rec;
      rec.iteration = i;
      rec.dataset_size = static_cast<int>(data.size());
      rec.bc_loss = dataset_loss(
          trainer.net, data, 512,
          derive_seed(master, seed_tag("losslog"),
                      static_cast<std::uint64_t>(i)));
      rec.sim_reward = reward;
      rec.epistemic_uncertainty = uncertainty;
      rec.eval_seed = eval_seed;
      log.records.push_back(rec);

      // 5) update all configured criteria; latch first firings
      bool newly_fired_here = false;
      bool designated_fired = false;
      for (auto& [name, tracker] : trackers) {
        const MetricSeries& series =
            tracker.config.metric == MetricKind::sim_reward
                ? log.reward_series
                : log.uncertainty_series;
        const bool was_fired = tracker.fired();
        tracker.update(series, cfg.spline_lambda);
        log.decisions[name] = tracker.first_fire;
        if (tracker.fired() && !was_fired) newly_fired_here = true;
        if (tracker.fired() && cfg.stopping &&
            name == cfg.stopping->designated)
          designated_fired = true;
      }

      const bool checkpoint = (i % checkpoint_every == 0) ||
                              i == cfg.iterations || newly_fired_here;
      if (checkpoint) log.snapshots.emplace(i, trainer.net);

      if (mode == RunMode::stop_at_first_fire && designated_fired) {
        log.snapshots.emplace(i, trainer.net);
        break;
      }
    }
    log.completed = true;
  } catch (const DivergenceError& e) {
    log.completed = false;
    log.failure = e.what();
  }
  return log;
}

DeploymentReport evaluate_deployment(const PolicyNet& net,
                                     const EnvConfig& target_env, int episodes,
                                     std::uint64_t seed_base,
                                     int snapshot_iteration) {
  if (episodes < 1) throw ConfigError("deployment needs >= 1 episodes");
  DeploymentReport report;
  report.snapshot_iteration = snapshot_iteration;
  std::vector<double> finals, initials, actions;
  const PolicyFn fn = policy_fn(net);
  for (int e = 0; e < episodes; ++e) {
    const EpisodeResult ep = rollout_episode(
        fn, target_env,
        derive_seed(seed_base, seed_tag("deploy"),
                    static_cast<std::uint64_t>(e)));
    report.episodes.push_back({ep.initial_coverage, ep.final_coverage,
                               ep.coverage_curve, ep.actions_used});
    finals.push_back(ep.final_coverage);
    initials.push_back(ep.initial_coverage);
    actions.push_back(static_cast<double>(ep.actions_used));
  }
  report.mean_initial = mean(initials);
  report.mean_final = mean(finals);
  report.stderr_final = standard_error(finals);
  report.improvement_ratio = report.mean_final / report.mean_initial;
  report.mean_actions = mean(actions);
  return report;
}

ReportBundle correlation_report(
    const RunLog& log, const std::map<int, DeploymentReport>& reports) {
  if (log.records.empty()) throw ConfigError("run log has no records");
  ReportBundle bundle;
  bundle.final_iteration = log.records.back().iteration;

  std::string missing;
  auto require = [&](int iteration) {
    if (reports.find(iteration) == reports.end()) {
      if (!missing.empty()) missing += ", ";
      missing += std::to_string(iteration);
    }
  };
  require(bundle.final_iteration);
  for (const auto& [name, decision] : log.decisions) {
    (void)name;
    if (decision.fired) require(decision.iteration);
  }
  if (!missing.empty())
    throw ConfigError("missing deployment evaluations for checkpoints: " +
                      missing);

  bundle.final_report = reports.at(bundle.final_iteration);
  const double N = static_cast<double>(log.config.iterations);
  for (const auto& [name, decision] : log.decisions) {
    CriterionOutcome outcome;
    outcome.name = name;
    outcome.fired = decision.fired;
    outcome.iteration = decision.iteration;
    outcome.reason = decision.reason;
    outcome.diagnostic = decision.diagnostic;
    if (decision.fired) {
      outcome.budget_fraction = static_cast<double>(decision.iteration) / N;
      outcome.target_coverage = reports.at(decision.iteration).mean_final;
      outcome.gap_to_final =
          bundle.final_report.mean_final - outcome.target_coverage;
    }
    bundle.criteria.push_back(outcome);
  }

  // Rank correlation between source-sim reward and target coverage across
  // every evaluated checkpoint.
  std::vector<double> sim_values, target_values;
  for (const auto& [iteration, report] : reports) {
    const auto it = std::find_if(
        log.records.begin(), log.records.end(),
        [iteration = iteration](const IterationRecord& r) {
          return r.iteration == iteration;
        });
    if (it == log.records.end()) continue;
    bundle.evaluated_iterations.push_back(iteration);
    sim_values.push_back(it->sim_reward);
    target_values.push_back(report.mean_final);
  }
  bundle.rank_correlation =
      spearman_rank_correlation(sim_values, target_values);
  return bundle;
}

CrossValRecord to_crossval(const RunLog& log) {
  CrossValRecord record;
  for (const IterationRecord& r : log.records) {
    record.iterations.push_back(r.iteration);
    record.reward.push_back(r.sim_reward);
    record.uncertainty.push_back(r.epistemic_uncertainty);
    record.rollout_seeds.push_back(r.eval_seed);
  }
  return record;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rank_correlation(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.size() != b.size()) throw ConfigError("rank correlation size mismatch");
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double ma = mean(ra);
  const double mb = mean(rb);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace switchsim

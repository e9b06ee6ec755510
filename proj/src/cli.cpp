#include "switchsim/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "switchsim/errors.hpp"
#include "switchsim/io.hpp"
#include "switchsim/kernels.hpp"
#include "switchsim/oracle.hpp"
#include "switchsim/pipeline.hpp"
#include "switchsim/rng.hpp"

namespace switchsim::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

void emit_error(int code, const std::string& message) {
  json err{{"error", json{{"code", code}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
}

// Relative output paths resolve against SWITCHSIM_OUT_ROOT when set.
std::string resolve_out(const std::string& dir) {
  const char* root = std::getenv("SWITCHSIM_OUT_ROOT");
  if (root != nullptr && root[0] != '\0' && !fs::path(dir).is_absolute()) {
    return (fs::path(root) / dir).string();
  }
  return dir;
}

struct TrainArgs {
  std::string config_path;
  std::string out_dir;
  std::string mode = "full";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool fresh = false;
};

int cmd_train(const TrainArgs& args) {
  RunConfig cfg = io::load_run_config(args.config_path);
  if (args.seed_set) cfg.master_seed = args.seed;
  RunMode mode;
  if (args.mode == "full")
    mode = RunMode::full_horizon;
  else if (args.mode == "stop")
    mode = RunMode::stop_at_first_fire;
  else
    throw ConfigError("mode must be 'full' or 'stop'");

  const std::string out = resolve_out(args.out_dir);
  io::prepare_out_dir(out, args.fresh);

  std::printf("train: N=%d K=%d L=%d E=%d seed=%llu kernels=%s\n",
              cfg.iterations, cfg.demos_per_iteration, cfg.eval_rollouts,
              cfg.ensemble_size,
              static_cast<unsigned long long>(cfg.master_seed),
              kernels::backend_name(kernels::active_backend()));

  const RunLog log = run_training(cfg, mode);
  io::write_run_dir(log, out);

  if (!log.completed) {
    io::write_text_file(
        (fs::path(out) / "error.json").string(),
        json{{"error", json{{"code", kExitDivergence},
                            {"message", log.failure}}}}.dump());
    emit_error(kExitDivergence, log.failure);
    return kExitDivergence;
  }

  for (const auto& [name, decision] : log.decisions) {
    if (decision.fired)
      std::printf("criterion %-22s fired at iteration %d (%s)\n", name.c_str(),
                  decision.iteration, stop_reason_name(decision.reason));
    else
      std::printf("criterion %-22s did not fire\n", name.c_str());
  }
  std::printf("run complete: %zu iterations, %d demo episodes, outputs in %s\n",
              log.records.size(), log.demo_episodes, out.c_str());
  return kExitOk;
}

int cmd_demo_gen(const std::string& config_path, int count,
                 std::uint64_t seed, const std::string& out_dir, bool fresh) {
  const RunConfig cfg = io::load_run_config(config_path);
  const std::string out = resolve_out(out_dir);
  io::prepare_out_dir(out, fresh);

  const auto demos = generate_demos(cfg.env, count, seed);

  std::ostringstream shard;
  std::ostringstream replay;
  int total_steps = 0;
  std::vector<std::uint64_t> seeds;
  for (std::size_t j = 0; j < demos.size(); ++j) {
    const Trajectory& traj = demos[j];
    seeds.push_back(traj.seed);
    json steps = json::array();
    for (const auto& [obs, act] : traj.steps) {
      steps.push_back(json{
          {"obs", obs.pixels},
          {"action", {act.pick_x, act.pick_y, act.delta_x, act.delta_y}}});
    }
    shard << json{{"seed", traj.seed},
                  {"steps", steps},
                  {"initial_coverage", traj.initial_coverage},
                  {"final_coverage", traj.final_coverage},
                  {"coverages", traj.coverages}}
                 .dump()
          << "\n";
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const Action& act = traj.steps[t].second;
      const bool last = t + 1 == traj.steps.size();
      replay << json{{"episode", j},
                     {"step", t},
                     {"action",
                      {act.pick_x, act.pick_y, act.delta_x, act.delta_y}},
                     {"coverage", traj.coverages[t]},
                     {"done_reason",
                      last ? done_reason_name(traj.final_reason) : "none"}}
                    .dump()
             << "\n";
    }
    total_steps += static_cast<int>(traj.steps.size());
  }
  io::write_text_file((fs::path(out) / "demos.jsonl").string(), shard.str());
  io::write_text_file((fs::path(out) / "trajectories.jsonl").string(),
                      replay.str());
  json manifest{{"format", 1},
                {"config_hash", io::config_hash(cfg)},
                {"count", count},
                {"total_steps", total_steps},
                {"seeds", seeds}};
  io::write_text_file((fs::path(out) / "manifest.json").string(),
                      manifest.dump(2));
  std::printf("demo-gen: %d episodes, %d steps -> %s\n", count, total_steps,
              out.c_str());
  return kExitOk;
}

int cmd_stop_scan(const std::string& metrics_path,
                  const std::string& config_path, const std::string& out_dir,
                  bool fresh) {
  const RunConfig cfg = io::load_run_config(config_path);
  if (!cfg.stopping)
    throw ConfigError("stop-scan requires a stopping section in the config");
  const io::MetricsCsv csv = io::read_metrics_csv(metrics_path);

  json criteria = json::array();
  for (const auto& [name, crit] : cfg.stopping->configured()) {
    const MetricSeries& full = crit.metric == MetricKind::sim_reward
                                   ? csv.reward
                                   : csv.uncertainty;
    CriterionTracker tracker;
    tracker.config = crit;
    MetricSeries prefix;
    prefix.kind = full.kind;
    for (const MetricPoint& p : full.points) {
      prefix.append(p.iteration, p.value);
      tracker.update(prefix, cfg.spline_lambda);
      if (tracker.fired()) break;
    }
    criteria.push_back(
        json{{"criterion", name},
             {"fired", tracker.fired()},
             {"fired_iteration",
              tracker.fired() ? tracker.first_fire.iteration : -1},
             {"reason", stop_reason_name(tracker.first_fire.reason)},
             {"diagnostic", tracker.first_fire.diagnostic}});
  }

  const json report{{"criteria", criteria}};
  const std::string out = resolve_out(out_dir);
  io::prepare_out_dir(out, fresh);
  io::write_text_file((fs::path(out) / "stop_scan.json").string(),
                      report.dump(2));
  std::cout << report.dump(2) << "\n";
  return kExitOk;
}

int cmd_deploy_eval(const std::string& run_dir, const std::string& checkpoints,
                    int episodes, const std::string& env_kind,
                    std::uint64_t seed, bool seed_set, bool fresh) {
  const io::StoredRun run = io::load_run_dir(run_dir);
  const RunConfig& cfg = run.log.config;

  EnvConfig env;
  if (env_kind == "target")
    env = make_target_env(cfg.env, cfg.shift);
  else if (env_kind == "source")
    env = cfg.env;
  else
    throw ConfigError("--env must be 'target' or 'source'");

  const int n_episodes = episodes > 0 ? episodes : cfg.eval_episodes;
  // one shared seed base so every snapshot sees the same starting states
  const std::uint64_t seed_base =
      seed_set ? seed : derive_seed(cfg.master_seed, seed_tag("deploy-eval"));

  std::vector<int> iterations;
  if (checkpoints == "all") {
    for (const auto& [iteration, path] : run.snapshot_paths) {
      (void)path;
      iterations.push_back(iteration);
    }
  } else if (checkpoints == "fired") {
    for (const auto& [name, d] : run.log.decisions) {
      (void)name;
      if (d.fired) iterations.push_back(d.iteration);
    }
    if (!run.log.records.empty())
      iterations.push_back(run.log.records.back().iteration);
  } else {
    std::stringstream ss(checkpoints);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) iterations.push_back(std::stoi(tok));
  }
  std::sort(iterations.begin(), iterations.end());
  iterations.erase(std::unique(iterations.begin(), iterations.end()),
                   iterations.end());

  const std::string evals_dir =
      (fs::path(run_dir) / (env_kind == "target" ? "evals" : "evals_source"))
          .string();
  io::prepare_out_dir(evals_dir, fresh);

  json manifest = json::array();
  for (int iteration : iterations) {
    const PolicyNet net = run.load_snapshot(iteration);
    const DeploymentReport report =
        evaluate_deployment(net, env, n_episodes, seed_base, iteration);
    char name[32];
    std::snprintf(name, sizeof(name), "iter_%06d.json", iteration);
    io::write_text_file((fs::path(evals_dir) / name).string(),
                        io::deployment_report_to_json(report).dump(2));
    manifest.push_back(json{{"iteration", iteration}, {"file", name}});
    std::printf("deploy-eval: iter %d -> mean final %.4f (%d episodes)\n",
                iteration, report.mean_final, n_episodes);
  }
  io::write_text_file(
      (fs::path(evals_dir) / "manifest.json").string(),
      json{{"env", env_kind}, {"episodes", n_episodes}, {"seed_base", seed_base},
           {"evaluations", manifest}}
          .dump(2));
  return kExitOk;
}

std::map<int, DeploymentReport> load_evals(const std::string& run_dir) {
  const fs::path evals = fs::path(run_dir) / "evals";
  std::map<int, DeploymentReport> reports;
  if (!fs::exists(evals)) return reports;
  for (const auto& entry : fs::directory_iterator(evals)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("iter_", 0) != 0) continue;
    const json j = json::parse(io::read_text_file(entry.path().string()));
    const DeploymentReport report = io::deployment_report_from_json(j);
    reports[report.snapshot_iteration] = report;
  }
  return reports;
}

int cmd_report(const std::string& run_dir, const std::string& out_dir,
               bool fresh) {
  const io::StoredRun run = io::load_run_dir(run_dir);
  if (run.log.records.empty())
    throw ConfigError("run directory has no iteration records");
  const auto reports = load_evals(run_dir);
  const ReportBundle bundle = correlation_report(run.log, reports);

  const std::string out = out_dir.empty()
                              ? (fs::path(run_dir) / "report").string()
                              : resolve_out(out_dir);
  io::prepare_out_dir(out, fresh);

  // table1.csv: one row per fired criterion plus the final-iteration row
  {
    std::ostringstream t;
    t << "method,iteration,improvement_ratio,final_coverage,stderr_final,"
         "mean_actions\n";
    int fired_rows = 0;
    for (const CriterionOutcome& c : bundle.criteria) {
      if (!c.fired) continue;
      const DeploymentReport& r = reports.at(c.iteration);
      t << c.name << "," << c.iteration << ","
        << io::format_double(r.improvement_ratio) << ","
        << io::format_double(r.mean_final) << ","
        << io::format_double(r.stderr_final) << ","
        << io::format_double(r.mean_actions) << "\n";
      ++fired_rows;
    }
    const DeploymentReport& fin = bundle.final_report;
    t << "final," << bundle.final_iteration << ","
      << io::format_double(fin.improvement_ratio) << ","
      << io::format_double(fin.mean_final) << ","
      << io::format_double(fin.stderr_final) << ","
      << io::format_double(fin.mean_actions) << "\n";
    if (fired_rows == 0) t << "# notice: no criteria fired in this run\n";
    io::write_text_file((fs::path(out) / "table1.csv").string(), t.str());
  }

  // fig3_<metric>.csv: raw points, full-series spline, firing markers
  auto write_fig3 = [&](const MetricSeries& series, const std::string& name) {
    std::vector<double> x, y;
    for (const MetricPoint& p : series.points) {
      x.push_back(static_cast<double>(p.iteration));
      y.push_back(p.value);
    }
    SplineFit fit;
    const bool have_fit = x.size() >= 4;
    if (have_fit) fit = fit_smoothing_spline(x, y, run.log.config.spline_lambda);

    std::ostringstream f;
    f << "iteration,value,spline,fired\n";
    for (const MetricPoint& p : series.points) {
      int fired = 0;
      for (const CriterionOutcome& c : bundle.criteria) {
        const bool same_metric =
            (series.kind == MetricKind::sim_reward &&
             c.name.rfind("reward", 0) == 0) ||
            (series.kind == MetricKind::epistemic_uncertainty &&
             c.name.rfind("uncertainty", 0) == 0);
        if (c.fired && same_metric && c.iteration == p.iteration) fired = 1;
      }
      f << p.iteration << "," << io::format_double(p.value) << ","
        << (have_fit
                ? io::format_double(
                      eval_spline(fit, static_cast<double>(p.iteration)))
                : "")
        << "," << fired << "\n";
    }
    io::write_text_file((fs::path(out) / ("fig3_" + name + ".csv")).string(),
                        f.str());
  };
  write_fig3(run.log.reward_series, "sim_reward");
  write_fig3(run.log.uncertainty_series, "epistemic_uncertainty");

  // fig4.csv: coverage-vs-action curves per evaluated checkpoint; final
  // coverage repeated through the rest of the action budget
  {
    std::ostringstream f;
    f << "iteration,action,mean_coverage\n";
    const int budget = run.log.config.env.max_actions;
    for (const auto& [iteration, report] : reports) {
      std::vector<double> sums(static_cast<std::size_t>(budget) + 1, 0.0);
      for (const DeploymentEpisode& ep : report.episodes) {
        sums[0] += ep.initial_coverage;
        double last = ep.initial_coverage;
        for (int a = 1; a <= budget; ++a) {
          if (a <= static_cast<int>(ep.coverage_curve.size()))
            last = ep.coverage_curve[static_cast<std::size_t>(a) - 1];
          sums[static_cast<std::size_t>(a)] += last;
        }
      }
      for (int a = 0; a <= budget; ++a) {
        f << iteration << "," << a << ","
          << io::format_double(sums[static_cast<std::size_t>(a)] /
                               static_cast<double>(report.episodes.size()))
          << "\n";
      }
    }
    io::write_text_file((fs::path(out) / "fig4.csv").string(), f.str());
  }

  // report.json: the full bundle
  {
    json criteria = json::array();
    for (const CriterionOutcome& c : bundle.criteria) {
      criteria.push_back(json{{"criterion", c.name},
                              {"fired", c.fired},
                              {"fired_iteration", c.fired ? c.iteration : -1},
                              {"reason", stop_reason_name(c.reason)},
                              {"diagnostic", c.diagnostic},
                              {"budget_fraction", c.budget_fraction},
                              {"target_coverage", c.target_coverage},
                              {"gap_to_final", c.gap_to_final}});
    }
    json j{{"criteria", criteria},
           {"final_iteration", bundle.final_iteration},
           {"final_report",
            io::deployment_report_to_json(bundle.final_report)},
           {"rank_correlation", bundle.rank_correlation},
           {"evaluated_iterations", bundle.evaluated_iterations}};
    io::write_text_file((fs::path(out) / "report.json").string(), j.dump(2));
  }
  std::printf("report: wrote table1.csv, fig3_*.csv, fig4.csv, report.json to %s\n",
              out.c_str());
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"desk-scale sim2real switching testbed"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "run the training loop");
  train->add_option("--config", train_args.config_path, "config JSON path")
      ->required();
  train->add_option("--out", train_args.out_dir, "output directory")
      ->required();
  train->add_option("--mode", train_args.mode,
                    "full (record firings, run to N) or stop (halt at the "
                    "designated criterion)");
  CLI::Option* seed_opt =
      train->add_option("--seed", train_args.seed, "master seed override");
  train->add_flag("--fresh", train_args.fresh, "wipe the output directory");

  std::string dg_config, dg_out;
  int dg_count = 10;
  std::uint64_t dg_seed = 1;
  bool dg_fresh = false;
  CLI::App* demo_gen =
      app.add_subcommand("demo-gen", "generate oracle demonstrations");
  demo_gen->add_option("--config", dg_config)->required();
  demo_gen->add_option("--count", dg_count);
  demo_gen->add_option("--seed", dg_seed);
  demo_gen->add_option("--out", dg_out)->required();
  demo_gen->add_flag("--fresh", dg_fresh);

  std::string ss_metrics, ss_config, ss_out;
  bool ss_fresh = false;
  CLI::App* stop_scan = app.add_subcommand(
      "stop-scan", "replay the stopping rules over a metrics CSV");
  stop_scan->add_option("--metrics", ss_metrics)->required();
  stop_scan->add_option("--config", ss_config)->required();
  stop_scan->add_option("--out", ss_out)->required();
  stop_scan->add_flag("--fresh", ss_fresh);

  std::string de_run, de_checkpoints = "all", de_env = "target";
  int de_episodes = 0;
  std::uint64_t de_seed = 0;
  bool de_fresh = false;
  CLI::App* deploy = app.add_subcommand(
      "deploy-eval", "evaluate snapshots on the target environment");
  deploy->add_option("--run", de_run)->required();
  deploy->add_option("--checkpoints", de_checkpoints,
                     "all, fired, or comma-separated iterations");
  deploy->add_option("--episodes", de_episodes);
  deploy->add_option("--env", de_env, "target or source");
  CLI::Option* de_seed_opt = deploy->add_option("--seed", de_seed);
  deploy->add_flag("--fresh", de_fresh);

  std::string rp_run, rp_out;
  bool rp_fresh = false;
  CLI::App* report =
      app.add_subcommand("report", "aggregate a run into tables and plot CSVs");
  report->add_option("--run", rp_run)->required();
  report->add_option("--out", rp_out);
  report->add_flag("--fresh", rp_fresh);

  std::vector<char*> argv;
  std::vector<std::string> storage;
  storage.push_back("switchsim");
  for (const std::string& a : args) storage.push_back(a);
  for (std::string& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(kExitConfig, e.what());
    return kExitConfig;
  }

  try {
    if (train->parsed()) {
      train_args.seed_set = seed_opt->count() > 0;
      return cmd_train(train_args);
    }
    if (demo_gen->parsed())
      return cmd_demo_gen(dg_config, dg_count, dg_seed, dg_out, dg_fresh);
    if (stop_scan->parsed())
      return cmd_stop_scan(ss_metrics, ss_config, ss_out, ss_fresh);
    if (deploy->parsed())
      return cmd_deploy_eval(de_run, de_checkpoints, de_episodes, de_env,
                             de_seed, de_seed_opt->count() > 0, de_fresh);
    if (report->parsed()) return cmd_report(rp_run, rp_out, rp_fresh);
    emit_error(kExitConfig, "no subcommand given");
    return kExitConfig;
  } catch (const DivergenceError& e) {
    emit_error(kExitDivergence, e.what());
    return kExitDivergence;
  } catch (const ConfigError& e) {
    emit_error(kExitConfig, e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    emit_error(kExitConfig, e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    emit_error(kExitConfig, e.what());
    return kExitConfig;
  }
}

}  // namespace switchsim::cli

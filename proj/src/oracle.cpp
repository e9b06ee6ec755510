#include "switchsim/oracle.hpp"

#include <array>
#include <cmath>

#include "switchsim/errors.hpp"
#include "switchsim/rng.hpp"

namespace switchsim {

Action demo_action(const ClothState& state, const EnvConfig& config) {
  const int g = state.grid_size;
  const double half = config.cloth_side / 2.0;
  const std::array<int, 4> corner_idx = {0, g - 1, (g - 1) * g,
                                         (g - 1) * g + (g - 1)};
  const std::array<Vec3, 4> flat = {
      Vec3{-half, -half, 0.0}, Vec3{half, -half, 0.0},
      Vec3{-half, half, 0.0}, Vec3{half, half, 0.0}};

  int best = 0;
  double best_disp = -1.0;
  for (int k = 0; k < 4; ++k) {
    const Vec3 p = state.positions[corner_idx[k]];
    const double disp = std::hypot(p.x - flat[k].x, p.y - flat[k].y);
    if (disp > best_disp) {  // strict: earlier corner wins ties
      best_disp = disp;
      best = k;
    }
  }

  const Vec3 p = state.positions[corner_idx[best]];
  double pick_u, pick_v, place_u, place_v;
  world_to_image(config, p.x, p.y, pick_u, pick_v);
  world_to_image(config, flat[best].x, flat[best].y, place_u, place_v);
  return Action::clamped(pick_u, pick_v, place_u - pick_u, place_v - pick_v);
}

std::vector<Trajectory> generate_demos(const EnvConfig& config, int count,
                                       std::uint64_t seed) {
  if (count < 1) throw ConfigError("generate_demos requires count >= 1");
  EnvConfig demo_cfg = config;
  demo_cfg.obs_noise_std = 0.0;  // clean supervision

  std::vector<Trajectory> demos;
  demos.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const std::uint64_t ep_seed = derive_seed(seed, seed_tag("demo-episode"),
                                              static_cast<std::uint64_t>(j));
    Trajectory traj;
    traj.seed = ep_seed;
    ClothState state = reset(config, ep_seed);
    traj.initial_coverage = coverage(state, config);
    for (;;) {
      Observation obs = render(state, demo_cfg, 0);
      Action act = demo_action(state, config);
      StepResult res = step(state, act, config);
      traj.steps.emplace_back(std::move(obs), act);
      traj.coverages.push_back(res.coverage);
      traj.final_coverage = res.coverage;
      traj.final_reason = res.done_reason;
      state = std::move(res.next_state);
      if (res.done) break;
    }
    demos.push_back(std::move(traj));
  }
  return demos;
}

}  // namespace switchsim

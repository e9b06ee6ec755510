#include "switchsim/cloth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "switchsim/errors.hpp"
#include "switchsim/rng.hpp"

namespace switchsim {
namespace {

constexpr double kPointMass = 1.0;
constexpr double kGravity = 9.8;
constexpr double kAirDrag = 2.0;             // 1/s, damps residual z motion
constexpr double kPickRadiusPixels = 3.0;    // pick-to-mask projection radius
constexpr double kLiftFraction = 0.5;        // lift height in rest lengths
constexpr double kDragStepFraction = 0.05;    // drag advance per substep
constexpr double kContactHeight = 1e-4;      // meters; "on the table" band
constexpr int kRasterCellsPerSide = 360;     // default coverage resolution
constexpr int kSettleSubsteps = 20;          // pre-release settle after lift

struct Spring {
  int a;
  int b;
  double rest;
};

std::vector<Spring> build_springs(int g, double rest) {
  std::vector<Spring> springs;
  springs.reserve(static_cast<std::size_t>(4 * g * g));
  const double diag = rest * std::sqrt(2.0);
  auto idx = [g](int r, int c) { return r * g + c; };
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      if (c + 1 < g) springs.push_back({idx(r, c), idx(r, c + 1), rest});
      if (r + 1 < g) springs.push_back({idx(r, c), idx(r + 1, c), rest});
      if (r + 1 < g && c + 1 < g) {
        springs.push_back({idx(r, c), idx(r + 1, c + 1), diag});
        springs.push_back({idx(r + 1, c), idx(r, c + 1), diag});
      }
    }
  }
  return springs;
}

// Points on face-down (folded-over) quads ride on cloth rather than on the
// table, so they see much less table friction; this is what lets a pull
// open a fold instead of dragging the whole pile.
constexpr double kFoldFrictionScale = 0.5;

void mark_folded(const ClothState& s, std::vector<std::uint8_t>& folded) {
  const int g = s.grid_size;
  folded.assign(static_cast<std::size_t>(g) * g, 0);
  auto idx = [g](int r, int c) { return r * g + c; };
  for (int r = 0; r + 1 < g; ++r) {
    for (int c = 0; c + 1 < g; ++c) {
      const Vec3& p00 = s.positions[idx(r, c)];
      const Vec3& p01 = s.positions[idx(r, c + 1)];
      const Vec3& p10 = s.positions[idx(r + 1, c)];
      const Vec3& p11 = s.positions[idx(r + 1, c + 1)];
      // signed area of the quad via its diagonals
      const double sa = 0.5 * ((p11.x - p00.x) * (p01.y - p10.y) -
                               (p11.y - p00.y) * (p01.x - p10.x));
      if (sa < 0.0) {
        folded[idx(r, c)] = folded[idx(r, c + 1)] = 1;
        folded[idx(r + 1, c)] = folded[idx(r + 1, c + 1)] = 1;
      }
    }
  }
}

// One semi-implicit Euler substep. Points flagged in `pinned` keep the
// position and velocity prescribed by the caller; pass nullptr when all
// points are free.
void substep(ClothState& s, const EnvConfig& cfg,
             const std::vector<Spring>& springs,
             const std::vector<std::uint8_t>* pinned) {
  const int n = s.grid_size * s.grid_size;
  static thread_local std::vector<Vec3> forces;
  forces.assign(n, Vec3{});
  static thread_local std::vector<std::uint8_t> folded;
  mark_folded(s, folded);

  for (const Spring& sp : springs) {
    const Vec3 d = s.positions[sp.b] - s.positions[sp.a];
    const double len = std::sqrt(dot(d, d));
    if (len < 1e-12) continue;
    const Vec3 dir = (1.0 / len) * d;
    const double rel = dot(s.velocities[sp.b] - s.velocities[sp.a], dir);
    const double mag =
        cfg.spring_stiffness * (len - sp.rest) + cfg.spring_damping * rel;
    const Vec3 f = mag * dir;
    forces[sp.a] = forces[sp.a] + f;
    forces[sp.b] = forces[sp.b] - f;
  }

  const double dt = cfg.integration_dt;
  for (int i = 0; i < n; ++i) {
    if (pinned != nullptr && (*pinned)[i]) continue;
    Vec3& v = s.velocities[i];
    Vec3& p = s.positions[i];
    v = v + (dt / kPointMass) * forces[i];
    v.z -= dt * kGravity;
    const double drag = std::max(0.0, 1.0 - kAirDrag * dt);
    v = drag * v;
    if (p.z <= kContactHeight) {
      const double scale = folded[i] ? kFoldFrictionScale : 1.0;
      const double fr =
          std::max(0.0, 1.0 - scale * cfg.ground_friction * dt);
      v.x *= fr;
      v.y *= fr;
    }
    p = p + dt * v;
    if (p.z < 0.0) {
      p.z = 0.0;
      if (v.z < 0.0) v.z = 0.0;
    }
  }
}

double kinetic_energy(const ClothState& s) {
  double ke = 0.0;
  for (const Vec3& v : s.velocities) ke += 0.5 * kPointMass * dot(v, v);
  return ke;
}

// Pick projection: nearest cloth point to the pick pixel within the fixed
// pixel radius; ties broken by height (top layer first) then index.
int project_pick(const ClothState& s, const EnvConfig& cfg, double pick_x,
                 double pick_y) {
  const int n = s.grid_size * s.grid_size;
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  double best_z = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double u, v;
    world_to_image(cfg, s.positions[i].x, s.positions[i].y, u, v);
    const double du = (u - pick_x) * cfg.obs_size;
    const double dv = (v - pick_y) * cfg.obs_size;
    const double dist = std::sqrt(du * du + dv * dv);
    if (dist > kPickRadiusPixels) continue;
    const double z = s.positions[i].z;
    if (dist < best_dist - 1e-12 ||
        (std::abs(dist - best_dist) <= 1e-12 && z > best_z + 1e-12)) {
      best = i;
      best_dist = dist;
      best_z = z;
    }
  }
  return best;
}

// Lift a pinch of cloth (the grabbed point plus its grid neighbors), drag it
// to the target in small increments, release, then relax. Returns kinetic
// energy after the first and last relaxation substep via `debug`.
void drag_and_relax(ClothState& s, const EnvConfig& cfg,
                    const std::vector<Spring>& springs, int held,
                    double target_x, double target_y, StepDebug* debug) {
  const int g = s.grid_size;
  const double lift = kLiftFraction * s.rest_length;
  const double dt = cfg.integration_dt;

  const std::vector<int> patch = {held};
  std::vector<std::uint8_t> pinned(static_cast<std::size_t>(g) * g, 0);
  std::vector<Vec3> offsets(patch.size());
  for (std::size_t k = 0; k < patch.size(); ++k) {
    pinned[patch[k]] = 1;
    offsets[k] = s.positions[patch[k]] - s.positions[held];
    offsets[k].z = 0.0;
  }
  auto place_patch = [&](const Vec3& anchor, const Vec3& vel) {
    for (std::size_t k = 0; k < patch.size(); ++k) {
      s.positions[patch[k]] = anchor + offsets[k];
      s.velocities[patch[k]] = vel;
    }
  };

  place_patch(Vec3{s.positions[held].x, s.positions[held].y, lift}, Vec3{});
  for (int i = 0; i < kSettleSubsteps; ++i) substep(s, cfg, springs, &pinned);

  const double sx = s.positions[held].x;
  const double sy = s.positions[held].y;
  const double dist = std::hypot(target_x - sx, target_y - sy);
  const double advance = kDragStepFraction * s.rest_length;
  const int increments = std::max(1, static_cast<int>(std::ceil(dist / advance)));
  for (int k = 1; k <= increments; ++k) {
    const double t = static_cast<double>(k) / increments;
    const Vec3 next{sx + t * (target_x - sx), sy + t * (target_y - sy), lift};
    const Vec3 vel = (1.0 / dt) * (next - s.positions[held]);
    place_patch(next, vel);
    substep(s, cfg, springs, &pinned);
  }

  // place the grabbed point down and keep it pinned while the sheet starts
  // to settle, then release fully; releasing mid-air lets the stretched
  // material yank the corner straight back
  place_patch(Vec3{s.positions[held].x, s.positions[held].y, 0.0}, Vec3{});
  const int pinned_phase = cfg.relaxation_steps / 3;
  for (int i = 0; i < cfg.relaxation_steps; ++i) {
    substep(s, cfg, springs, i < pinned_phase ? &pinned : nullptr);
    if (debug != nullptr) {
      const double ke = kinetic_energy(s);
      if (i == 0) debug->ke_first = ke;
      debug->ke_last = ke;
    }
  }
}

struct Tri {
  Vec3 a, b, c;
  double mean_z;
  bool flipped;  // negative signed area in the xy projection (face-down)
};

std::vector<Tri> cloth_triangles(const ClothState& s) {
  const int g = s.grid_size;
  std::vector<Tri> tris;
  tris.reserve(static_cast<std::size_t>(2 * (g - 1) * (g - 1)));
  auto idx = [g](int r, int c) { return r * g + c; };
  auto push = [&tris](Vec3 a, Vec3 b, Vec3 c) {
    const double area2 =
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    tris.push_back({a, b, c, (a.z + b.z + c.z) / 3.0, area2 < 0.0});
  };
  for (int r = 0; r + 1 < g; ++r) {
    for (int c = 0; c + 1 < g; ++c) {
      const Vec3 p00 = s.positions[idx(r, c)];
      const Vec3 p01 = s.positions[idx(r, c + 1)];
      const Vec3 p10 = s.positions[idx(r + 1, c)];
      const Vec3 p11 = s.positions[idx(r + 1, c + 1)];
      push(p00, p01, p11);
      push(p00, p11, p10);
    }
  }
  return tris;
}

bool point_in_tri(const Tri& t, double px, double py) {
  auto edge = [px, py](const Vec3& a, const Vec3& b) {
    return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
  };
  const double e0 = edge(t.a, t.b);
  const double e1 = edge(t.b, t.c);
  const double e2 = edge(t.c, t.a);
  const double tol = 1e-15;
  const bool pos = e0 >= -tol && e1 >= -tol && e2 >= -tol;
  const bool neg = e0 <= tol && e1 <= tol && e2 <= tol;
  return pos || neg;
}

double tri_area_xy(const Tri& t) {
  return 0.5 * std::abs((t.b.x - t.a.x) * (t.c.y - t.a.y) -
                        (t.b.y - t.a.y) * (t.c.x - t.a.x));
}

}  // namespace

void EnvConfig::validate() const {
  if (grid_size < 3) throw ConfigError("grid_size must be >= 3");
  if (!(cloth_side > 0.0)) throw ConfigError("cloth_side must be positive");
  if (!(spring_stiffness > 0.0) || !(spring_damping > 0.0) ||
      !(ground_friction > 0.0))
    throw ConfigError("physics constants must be positive");
  if (!(integration_dt > 0.0)) throw ConfigError("integration_dt must be positive");
  if (relaxation_steps < 1) throw ConfigError("relaxation_steps must be >= 1");
  if (obs_size < 4) throw ConfigError("obs_size must be >= 4");
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(face_brightness_top) || !in01(face_brightness_bottom) ||
      !in01(background_brightness))
    throw ConfigError("brightness values must lie in [0,1]");
  if (std::abs(face_brightness_top - face_brightness_bottom) < 0.2)
    throw ConfigError("face brightnesses must differ by at least 0.2");
  if (!(obs_noise_std >= 0.0)) throw ConfigError("obs_noise_std must be >= 0");
  if (!(coverage_target > 0.0) || !(coverage_target <= 1.0))
    throw ConfigError("coverage_target must be in (0,1]");
  if (max_actions < 1) throw ConfigError("max_actions must be >= 1");
  if (crumple_actions < 0) throw ConfigError("crumple_actions must be >= 0");
}

Action Action::clamped(double px, double py, double dx, double dy) {
  if (!std::isfinite(px) || !std::isfinite(py) || !std::isfinite(dx) ||
      !std::isfinite(dy))
    throw ConfigError("action components must be finite");
  Action a;
  a.pick_x = std::clamp(px, 0.0, 1.0);
  a.pick_y = std::clamp(py, 0.0, 1.0);
  a.delta_x = std::clamp(dx, -1.0, 1.0);
  a.delta_y = std::clamp(dy, -1.0, 1.0);
  return a;
}

const char* done_reason_name(DoneReason r) {
  switch (r) {
    case DoneReason::none: return "none";
    case DoneReason::target_reached: return "target_reached";
    case DoneReason::action_limit: return "action_limit";
    case DoneReason::out_of_bounds: return "out_of_bounds";
  }
  return "none";
}

DoneReason done_reason_from_name(const std::string& name) {
  if (name == "target_reached") return DoneReason::target_reached;
  if (name == "action_limit") return DoneReason::action_limit;
  if (name == "out_of_bounds") return DoneReason::out_of_bounds;
  if (name == "none") return DoneReason::none;
  throw ConfigError("unknown done_reason '" + name + "'");
}

void world_to_image(const EnvConfig& config, double wx, double wy, double& u,
                    double& v) {
  const double hw = config.view_halfwidth();
  u = (wx + hw) / (2.0 * hw);
  v = (wy + hw) / (2.0 * hw);
}

ClothState flat_state(const EnvConfig& config) {
  config.validate();
  const int g = config.grid_size;
  const double rest = config.rest_length();
  ClothState s;
  s.grid_size = g;
  s.rest_length = rest;
  s.positions.resize(static_cast<std::size_t>(g) * g);
  s.velocities.assign(static_cast<std::size_t>(g) * g, Vec3{});
  const double half = config.cloth_side / 2.0;
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      s.positions[static_cast<std::size_t>(r) * g + c] =
          Vec3{c * rest - half, r * rest - half, 0.0};
    }
  }
  return s;
}

ClothState reset(const EnvConfig& config, std::uint64_t seed) {
  ClothState s = flat_state(config);
  if (config.crumple_actions == 0) return s;

  const auto springs = build_springs(s.grid_size, s.rest_length);
  Rng rng(derive_seed(seed, seed_tag("crumple")));
  const int n = s.grid_size * s.grid_size;
  for (int k = 0; k < config.crumple_actions; ++k) {
    // grab an outer point and fold it across the center; inward folds are
    // what produce the partially-covered starts the task needs
    int point = rng.uniform_int(0, n - 1);
    for (int tries = 0; tries < 64; ++tries) {
      const Vec3 p = s.positions[point];
      if (std::hypot(p.x, p.y) >= 0.3 * config.cloth_side) break;
      point = rng.uniform_int(0, n - 1);
    }
    const Vec3 p = s.positions[point];
    const double across = rng.uniform(0.05, 0.6);
    const double jitter = 0.08 * config.cloth_side;
    const double tx = -across * p.x + rng.uniform(-jitter, jitter);
    const double ty = -across * p.y + rng.uniform(-jitter, jitter);
    drag_and_relax(s, config, springs, point, tx, ty, nullptr);
  }
  // hand the episode a settled start
  for (Vec3& v : s.velocities) v = Vec3{};
  for (Vec3& p : s.positions) p.z = 0.0;
  s.step_index = 0;
  return s;
}

StepResult step(const ClothState& state, const Action& action,
                const EnvConfig& config, StepDebug* debug) {
  config.validate();
  if (state.step_index >= config.max_actions)
    throw ConfigError("episode already over: step_index >= max_actions");

  StepResult result;
  result.next_state = state;
  ClothState& s = result.next_state;

  const int held = project_pick(s, config, action.pick_x, action.pick_y);
  if (debug != nullptr) debug->picked = held >= 0;
  if (held >= 0) {
    const double hw = config.view_halfwidth();
    const double place_u = std::clamp(action.pick_x + action.delta_x, 0.0, 1.0);
    const double place_v = std::clamp(action.pick_y + action.delta_y, 0.0, 1.0);
    const auto springs = build_springs(s.grid_size, s.rest_length);
    drag_and_relax(s, config, springs, held, place_u * 2.0 * hw - hw,
                   place_v * 2.0 * hw - hw, debug);
  }
  // a no-pick action still consumes one step of the budget

  s.step_index = state.step_index + 1;
  result.coverage = coverage(s, config);

  bool out = false;
  const double wlim = config.workspace_halfwidth();
  for (const Vec3& p : s.positions) {
    if (std::abs(p.x) > wlim || std::abs(p.y) > wlim) {
      out = true;
      break;
    }
  }

  if (result.coverage >= config.coverage_target) {
    result.done = true;
    result.done_reason = DoneReason::target_reached;
  } else if (out) {
    result.done = true;
    result.done_reason = DoneReason::out_of_bounds;
  } else if (s.step_index >= config.max_actions) {
    result.done = true;
    result.done_reason = DoneReason::action_limit;
  } else {
    result.done = false;
    result.done_reason = DoneReason::none;
  }
  return result;
}

double coverage_with_cell(const ClothState& state, const EnvConfig& config,
                          double cell) {
  if (!(cell > 0.0)) throw ConfigError("raster cell must be positive");
  const auto tris = cloth_triangles(state);

  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -min_x, max_y = -min_y;
  for (const Vec3& p : state.positions) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  if (!(min_x <= max_x)) return 0.0;
  min_x -= cell;
  min_y -= cell;
  max_x += cell;
  max_y += cell;

  const long nx = std::min<long>(8192, static_cast<long>((max_x - min_x) / cell) + 2);
  const long ny = std::min<long>(8192, static_cast<long>((max_y - min_y) / cell) + 2);
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(nx) * ny, 0);

  const double min_area = 1e-12;
  for (const Tri& t : tris) {
    if (tri_area_xy(t) < min_area) continue;
    const double tx0 = std::min({t.a.x, t.b.x, t.c.x});
    const double tx1 = std::max({t.a.x, t.b.x, t.c.x});
    const double ty0 = std::min({t.a.y, t.b.y, t.c.y});
    const double ty1 = std::max({t.a.y, t.b.y, t.c.y});
    const long cx0 = std::max(0L, static_cast<long>((tx0 - min_x) / cell));
    const long cx1 = std::min(nx - 1, static_cast<long>((tx1 - min_x) / cell) + 1);
    const long cy0 = std::max(0L, static_cast<long>((ty0 - min_y) / cell));
    const long cy1 = std::min(ny - 1, static_cast<long>((ty1 - min_y) / cell) + 1);
    for (long gy = cy0; gy <= cy1; ++gy) {
      const double py = min_y + (gy + 0.5) * cell;
      for (long gx = cx0; gx <= cx1; ++gx) {
        if (hit[static_cast<std::size_t>(gy) * nx + gx]) continue;
        const double px = min_x + (gx + 0.5) * cell;
        if (point_in_tri(t, px, py))
          hit[static_cast<std::size_t>(gy) * nx + gx] = 1;
      }
    }
  }

  std::size_t count = 0;
  for (std::uint8_t h : hit) count += h;
  const double area = static_cast<double>(count) * cell * cell;
  return area / (config.cloth_side * config.cloth_side);
}

double coverage(const ClothState& state, const EnvConfig& config) {
  return coverage_with_cell(state, config,
                            config.cloth_side / kRasterCellsPerSide);
}

Observation render(const ClothState& state, const EnvConfig& config,
                   std::uint64_t seed) {
  const int n = config.obs_size;
  Observation obs;
  obs.size = n;
  obs.pixels.assign(static_cast<std::size_t>(n) * n,
                    config.background_brightness);

  const auto tris = cloth_triangles(state);
  const double hw = config.view_halfwidth();
  const double px_size = 2.0 * hw / n;
  // priority per pixel: highest quantized height wins, then face-down
  // triangles (the layer folded on top), then triangle index
  const double zq = 0.05 * state.rest_length;
  std::vector<long> best(static_cast<std::size_t>(n) * n,
                         std::numeric_limits<long>::min());
  const double min_area = 1e-12;
  for (std::size_t ti = 0; ti < tris.size(); ++ti) {
    const Tri& t = tris[ti];
    if (tri_area_xy(t) < min_area) continue;
    const long zlevel = static_cast<long>(std::floor(t.mean_z / zq));
    const long pri = ((zlevel + (1L << 20)) << 22) |
                     (static_cast<long>(t.flipped) << 21) |
                     static_cast<long>(ti);
    const double tx0 = std::min({t.a.x, t.b.x, t.c.x});
    const double tx1 = std::max({t.a.x, t.b.x, t.c.x});
    const double ty0 = std::min({t.a.y, t.b.y, t.c.y});
    const double ty1 = std::max({t.a.y, t.b.y, t.c.y});
    const int cx0 = std::max(0, static_cast<int>((tx0 + hw) / px_size));
    const int cx1 = std::min(n - 1, static_cast<int>((tx1 + hw) / px_size) + 1);
    const int cy0 = std::max(0, static_cast<int>((ty0 + hw) / px_size));
    const int cy1 = std::min(n - 1, static_cast<int>((ty1 + hw) / px_size) + 1);
    for (int gy = cy0; gy <= cy1; ++gy) {
      const double py = -hw + (gy + 0.5) * px_size;
      for (int gx = cx0; gx <= cx1; ++gx) {
        const double px = -hw + (gx + 0.5) * px_size;
        if (!point_in_tri(t, px, py)) continue;
        const std::size_t pix = static_cast<std::size_t>(gy) * n + gx;
        if (pri > best[pix]) {
          best[pix] = pri;
          obs.pixels[pix] = t.flipped ? config.face_brightness_bottom
                                      : config.face_brightness_top;
        }
      }
    }
  }

  if (config.obs_noise_std > 0.0) {
    Rng rng(derive_seed(seed, seed_tag("obsnoise")));
    for (double& p : obs.pixels) {
      p = std::clamp(p + rng.normal(0.0, config.obs_noise_std), 0.0, 1.0);
    }
  }
  return obs;
}

EnvConfig make_target_env(const EnvConfig& source, const ShiftSpec& shift) {
  source.validate();
  if (!(shift.stiffness_scale > 0.0) || !(shift.damping_scale > 0.0) ||
      !(shift.friction_scale > 0.0))
    throw ConfigError("shift multipliers must be positive");
  EnvConfig target = source;
  target.spring_stiffness *= shift.stiffness_scale;
  target.spring_damping *= shift.damping_scale;
  target.ground_friction *= shift.friction_scale;
  target.face_brightness_top += shift.brightness_offset_top;
  target.face_brightness_bottom += shift.brightness_offset_bottom;
  target.background_brightness += shift.brightness_offset_background;
  target.obs_noise_std += shift.noise_std_offset;
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(target.face_brightness_top) ||
      !in01(target.face_brightness_bottom) ||
      !in01(target.background_brightness))
    throw ConfigError("shifted brightness leaves [0,1]");
  if (std::abs(target.face_brightness_top - target.face_brightness_bottom) <
      0.2)
    throw ConfigError("shifted face contrast drops below 0.2");
  if (!(target.obs_noise_std >= 0.0))
    throw ConfigError("shifted obs_noise_std must be >= 0");
  target.validate();
  return target;
}

}  // namespace switchsim

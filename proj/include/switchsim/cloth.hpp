#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace switchsim {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// Simulation parameters for the mass-spring smoothing environment. The same
// struct configures the shifted "target" twin produced by make_target_env.
struct EnvConfig {
  int grid_size = 9;            // point masses per side
  double cloth_side = 0.25;     // meters
  double spring_stiffness = 1200.0;
  double spring_damping = 4.0;
  double ground_friction = 6.0;  // tangential viscous drag while in contact
  double integration_dt = 0.003;
  int relaxation_steps = 150;   // damped integration substeps after release
  int obs_size = 32;            // observation pixels per side
  double face_brightness_top = 0.80;
  double face_brightness_bottom = 0.35;
  double background_brightness = 0.08;
  double obs_noise_std = 0.01;
  double coverage_target = 0.92;
  int max_actions = 10;
  int crumple_actions = 3;

  double rest_length() const { return cloth_side / (grid_size - 1); }
  // Camera box half-side. A flat cloth spans 164/224 of the image, matching
  // the workspace-to-cloth ratio the renderer is calibrated for.
  double view_halfwidth() const { return cloth_side * (224.0 / 164.0) / 2.0; }
  // Workspace is a square of side 1.5 x cloth_side centered on the origin,
  // slightly larger than the camera box; any point beyond it (per axis) ends
  // the episode out of bounds.
  double workspace_halfwidth() const { return 0.75 * cloth_side; }

  void validate() const;  // throws ConfigError
};

struct ClothState {
  std::vector<Vec3> positions;   // grid_size^2, row-major (row * g + col)
  std::vector<Vec3> velocities;
  double rest_length = 0.0;
  int grid_size = 0;
  int step_index = 0;
};

struct Observation {
  int size = 0;
  std::vector<double> pixels;  // row-major, intensities in [0,1]
};

// 4D pick-and-place in normalized image coordinates. pick in [0,1]^2,
// deltas in [-1,1]. Construction clamps; non-finite inputs are rejected.
struct Action {
  double pick_x = 0.5;
  double pick_y = 0.5;
  double delta_x = 0.0;
  double delta_y = 0.0;

  static Action clamped(double px, double py, double dx, double dy);
};

enum class DoneReason { none, target_reached, action_limit, out_of_bounds };

const char* done_reason_name(DoneReason r);
DoneReason done_reason_from_name(const std::string& name);

struct StepResult {
  ClothState next_state;
  double coverage = 0.0;
  bool done = false;
  DoneReason done_reason = DoneReason::none;
};

// Kinetic energy right after the first and last post-release relaxation
// substep; the damped system must lose energy between the two.
struct StepDebug {
  double ke_first = 0.0;
  double ke_last = 0.0;
  bool picked = false;  // false when no cloth point was within the pick radius
};

// Flat cloth, then `crumple_actions` random inward pick-and-place drags from
// the seeded stream. Deterministic given (config, seed).
ClothState reset(const EnvConfig& config, std::uint64_t seed);

ClothState flat_state(const EnvConfig& config);

// One pick-and-place action. Throws ConfigError if the episode is over
// (state.step_index >= config.max_actions).
StepResult step(const ClothState& state, const Action& action,
                const EnvConfig& config, StepDebug* debug = nullptr);

// Fraction of the flat-cloth footprint covered by the union of cloth quad
// footprints, rasterized at the default cell size (cloth_side / 360).
double coverage(const ClothState& state, const EnvConfig& config);
// Same, at an explicit raster cell size (tests use this for convergence and
// oracle checks).
double coverage_with_cell(const ClothState& state, const EnvConfig& config,
                          double cell);

// Top-down orthographic grayscale rendering with per-pixel Gaussian noise.
Observation render(const ClothState& state, const EnvConfig& config,
                   std::uint64_t seed);

// Normalized image coordinates of a world position under the fixed top-down
// camera (may fall outside [0,1] when the point leaves the view).
void world_to_image(const EnvConfig& config, double wx, double wy, double& u,
                    double& v);

// Multiplicative dynamics shifts plus additive observation shifts that turn a
// source config into the desk-scale stand-in for the physical environment.
struct ShiftSpec {
  double stiffness_scale = 1.0;
  double damping_scale = 1.0;
  double friction_scale = 1.0;
  double brightness_offset_top = 0.0;
  double brightness_offset_bottom = 0.0;
  double brightness_offset_background = 0.0;
  double noise_std_offset = 0.0;
};

// Throws ConfigError if a multiplier is not positive, a shifted brightness
// leaves [0,1], or the face contrast drops below 0.2.
EnvConfig make_target_env(const EnvConfig& source, const ShiftSpec& shift);

}  // namespace switchsim

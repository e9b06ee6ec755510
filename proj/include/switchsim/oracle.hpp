#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "switchsim/cloth.hpp"

namespace switchsim {

// One demonstration episode. Each stored pair is the observation rendered
// BEFORE the action was taken (supervised pairs for behavior cloning).
struct Trajectory {
  std::vector<std::pair<Observation, Action>> steps;
  std::vector<double> coverages;  // after each action
  double initial_coverage = 0.0;
  double final_coverage = 0.0;
  DoneReason final_reason = DoneReason::none;
  std::uint64_t seed = 0;
};

// Privileged corner-pulling demonstrator: among the four cloth grid corners,
// pick the one with the largest planar displacement from its flat-target
// location (ties broken by corner index 0..3 = (0,0),(0,g-1),(g-1,0),
// (g-1,g-1)) and pull it back to that target.
Action demo_action(const ClothState& state, const EnvConfig& config);

// `count` seeded episodes rolled out with demo_action until termination.
// Demonstration observations are rendered without observation noise.
std::vector<Trajectory> generate_demos(const EnvConfig& config, int count,
                                       std::uint64_t seed);

}  // namespace switchsim

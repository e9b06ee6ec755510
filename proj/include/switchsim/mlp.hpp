#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "switchsim/cloth.hpp"

namespace switchsim {

// Small feed-forward policy: flattened observation -> tanh hidden layers ->
// 4 outputs. The head squashes the pick coordinates through a sigmoid into
// [0,1] and the deltas through tanh into [-1,1], so predictions are bounded
// and differentiable everywhere.
struct PolicyNet {
  std::vector<int> layer_sizes;               // {in, h..., 4}
  std::vector<std::vector<double>> weights;   // per layer, row-major out x in
  std::vector<std::vector<double>> biases;    // per layer

  std::size_t param_count() const;
};

// Glorot-uniform weights, zero biases; deterministic given seed.
PolicyNet make_policy(const std::vector<int>& layer_sizes, std::uint64_t seed);

// Squashed 4-vector output for a flattened input of layer_sizes.front()
// doubles.
std::array<double, 4> forward4(const PolicyNet& net, const double* input);

Action predict(const PolicyNet& net, const Observation& obs);

// Gradients laid out like the network parameters.
struct PolicyGrads {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  void init_like(const PolicyNet& net);
  void zero();
};

using TrainPair = std::pair<Observation, Action>;

// Mean over the batch of the mean squared error across the 4 action
// components. Throws on an empty batch or input-size mismatch.
double bc_loss(const PolicyNet& net, const std::vector<TrainPair>& batch);

// Loss (data term + 0.5 * l2 * ||W||^2 over weight matrices) and its
// gradient, accumulated over the referenced pairs.
double bc_loss_grad(const PolicyNet& net,
                    const std::vector<const TrainPair*>& batch, double l2,
                    PolicyGrads& grads);

bool params_finite(const PolicyNet& net);

}  // namespace switchsim

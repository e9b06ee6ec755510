#include "switchsim/mlp.hpp"

#include <cmath>

#include "switchsim/errors.hpp"
#include "switchsim/kernels.hpp"
#include "switchsim/rng.hpp"

namespace switchsim {
namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct ForwardCache {
  // activations[0] is the input; activations[L] the squashed output
  std::vector<std::vector<double>> activations;
};

void forward_into(const PolicyNet& net, const double* input,
                  ForwardCache& cache) {
  const std::size_t layers = net.weights.size();
  cache.activations.resize(layers + 1);
  cache.activations[0].assign(input, input + net.layer_sizes.front());
  for (std::size_t l = 0; l < layers; ++l) {
    const int rows = net.layer_sizes[l + 1];
    const int cols = net.layer_sizes[l];
    auto& out = cache.activations[l + 1];
    out.resize(static_cast<std::size_t>(rows));
    kernels::matvec(net.weights[l].data(), rows, cols,
                    cache.activations[l].data(), out.data());
    for (int r = 0; r < rows; ++r) out[r] += net.biases[l][r];
    if (l + 1 < layers) {
      for (int r = 0; r < rows; ++r) out[r] = std::tanh(out[r]);
    } else {
      out[0] = sigmoid(out[0]);
      out[1] = sigmoid(out[1]);
      out[2] = std::tanh(out[2]);
      out[3] = std::tanh(out[3]);
    }
  }
}

}  // namespace

std::size_t PolicyNet::param_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

PolicyNet make_policy(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2)
    throw ConfigError("policy needs at least input and output layers");
  if (layer_sizes.back() != 4)
    throw ConfigError("policy output dimension must be 4");
  for (int s : layer_sizes)
    if (s < 1) throw ConfigError("layer sizes must be positive");

  PolicyNet net;
  net.layer_sizes = layer_sizes;
  Rng rng(derive_seed(seed, seed_tag("policy-init")));
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int rows = layer_sizes[l + 1];
    const int cols = layer_sizes[l];
    const double bound = std::sqrt(6.0 / (rows + cols));
    std::vector<double> w(static_cast<std::size_t>(rows) * cols);
    for (double& v : w) v = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(static_cast<std::size_t>(rows), 0.0);
  }
  return net;
}

std::array<double, 4> forward4(const PolicyNet& net, const double* input) {
  static thread_local ForwardCache cache;
  forward_into(net, input, cache);
  const auto& out = cache.activations.back();
  return {out[0], out[1], out[2], out[3]};
}

Action predict(const PolicyNet& net, const Observation& obs) {
  const int expected = net.layer_sizes.front();
  if (static_cast<int>(obs.pixels.size()) != expected)
    throw ConfigError("observation size does not match policy input layer");
  const auto out = forward4(net, obs.pixels.data());
  return Action::clamped(out[0], out[1], out[2], out[3]);
}

void PolicyGrads::init_like(const PolicyNet& net) {
  weights.clear();
  biases.clear();
  for (const auto& w : net.weights) weights.emplace_back(w.size(), 0.0);
  for (const auto& b : net.biases) biases.emplace_back(b.size(), 0.0);
}

void PolicyGrads::zero() {
  for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

double bc_loss(const PolicyNet& net, const std::vector<TrainPair>& batch) {
  if (batch.empty()) throw ConfigError("bc_loss requires a nonempty batch");
  double total = 0.0;
  for (const auto& [obs, act] : batch) {
    if (static_cast<int>(obs.pixels.size()) != net.layer_sizes.front())
      throw ConfigError("observation size does not match policy input layer");
    const auto out = forward4(net, obs.pixels.data());
    const std::array<double, 4> target = {act.pick_x, act.pick_y, act.delta_x,
                                          act.delta_y};
    double err = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double d = out[j] - target[j];
      err += d * d;
    }
    total += err / 4.0;
  }
  return total / static_cast<double>(batch.size());
}

double bc_loss_grad(const PolicyNet& net,
                    const std::vector<const TrainPair*>& batch, double l2,
                    PolicyGrads& grads) {
  if (batch.empty()) throw ConfigError("bc_loss_grad requires a nonempty batch");
  const std::size_t layers = net.weights.size();
  grads.zero();

  static thread_local ForwardCache cache;
  static thread_local std::vector<std::vector<double>> delta;
  delta.resize(layers);

  double total = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (const TrainPair* pair : batch) {
    const auto& [obs, act] = *pair;
    if (static_cast<int>(obs.pixels.size()) != net.layer_sizes.front())
      throw ConfigError("observation size does not match policy input layer");
    forward_into(net, obs.pixels.data(), cache);
    const auto& out = cache.activations.back();
    const std::array<double, 4> target = {act.pick_x, act.pick_y, act.delta_x,
                                          act.delta_y};

    auto& dout = delta[layers - 1];
    dout.resize(4);
    double err = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double diff = out[j] - target[j];
      err += diff * diff;
      // d(loss)/d(pre-squash): MSE factor times the squash derivative
      const double dloss = inv_batch * 0.5 * diff;
      const double dsquash =
          (j < 2) ? out[j] * (1.0 - out[j]) : (1.0 - out[j] * out[j]);
      dout[j] = dloss * dsquash;
    }
    total += err;

    for (std::size_t l = layers; l-- > 0;) {
      const int rows = net.layer_sizes[l + 1];
      const int cols = net.layer_sizes[l];
      const auto& dz = delta[l];
      kernels::rank1_update(grads.weights[l].data(), rows, cols, 1.0,
                            dz.data(), cache.activations[l].data());
      kernels::axpy(1.0, dz.data(), grads.biases[l].data(), rows);
      if (l == 0) break;
      auto& dprev = delta[l - 1];
      dprev.resize(static_cast<std::size_t>(cols));
      kernels::matvec_t(net.weights[l].data(), rows, cols, dz.data(),
                        dprev.data());
      const auto& a = cache.activations[l];  // tanh activations of layer l
      for (int c = 0; c < cols; ++c) dprev[c] *= (1.0 - a[c] * a[c]);
    }
  }
  total *= inv_batch / 4.0;

  if (l2 > 0.0) {
    for (std::size_t l = 0; l < layers; ++l) {
      total += 0.5 * l2 * kernels::sum_sq(net.weights[l].data(),
                                          net.weights[l].size());
      kernels::axpy(l2, net.weights[l].data(), grads.weights[l].data(),
                    net.weights[l].size());
    }
  }
  return total;
}

bool params_finite(const PolicyNet& net) {
  for (const auto& w : net.weights)
    for (double v : w)
      if (!std::isfinite(v)) return false;
  for (const auto& b : net.biases)
    for (double v : b)
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace switchsim

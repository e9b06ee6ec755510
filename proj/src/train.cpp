#include "switchsim/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "switchsim/errors.hpp"
#include "switchsim/kernels.hpp"
#include "switchsim/rng.hpp"

namespace switchsim {

void OptimizerConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (!(l2_coefficient >= 0.0)) throw ConfigError("l2_coefficient must be >= 0");
  if (minibatch_size < 1) throw ConfigError("minibatch_size must be >= 1");
  if (steps_per_epoch < 1) throw ConfigError("steps_per_epoch must be >= 1");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw ConfigError("moment decay rates must lie in (0,1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

void Dataset::append(const Trajectory& traj, int source_iteration,
                     const std::string& shard_id) {
  for (const auto& [obs, act] : traj.steps) {
    entries.push_back({obs, act, source_iteration});
  }
  shard_ids.push_back(shard_id);
}

void AdamState::init_like(const PolicyNet& net) {
  m_weights.clear();
  v_weights.clear();
  m_biases.clear();
  v_biases.clear();
  for (const auto& w : net.weights) {
    m_weights.emplace_back(w.size(), 0.0);
    v_weights.emplace_back(w.size(), 0.0);
  }
  for (const auto& b : net.biases) {
    m_biases.emplace_back(b.size(), 0.0);
    v_biases.emplace_back(b.size(), 0.0);
  }
  step = 0;
}

Trainer Trainer::make(const std::vector<int>& layer_sizes,
                      std::uint64_t seed) {
  Trainer t;
  t.net = make_policy(layer_sizes, seed);
  t.adam.init_like(t.net);
  return t;
}

namespace {

// Minibatch index draw: without replacement via partial Fisher-Yates when the
// pool is large enough, with replacement otherwise.
void draw_batch(Rng& rng, std::size_t pool, int batch,
                std::vector<std::size_t>& out) {
  out.clear();
  if (pool >= static_cast<std::size_t>(batch)) {
    static thread_local std::vector<std::size_t> perm;
    perm.resize(pool);
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = 0; k < batch; ++k) {
      const std::size_t j =
          k + static_cast<std::size_t>(rng.uniform_int(
                  0, static_cast<int>(pool - 1 - k)));
      std::swap(perm[k], perm[j]);
      out.push_back(perm[k]);
    }
  } else {
    for (int k = 0; k < batch; ++k)
      out.push_back(static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(pool - 1))));
  }
}

void run_epoch(Trainer& trainer, const Dataset& data,
               const std::vector<std::size_t>* pool_indices,
               const OptimizerConfig& opt, std::uint64_t seed) {
  opt.validate();
  const std::size_t pool =
      pool_indices ? pool_indices->size() : data.size();
  if (pool == 0) throw ConfigError("update_epoch requires a nonempty dataset");

  Rng rng(derive_seed(seed, seed_tag("epoch")));
  PolicyGrads grads;
  grads.init_like(trainer.net);
  std::vector<std::size_t> picks;
  std::vector<const TrainPair*> batch;
  std::vector<TrainPair> scratch;

  for (int s = 0; s < opt.steps_per_epoch; ++s) {
    draw_batch(rng, pool, opt.minibatch_size, picks);
    scratch.clear();
    batch.clear();
    scratch.reserve(picks.size());
    for (std::size_t raw : picks) {
      const std::size_t idx = pool_indices ? (*pool_indices)[raw] : raw;
      const Dataset::Entry& e = data.entries[idx];
      scratch.emplace_back(e.obs, e.action);
    }
    for (const TrainPair& p : scratch) batch.push_back(&p);

    const double loss =
        bc_loss_grad(trainer.net, batch, opt.l2_coefficient, grads);
    if (!std::isfinite(loss)) {
      throw DivergenceError("non-finite loss at optimizer step " +
                            std::to_string(trainer.adam.step + 1));
    }

    trainer.adam.step += 1;
    const double t = static_cast<double>(trainer.adam.step);
    const kernels::AdamParams ap{
        opt.learning_rate, opt.beta1,
        opt.beta2,         opt.epsilon,
        1.0 - std::pow(opt.beta1, t), 1.0 - std::pow(opt.beta2, t)};
    for (std::size_t l = 0; l < trainer.net.weights.size(); ++l) {
      kernels::adam_step(trainer.net.weights[l].data(),
                         grads.weights[l].data(),
                         trainer.adam.m_weights[l].data(),
                         trainer.adam.v_weights[l].data(),
                         trainer.net.weights[l].size(), ap);
      kernels::adam_step(trainer.net.biases[l].data(), grads.biases[l].data(),
                         trainer.adam.m_biases[l].data(),
                         trainer.adam.v_biases[l].data(),
                         trainer.net.biases[l].size(), ap);
    }
  }
}

}  // namespace

void update_epoch(Trainer& trainer, const Dataset& data,
                  const OptimizerConfig& opt, std::uint64_t seed) {
  run_epoch(trainer, data, nullptr, opt, seed);
}

void update_epoch_indexed(Trainer& trainer, const Dataset& data,
                          const std::vector<std::size_t>& indices,
                          const OptimizerConfig& opt, std::uint64_t seed) {
  run_epoch(trainer, data, &indices, opt, seed);
}

double dataset_loss(const PolicyNet& net, const Dataset& data, std::size_t cap,
                    std::uint64_t seed) {
  if (data.size() == 0) throw ConfigError("dataset_loss requires data");
  std::vector<TrainPair> sample;
  if (data.size() <= cap) {
    for (const auto& e : data.entries) sample.emplace_back(e.obs, e.action);
  } else {
    Rng rng(derive_seed(seed, seed_tag("loss-sample")));
    for (std::size_t k = 0; k < cap; ++k) {
      const auto& e = data.entries[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(data.size() - 1)))];
      sample.emplace_back(e.obs, e.action);
    }
  }
  return bc_loss(net, sample);
}

Ensemble train_ensemble(const Dataset& data, const OptimizerConfig& opt, int E,
                        const std::vector<std::uint64_t>& seeds, int epochs,
                        const std::vector<int>& layer_sizes) {
  if (E < 2) throw ConfigError("ensemble size must be >= 2");
  if (static_cast<int>(seeds.size()) != E)
    throw ConfigError("ensemble needs exactly E member seeds");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() !=
      seeds.size())
    throw ConfigError("ensemble member seeds must be distinct");
  if (epochs < 1) throw ConfigError("ensemble epochs must be >= 1");
  if (data.size() == 0) throw ConfigError("train_ensemble requires data");

  Ensemble ens;
  ens.member_seeds = seeds;
  for (int e = 0; e < E; ++e) {
    Trainer trainer = Trainer::make(layer_sizes, seeds[e]);
    // per-member bootstrap resample of the whole dataset; minibatches are
    // then drawn from this resample
    Rng rng(derive_seed(seeds[e], seed_tag("bootstrap")));
    std::vector<std::size_t> boot(data.size());
    for (std::size_t k = 0; k < data.size(); ++k)
      boot[k] = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(data.size() - 1)));
    for (int ep = 0; ep < epochs; ++ep) {
      update_epoch_indexed(trainer, data, boot, opt,
                           derive_seed(seeds[e], seed_tag("member-epoch"),
                                       static_cast<std::uint64_t>(ep)));
    }
    ens.members.push_back(std::move(trainer.net));
  }
  return ens;
}

}  // namespace switchsim

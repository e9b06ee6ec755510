#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "switchsim/mlp.hpp"
#include "switchsim/oracle.hpp"

namespace switchsim {

struct OptimizerConfig {
  double learning_rate = 2.5e-4;
  double l2_coefficient = 1e-5;
  int minibatch_size = 64;
  int steps_per_epoch = 400;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// Aggregated demonstration pairs. Grows monotonically across iterations;
// shard ids record where each trajectory came from so holdout disjointness
// can be audited.
struct Dataset {
  struct Entry {
    Observation obs;
    Action action;
    int source_iteration = 0;
  };
  std::vector<Entry> entries;
  std::vector<std::string> shard_ids;

  void append(const Trajectory& traj, int source_iteration,
              const std::string& shard_id);
  std::size_t size() const { return entries.size(); }
};

struct AdamState {
  std::vector<std::vector<double>> m_weights, v_weights;
  std::vector<std::vector<double>> m_biases, v_biases;
  long step = 0;

  void init_like(const PolicyNet& net);
};

struct Trainer {
  PolicyNet net;
  AdamState adam;

  static Trainer make(const std::vector<int>& layer_sizes, std::uint64_t seed);
};

// One model update epoch: steps_per_epoch Adam steps on the behavior-cloning
// loss with L2 regularization, minibatches drawn from the seeded stream
// (without replacement per batch; with replacement when the dataset is
// smaller than the minibatch). Throws DivergenceError on a non-finite loss.
void update_epoch(Trainer& trainer, const Dataset& data,
                  const OptimizerConfig& opt, std::uint64_t seed);

// Same, restricted to the given index subset of the dataset (used for
// bootstrap resamples). Indices may repeat.
void update_epoch_indexed(Trainer& trainer, const Dataset& data,
                          const std::vector<std::size_t>& indices,
                          const OptimizerConfig& opt, std::uint64_t seed);

// bc_loss over a deterministic subsample of the dataset (at most `cap`
// pairs); used for logging.
double dataset_loss(const PolicyNet& net, const Dataset& data, std::size_t cap,
                    std::uint64_t seed);

struct Ensemble {
  std::vector<PolicyNet> members;
  std::vector<std::uint64_t> member_seeds;
};

// E members, each from an independently seeded init, each trained for
// `epochs` update epochs on minibatches drawn from its own bootstrap
// resample of the dataset. Duplicate seeds are rejected.
Ensemble train_ensemble(const Dataset& data, const OptimizerConfig& opt, int E,
                        const std::vector<std::uint64_t>& seeds, int epochs,
                        const std::vector<int>& layer_sizes);

}  // namespace switchsim

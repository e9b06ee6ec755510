#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "switchsim/errors.hpp"
#include "switchsim/kernels.hpp"
#include "switchsim/mlp.hpp"
#include "switchsim/rng.hpp"
#include "switchsim/train.hpp"

using namespace switchsim;

namespace {

Observation random_obs(Rng& rng, int size) {
  Observation obs;
  obs.size = size;
  obs.pixels.resize(static_cast<std::size_t>(size) * size);
  for (double& p : obs.pixels) p = rng.uniform();
  return obs;
}

Action random_action(Rng& rng) {
  return Action::clamped(rng.uniform(), rng.uniform(), rng.uniform(-1, 1),
                         rng.uniform(-1, 1));
}

// flatten all parameters for finite-difference probing
std::vector<double*> param_view(PolicyNet& net) {
  std::vector<double*> view;
  for (auto& w : net.weights)
    for (double& v : w) view.push_back(&v);
  for (auto& b : net.biases)
    for (double& v : b) view.push_back(&v);
  return view;
}

std::vector<double> grad_flat(const PolicyGrads& grads) {
  std::vector<double> flat;
  for (const auto& w : grads.weights) flat.insert(flat.end(), w.begin(), w.end());
  for (const auto& b : grads.biases) flat.insert(flat.end(), b.begin(), b.end());
  return flat;
}

Dataset single_pair_dataset(const Observation& obs, const Action& act) {
  Dataset data;
  Trajectory traj;
  traj.steps.emplace_back(obs, act);
  traj.coverages.push_back(1.0);
  data.append(traj, 1, "test/0");
  return data;
}

}  // namespace

TEST_CASE("predict: determinism, zero net, output ranges") {
  Rng rng(11);
  const Observation obs = random_obs(rng, 8);

  PolicyNet net = make_policy({64, 16, 4}, 5);
  const Action a1 = predict(net, obs);
  const Action a2 = predict(net, obs);
  CHECK(a1.pick_x == a2.pick_x);
  CHECK(a1.delta_y == a2.delta_y);

  for (auto& w : net.weights) std::fill(w.begin(), w.end(), 0.0);
  const Action zero = predict(net, obs);
  CHECK(zero.pick_x == doctest::Approx(0.5));
  CHECK(zero.pick_y == doctest::Approx(0.5));
  CHECK(zero.delta_x == doctest::Approx(0.0));
  CHECK(zero.delta_y == doctest::Approx(0.0));

  for (int trial = 0; trial < 20; ++trial) {
    const PolicyNet p = make_policy({64, 16, 4}, 100 + trial);
    const Action a = predict(p, random_obs(rng, 8));
    CHECK(a.pick_x >= 0.0);
    CHECK(a.pick_x <= 1.0);
    CHECK(a.pick_y >= 0.0);
    CHECK(a.pick_y <= 1.0);
    CHECK(a.delta_x >= -1.0);
    CHECK(a.delta_x <= 1.0);
    CHECK(a.delta_y >= -1.0);
    CHECK(a.delta_y <= 1.0);
  }

  Observation bad = obs;
  bad.pixels.pop_back();
  CHECK_THROWS_AS(predict(net, bad), ConfigError);
}

TEST_CASE("bc_loss closed forms") {
  // one pair, prediction forced to (0,0,...) is impossible through the head,
  // so check the hand value directly on predictions vs targets instead: the
  // loss definition is mean over batch of mean over the 4 components.
  Rng rng(3);
  PolicyNet net = make_policy({16, 8, 4}, 9);
  const Observation obs = random_obs(rng, 4);
  const Action pred = predict(net, obs);

  // target equal to the prediction -> zero loss
  std::vector<TrainPair> batch = {{obs, pred}};
  CHECK(bc_loss(net, batch) == doctest::Approx(0.0).epsilon(1e-12));

  // closed form: mean over 4 components of squared differences
  const Action target = Action::clamped(
      pred.pick_x == 1.0 ? 0.0 : 1.0, pred.pick_y == 1.0 ? 0.0 : 1.0,
      pred.delta_x, pred.delta_y);
  batch = {{obs, target}};
  const double d0 = pred.pick_x - target.pick_x;
  const double d1 = pred.pick_y - target.pick_y;
  CHECK(bc_loss(net, batch) ==
        doctest::Approx((d0 * d0 + d1 * d1) / 4.0).epsilon(1e-12));

  CHECK_THROWS_AS(bc_loss(net, {}), ConfigError);
}

TEST_CASE("hand-computed loss: prediction (0,0,0,0) vs target (1,1,0,0)") {
  // mean over 4 components of squared errors {1,1,0,0} = 0.5
  const double err = (1.0 + 1.0 + 0.0 + 0.0) / 4.0;
  CHECK(err == doctest::Approx(0.5));
  // and through the implementation: a zero network outputs (0.5,0.5,0,0);
  // shift the target so the component-wise differences are (0.5,0.5,0,0)
  PolicyNet net = make_policy({4, 4}, 1);
  for (auto& w : net.weights) std::fill(w.begin(), w.end(), 0.0);
  Observation obs;
  obs.size = 2;
  obs.pixels = {0.1, 0.2, 0.3, 0.4};
  std::vector<TrainPair> batch = {{obs, Action::clamped(1.0, 0.0, 0.0, 0.0)}};
  CHECK(bc_loss(net, batch) == doctest::Approx((0.25 + 0.25) / 4.0));
}

TEST_CASE("loss symmetry under swapping prediction and target") {
  // squared loss is symmetric in (prediction - target); verified via two
  // nets whose predictions swap roles as targets
  Rng rng(17);
  const Observation obs = random_obs(rng, 6);
  const PolicyNet a = make_policy({36, 10, 4}, 21);
  const PolicyNet b = make_policy({36, 10, 4}, 22);
  const Action pa = predict(a, obs);
  const Action pb = predict(b, obs);
  std::vector<TrainPair> batch_a = {{obs, pb}};
  std::vector<TrainPair> batch_b = {{obs, pa}};
  CHECK(bc_loss(a, batch_a) == doctest::Approx(bc_loss(b, batch_b)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    PolicyNet net = make_policy({6, 5, 4}, 1000 + trial);
    std::vector<TrainPair> pairs;
    for (int i = 0; i < 3; ++i) {
      Observation obs;
      obs.size = 0;
      obs.pixels.resize(6);
      for (double& p : obs.pixels) p = rng.uniform(-1, 1);
      pairs.emplace_back(obs, random_action(rng));
    }
    std::vector<const TrainPair*> batch;
    for (const auto& p : pairs) batch.push_back(&p);

    const double l2 = 1e-3;
    PolicyGrads grads;
    grads.init_like(net);
    bc_loss_grad(net, batch, l2, grads);
    const auto flat = grad_flat(grads);
    auto view = param_view(net);
    REQUIRE(flat.size() == view.size());

    // independent oracle: central differences of the full objective
    auto objective = [&]() {
      PolicyGrads scratch;
      scratch.init_like(net);
      return bc_loss_grad(net, batch, l2, scratch);
    };
    const double h = 1e-6;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < view.size(); ++i) {
      const double saved = *view[i];
      *view[i] = saved + h;
      const double up = objective();
      *view[i] = saved - h;
      const double down = objective();
      *view[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double rel =
          std::abs(fd - flat[i]) / std::max(1e-8, std::abs(fd) + std::abs(flat[i]));
      max_rel = std::max(max_rel, rel);
    }
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("update_epoch drives a single repeated pair to near-zero loss") {
  Rng rng(77);
  const Observation obs = random_obs(rng, 6);
  const Action target = Action::clamped(0.3, 0.7, 0.2, -0.4);
  const Dataset data = single_pair_dataset(obs, target);

  OptimizerConfig opt;
  opt.learning_rate = 5e-3;
  opt.minibatch_size = 8;
  opt.steps_per_epoch = 400;
  opt.l2_coefficient = 0.0;

  Trainer trainer = Trainer::make({36, 16, 4}, 123);
  update_epoch(trainer, data, opt, 5);
  std::vector<TrainPair> batch = {{obs, target}};
  CHECK(bc_loss(trainer.net, batch) < 1e-3);
}

TEST_CASE("learning_rate = 0 leaves parameters unchanged") {
  Rng rng(78);
  const Dataset data =
      single_pair_dataset(random_obs(rng, 6), random_action(rng));
  OptimizerConfig opt;
  opt.learning_rate = 0.0;
  opt.steps_per_epoch = 10;
  opt.minibatch_size = 4;
  Trainer trainer = Trainer::make({36, 8, 4}, 9);
  const PolicyNet before = trainer.net;
  update_epoch(trainer, data, opt, 7);
  CHECK(trainer.net.weights == before.weights);
  CHECK(trainer.net.biases == before.biases);
}

TEST_CASE("update_epoch reproducibility and divergence detection") {
  Rng rng(79);
  Dataset data;
  for (int i = 0; i < 4; ++i) {
    Trajectory traj;
    traj.steps.emplace_back(random_obs(rng, 6), random_action(rng));
    traj.coverages.push_back(0.5);
    data.append(traj, 1, "test/" + std::to_string(i));
  }
  OptimizerConfig opt;
  opt.steps_per_epoch = 50;
  opt.minibatch_size = 8;

  Trainer t1 = Trainer::make({36, 8, 4}, 9);
  Trainer t2 = Trainer::make({36, 8, 4}, 9);
  update_epoch(t1, data, opt, 42);
  update_epoch(t2, data, opt, 42);
  CHECK(t1.net.weights == t2.net.weights);  // bit-stable given seeds

  Trainer t3 = Trainer::make({36, 8, 4}, 9);
  t3.net.weights[0][0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(update_epoch(t3, data, opt, 1), DivergenceError);
}

TEST_CASE("L2 term: parameter norm non-increasing on a perfectly fit point") {
  // zero data gradient: target equals the net's own prediction
  Rng rng(80);
  const Observation obs = random_obs(rng, 6);
  Trainer trainer = Trainer::make({36, 12, 4}, 31);
  const Action fixed = predict(trainer.net, obs);
  const Dataset data = single_pair_dataset(obs, fixed);

  OptimizerConfig opt;
  opt.l2_coefficient = 1e-3;
  opt.steps_per_epoch = 1;
  opt.minibatch_size = 4;

  auto weight_norm = [&]() {
    double s = 0.0;
    for (const auto& w : trainer.net.weights)
      s += kernels::sum_sq(w.data(), w.size());
    return std::sqrt(s);
  };

  double prev = weight_norm();
  for (int step = 0; step < 60; ++step) {
    update_epoch(trainer, data, opt, 1000 + step);
    // data gradient is not exactly zero after the first step (weights moved),
    // but the squared-loss gradient at a still-near-perfect fit stays tiny;
    // the L2 pull dominates and norms must not grow
    const double now = weight_norm();
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
}

TEST_CASE("train_ensemble: seeds control identity") {
  Rng rng(81);
  Dataset data;
  for (int i = 0; i < 6; ++i) {
    Trajectory traj;
    traj.steps.emplace_back(random_obs(rng, 6), random_action(rng));
    traj.coverages.push_back(0.5);
    data.append(traj, 1, "test/" + std::to_string(i));
  }
  OptimizerConfig opt;
  opt.steps_per_epoch = 20;
  opt.minibatch_size = 4;

  const Ensemble two =
      train_ensemble(data, opt, 2, {11, 12}, 1, {36, 8, 4});
  CHECK(two.members.size() == 2);
  CHECK(two.members[0].weights != two.members[1].weights);

  const Ensemble again =
      train_ensemble(data, opt, 2, {11, 12}, 1, {36, 8, 4});
  CHECK(two.members[0].weights == again.members[0].weights);
  CHECK(two.members[1].weights == again.members[1].weights);

  CHECK_THROWS_AS(train_ensemble(data, opt, 2, {11, 11}, 1, {36, 8, 4}),
                  ConfigError);
  CHECK_THROWS_AS(train_ensemble(data, opt, 1, {11}, 1, {36, 8, 4}),
                  ConfigError);
}

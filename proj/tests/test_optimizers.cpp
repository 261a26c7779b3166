#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "smg/dataio.hpp"
#include "smg/errors.hpp"
#include "smg/logistic.hpp"
#include "smg/optimizers.hpp"
#include "smg/quadratic.hpp"

namespace smg {
namespace {

QuadraticMeanProblem half_square() { return quadratic_mean_problem({Vector::Zero(1)}, Matrix::Identity(1, 1)); }

QuadraticMeanProblem two_centers() {
  Vector c1(2), c2(2);
  c1 << 1.0, 0.0;
  c2 << -1.0, 0.0;
  return quadratic_mean_problem({c1, c2}, Matrix::Identity(2, 2));
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<std::vector<std::size_t>> permutations(const ShufflingStrategy& s, std::size_t n, std::size_t T) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t t = 1; t <= T; ++t) out.push_back(permutation_for_epoch(s, n, t));
  return out;
}

double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

TEST(Smg, HandTracedFirstTwoSteps) {
  const auto p = half_square();
  std::vector<double> w_after, anchors, momenta;
  RunOptions opts;
  opts.observer = [&](const StepEvent& e) {
    w_after.push_back(e.w_after[0]);
    anchors.push_back((*e.anchor)[0]);
    momenta.push_back((*e.momentum)[0]);
  };
  smg_run(p, Schedule::custom({0.1, 0.1}), {ShufflingKind::kIncremental, 0}, 0.5, Vector::Ones(1), opts);
  ASSERT_EQ(w_after.size(), 2u);
  // Epoch 1: m0 = 0, g = 1, m1 = 0.5, w = 1 - 0.1 * 0.5.
  EXPECT_DOUBLE_EQ(anchors[0], 0.0);
  EXPECT_DOUBLE_EQ(momenta[0], 0.5);
  EXPECT_DOUBLE_EQ(w_after[0], 0.95);
  // Epoch 2: m0 = mean epoch-1 gradient = 1, g = 0.95, m1 = 0.975.
  EXPECT_DOUBLE_EQ(anchors[1], 1.0);
  EXPECT_DOUBLE_EQ(momenta[1], 0.975);
  EXPECT_NEAR(w_after[1], 0.95 - 0.1 * 0.975, 1e-16);
}

TEST(Smg, BetaZeroReducesToShufflingSgd) {
  const auto p = random_quadratic_problem(8, 3, 1);
  const Vector w0 = initial_point(3, 4, 1.0);
  for (auto kind : {ShufflingKind::kRandomizedReshuffling, ShufflingKind::kShuffleOnce,
                    ShufflingKind::kIncremental}) {
    const ShufflingStrategy s{kind, 17};
    const auto sched = Schedule::constant(0.5, 10);
    const auto a = smg_run(p, sched, s, 0.0, w0);
    const auto b = shuffling_sgd_run(p, sched, s, w0);
    for (std::size_t t = 0; t < 10; ++t) EXPECT_LE(max_abs_diff(a.snapshots[t], b.snapshots[t]), 1e-12);
    EXPECT_LE(max_abs_diff(a.final_iterate, b.final_iterate), 1e-12);
  }
}

TEST(Smg, MatchesReferenceLoop) {
  const auto data = synth_binary_dataset(12, 4, 3, 0.8);
  LogisticProblem p(data, 0.01, 4);
  const Vector w0 = initial_point(4, 1, 0.5);
  const ShufflingStrategy rr{ShufflingKind::kRandomizedReshuffling, 5};
  const auto sched = Schedule::diminishing(1.0, 1.0, 6);
  const auto run = smg_run(p, sched, rr, 0.4, w0);
  const auto ref = oracle::reference_trajectory(p, permutations(rr, 12, 6), sched.etas(), 0, 0.4, to_std(w0));
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(run.snapshots[t][static_cast<Eigen::Index>(j)], ref[t][j], 1e-13);
  }
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(run.final_iterate[static_cast<Eigen::Index>(j)], ref[6][j], 1e-13);
}

TEST(Smg, AnchorIsFrozenAndEqualsPreviousEpochMean) {
  const auto p = random_quadratic_problem(6, 3, 2);
  std::vector<std::vector<Vector>> grads(5), anchors(5);
  RunOptions opts;
  opts.observer = [&](const StepEvent& e) {
    grads[e.epoch - 1].push_back(e.grad);
    anchors[e.epoch - 1].push_back(*e.anchor);
  };
  smg_run(p, Schedule::constant(0.5, 5), {ShufflingKind::kRandomizedReshuffling, 3}, 0.5,
          initial_point(3, 0, 1.0), opts);
  for (std::size_t t = 0; t < 5; ++t) {
    for (const auto& a : anchors[t]) EXPECT_EQ(a, anchors[t].front());
  }
  for (std::size_t t = 1; t < 5; ++t) {
    Vector mean = Vector::Zero(3);
    for (const auto& g : grads[t - 1]) mean += g;
    mean /= 6.0;
    const Vector& m0 = anchors[t].front();
    EXPECT_LE((m0 - mean).norm(), 1e-12 * (1.0 + m0.norm()));
  }
}

TEST(Smg, RunningAverageTracksPartialMeans) {
  SmgStepper stepper(2, 4, 0.5);
  Vector w = Vector::Zero(2);
  Vector sum = Vector::Zero(2);
  stepper.begin_epoch(1);
  for (int i = 0; i < 4; ++i) {
    const Vector g = Vector::Constant(2, i + 1.0);
    stepper.step(w, g, 0.01);
    sum += g;
    EXPECT_LE((stepper.running_average() - sum / 4.0).norm(), 1e-15);
  }
  stepper.end_epoch();
  EXPECT_LE((*stepper.anchor() - sum / 4.0).norm(), 1e-15);
  stepper.begin_epoch(2);
  EXPECT_EQ(stepper.running_average(), Vector::Zero(2));
}

TEST(Ssmg, MatchesReferenceLoopAndReducesAtBetaZero) {
  const auto p = random_quadratic_problem(7, 2, 8);
  const Vector w0 = initial_point(2, 2, 1.0);
  const ShufflingStrategy once{ShufflingKind::kShuffleOnce, 9};
  const auto sched = Schedule::constant(0.4, 5);
  const auto run = ssmg_run(p, sched, once, 0.7, w0);
  const auto ref = oracle::reference_trajectory(p, permutations(once, 7, 5), sched.etas(), 1, 0.7, to_std(w0));
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(run.final_iterate[static_cast<Eigen::Index>(j)], ref[5][j], 1e-13);

  for (auto kind : {ShufflingKind::kShuffleOnce, ShufflingKind::kIncremental}) {
    const auto a = ssmg_run(p, sched, {kind, 9}, 0.0, w0);
    const auto b = shuffling_sgd_run(p, sched, {kind, 9}, w0);
    EXPECT_LE(max_abs_diff(a.final_iterate, b.final_iterate), 1e-12);
  }
}

TEST(Ssmg, RequiresSinglePermutation) {
  const auto p = random_quadratic_problem(4, 2, 1);
  EXPECT_THROW(ssmg_run(p, Schedule::constant(0.1, 2), {ShufflingKind::kRandomizedReshuffling, 0}, 0.5,
                        Vector::Zero(2)),
               InvalidArgument);
}

TEST(Ssmg, MomentumStaysWithinG) {
  const auto data = synth_binary_dataset(32, 5, 7, 0.8);
  LogisticProblem p(data, 0.01, 5);
  const double G = *p.constants().G;
  double worst = 0.0;
  RunOptions opts;
  opts.observer = [&](const StepEvent& e) { worst = std::max(worst, e.momentum->norm()); };
  ssmg_run(p, Schedule::constant(2.0, 20), {ShufflingKind::kShuffleOnce, 1}, 0.9, initial_point(5, 0), opts);
  EXPECT_GT(worst, 0.0);
  EXPECT_LE(worst, G);
}

TEST(Sgd, OneEpochHandTrace) {
  const auto p = two_centers();
  Vector w0(2);
  w0 << 0.5, 0.5;
  // eta_1 = 0.2 and n = 2 give a per-step rate of 0.1.
  const auto run = shuffling_sgd_run(p, Schedule::custom({0.2}), {ShufflingKind::kIncremental, 0}, w0);
  // Step 1 (c1 = (1,0)): g = (-0.5, 0.5), w = (0.55, 0.45).
  // Step 2 (c2 = (-1,0)): g = (1.55, 0.45), w = (0.395, 0.405).
  EXPECT_NEAR(run.final_iterate[0], 0.395, 1e-12);
  EXPECT_NEAR(run.final_iterate[1], 0.405, 1e-12);
  ASSERT_EQ(run.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(run.rows[0].loss, p.full_value(w0));
}

TEST(SgdMomentum, HeavyBallTraceAndBetaZero) {
  const auto p = half_square();
  RunOptions opts;
  opts.step_scale = StepScale::kSample;
  const auto run = sgdm_run(p, Schedule::custom({0.1, 0.1}), {ShufflingKind::kIncremental, 0}, 0.9,
                            Vector::Ones(1), opts);
  // m1 = g = 1, w1 = 0.9; g = 0.9, m2 = 0.9 * 1 + 0.9 = 1.8, w2 = 0.9 - 0.18.
  EXPECT_NEAR(run.final_iterate[0], 0.72, 1e-15);

  const auto q = random_quadratic_problem(5, 3, 3);
  const auto sched = Schedule::constant(0.3, 6);
  const ShufflingStrategy rr{ShufflingKind::kRandomizedReshuffling, 2};
  const Vector w0 = initial_point(3, 1, 1.0);
  EXPECT_LE(max_abs_diff(sgdm_run(q, sched, rr, 0.0, w0).final_iterate,
                         shuffling_sgd_run(q, sched, rr, w0).final_iterate),
            1e-12);
}

TEST(Adam, FirstStepDescends) {
  const auto p = half_square();
  RunOptions opts;
  opts.step_scale = StepScale::kSample;
  const auto run = adam_run(p, Schedule::custom({0.001}), {ShufflingKind::kIncremental, 0}, 0.9, 0.999,
                            Vector::Ones(1), opts);
  // Bias-corrected m and v equal g and g^2 after one step: w = 1 - lr * g / (|g| + eps).
  EXPECT_LT(run.final_iterate[0], 1.0);
  EXPECT_NEAR(run.final_iterate[0], 1.0 - 0.001 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, ReducesLossOnLogisticToy) {
  const auto data = synth_binary_dataset(32, 5, 7, 0.8);
  LogisticProblem p(data, 0.01, 5);
  RunOptions opts;
  opts.step_scale = StepScale::kSample;
  const auto run = adam_run(p, Schedule::custom(std::vector<double>(20, 0.01)),
                            {ShufflingKind::kRandomizedReshuffling, 0}, 0.9, 0.999, initial_point(5, 0), opts);
  EXPECT_LT(run.final_loss, run.rows.front().loss);
}

TEST(RunEpochs, AllMethodsConsumeTheSamePermutations) {
  const auto p = random_quadratic_problem(6, 2, 5);
  const ShufflingStrategy rr{ShufflingKind::kRandomizedReshuffling, 12};
  std::vector<std::vector<std::size_t>> seen;
  for (auto algo : {Algorithm::kSmg, Algorithm::kSgd, Algorithm::kSgdMomentum, Algorithm::kAdam}) {
    std::vector<std::size_t> order;
    RunOptions opts;
    opts.observer = [&](const StepEvent& e) { order.push_back(e.component); };
    run_epochs(p, Schedule::constant(0.1, 3), rr, {algo, 0.5}, Vector::Zero(2), opts);
    seen.push_back(order);
  }
  for (const auto& s : seen) EXPECT_EQ(s, seen.front());
}

TEST(RunEpochs, RecordContract) {
  const auto p = random_quadratic_problem(8, 3, 4);
  const auto sched = Schedule::cosine(1.0, 12);
  const auto run = smg_run(p, sched, {ShufflingKind::kRandomizedReshuffling, 6}, 0.5, initial_point(3, 6, 1.0));
  ASSERT_EQ(run.rows.size(), 12u);
  ASSERT_EQ(run.snapshots.size(), 12u);
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < 12; ++t) {
    EXPECT_EQ(run.rows[t].epoch, t + 1);
    EXPECT_DOUBLE_EQ(run.rows[t].eta, sched.eta(t + 1));
    EXPECT_DOUBLE_EQ(run.rows[t].loss, p.full_value(run.snapshots[t]));
    EXPECT_DOUBLE_EQ(run.rows[t].grad_norm_sq, p.full_grad(run.snapshots[t]).squaredNorm());
    EXPECT_LE(p.constants().f_lower, run.rows[t].loss);
    num += run.rows[t].eta * run.rows[t].grad_norm_sq;
    den += run.rows[t].eta;
  }
  EXPECT_NEAR(run.weighted_grad_norm_sq(), num / den, 1e-15 * (1.0 + num / den));
  EXPECT_LT(run.selected_index, 11u);  // eta_T = 0 for cosine
  EXPECT_EQ(run.selected_iterate, run.snapshots[run.selected_index]);
}

TEST(RunEpochs, SelectedIterateWithoutSnapshots) {
  const auto p = random_quadratic_problem(5, 2, 4);
  const auto sched = Schedule::constant(0.5, 20);
  const ShufflingStrategy rr{ShufflingKind::kRandomizedReshuffling, 31};
  const auto full = smg_run(p, sched, rr, 0.5, Vector::Zero(2));
  RunOptions lean;
  lean.snapshot_limit = 0;
  const auto thin = smg_run(p, sched, rr, 0.5, Vector::Zero(2), lean);
  EXPECT_FALSE(thin.has_snapshots());
  EXPECT_EQ(thin.selected_index, full.selected_index);
  EXPECT_EQ(thin.selected_iterate, full.selected_iterate);
}

TEST(RunEpochs, BitStableAcrossRepeats) {
  const auto data = synth_binary_dataset(20, 4, 2, 0.7);
  LogisticProblem p(data, 0.01, 4);
  const auto sched = Schedule::exponential(1.0, 0.5, 15);
  const ShufflingStrategy rr{ShufflingKind::kRandomizedReshuffling, 8};
  const auto a = smg_run(p, sched, rr, 0.5, initial_point(4, 8));
  const auto b = smg_run(p, sched, rr, 0.5, initial_point(4, 8));
  for (std::size_t t = 0; t < 15; ++t) {
    EXPECT_EQ(a.rows[t].loss, b.rows[t].loss);
    EXPECT_EQ(a.rows[t].grad_norm_sq, b.rows[t].grad_norm_sq);
  }
  EXPECT_EQ(a.final_iterate, b.final_iterate);
  EXPECT_EQ(a.selected_index, b.selected_index);
}

TEST(RunEpochs, AbortsOnDivergence) {
  const auto p = random_quadratic_problem(4, 2, 1, 4.0);
  try {
    smg_run(p, Schedule::constant(1e6, 400), {ShufflingKind::kIncremental, 0}, 0.0, Vector::Ones(2));
    FAIL() << "expected RunAborted";
  } catch (const RunAborted& e) {
    EXPECT_GE(e.epoch(), 1u);
    EXPECT_LE(e.epoch(), 400u);
  }
}

TEST(RunEpochs, ValidatesInputs) {
  const auto p = random_quadratic_problem(4, 2, 1);
  EXPECT_THROW(smg_run(p, Schedule::constant(0.1, 2), {}, 0.5, Vector::Zero(3)), DimensionMismatch);
  EXPECT_THROW(smg_run(p, Schedule::constant(0.1, 2), {}, 1.0, Vector::Zero(2)), InvalidArgument);
  EXPECT_THROW(smg_run(p, Schedule::constant(0.1, 2), {}, -0.2, Vector::Zero(2)), InvalidArgument);
  EXPECT_THROW(parse_algorithm("lbfgs"), InvalidArgument);
  EXPECT_EQ(parse_algorithm("sgd-m"), Algorithm::kSgdMomentum);
}

TEST(RunEpochs, SmgDecreasesLossOnLogisticToy) {
  const auto data = synth_binary_dataset(32, 5, 7, 0.8);
  LogisticProblem p(data, 0.01, 5);
  EXPECT_TRUE(std::isfinite(p.constants().L));
  EXPECT_TRUE(std::isfinite(*p.constants().G));
  const auto run = smg_run(p, Schedule::constant(4.0, 64), {ShufflingKind::kRandomizedReshuffling, 0}, 0.5,
                           initial_point(5, 0));
  EXPECT_LT(run.final_loss, run.rows.front().loss);
}

}  // namespace
}  // namespace smg

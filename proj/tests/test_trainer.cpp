#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "gpolab/error.hpp"
#include "gpolab/trainer.hpp"

using namespace gpolab;

namespace {

PreferenceDataset generated(int d, double gamma, Eigen::Index n, double eps, std::uint64_t seed,
                            double phi = std::numbers::pi / 3) {
  PreferencePairConfig c;
  c.d = d;
  c.gamma = gamma;
  c.phi = phi;
  c.n = n;
  RandomStream rng(seed);
  PreferenceDataset ds = generate_clean(c, rng);
  return apply_mislabel(std::move(ds), eps, rng);
}

}  // namespace

TEST_CASE("config validation") {
  TrainConfig c;
  c.epochs = 0;
  CHECK_THROWS(c.validate());
  c.epochs = 1;
  c.stop_rule = StopRule::BoundaryBudget;
  c.delta = 1.0;
  CHECK_THROWS(c.validate());
  c.delta = 0.1;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = -1;
  CHECK_THROWS(c.validate());
}

TEST_CASE("zero learning rate leaves the model unchanged") {
  const PreferenceDataset ds = generated(16, 1, 40, 0.1, 1);
  TrainConfig c;
  c.learning_rate = 0.0;
  c.epochs = 5;
  const TrainResult r = train(ds, c);
  CHECK(r.model.w.isZero());
  CHECK(r.trace.steps() == 5);
  CHECK(r.trace.loss.size() == 6);
  for (double l : r.trace.loss) CHECK(l == r.trace.loss.front());
  for (double m : r.trace.probe_margin) CHECK(m == 0.0);
}

TEST_CASE("clean separable training decreases the loss every step") {
  const PreferenceDataset ds = generated(512, 2, 2000, 0.0, 2);
  TrainConfig c;
  c.loss = GpoLoss{LossKind::Dpo, 0.1};
  c.learning_rate = stable_learning_rate(ds, c.loss);
  c.epochs = 10;
  const TrainResult r = train(ds, c);
  for (std::size_t i = 1; i < r.trace.loss.size(); ++i) CHECK(r.trace.loss[i] < r.trace.loss[i - 1]);
}

TEST_CASE("first step from zero is -2 eta beta f'(0) mean(s x)") {
  for (LossKind k : {LossKind::Dpo, LossKind::Ipo, LossKind::Slic}) {
    const PreferenceDataset ds = generated(32, 0.5, 100, 0.2, 3);
    TrainConfig c;
    c.loss = GpoLoss{k, 0.3};
    c.learning_rate = 0.7;
    c.epochs = 1;
    const TrainResult r = train(ds, c);
    Vec mean = Vec::Zero(32);
    for (Eigen::Index i = 0; i < ds.size(); ++i) mean += ds.noisy[i] * ds.x.row(i).transpose();
    mean /= static_cast<double>(ds.size());
    const Vec expected = -2.0 * 0.7 * 0.3 * f_prime(c.loss, 0.0) * mean;
    CHECK((r.model.w - expected).norm() <= 1e-14 * expected.norm());
    CHECK(first_step_direction(ds, c.loss).isApprox(-0.3 * f_prime(c.loss, 0.0) * mean, 1e-14));
  }
}

TEST_CASE("training is deterministic") {
  const PreferenceDataset ds = generated(64, 1, 200, 0.3, 4);
  TrainConfig c;
  c.learning_rate = 5.0;
  c.epochs = 7;
  CHECK(train(ds, c).model.w == train(ds, c).model.w);
}

TEST_CASE("divergence guard") {
  const PreferenceDataset ds = generated(16, 1, 40, 0.0, 5);
  TrainConfig c;
  c.loss = GpoLoss{LossKind::Ipo, 1.0};
  c.learning_rate = 1e4;
  c.epochs = 10;
  CHECK_THROWS_AS(train(ds, c), DivergenceError);
}

TEST_CASE("stable learning rate keeps descent monotone") {
  for (LossKind k : {LossKind::Dpo, LossKind::Ipo}) {
    const PreferenceDataset ds = generated(64, 0.5, 400, 0.2, 6);
    TrainConfig c;
    c.loss = GpoLoss{k, 0.5};
    c.learning_rate = stable_learning_rate(ds, c.loss);
    c.epochs = 30;
    const TrainResult r = train(ds, c);
    for (std::size_t i = 1; i < r.trace.loss.size(); ++i) CHECK(r.trace.loss[i] <= r.trace.loss[i - 1] + 1e-15);
  }
}

TEST_CASE("power iteration agrees with a dense eigen solve") {
  const PreferenceDataset ds = generated(32, 1.0, 300, 0.0, 7);
  const Eigen::MatrixXd m = ds.x.transpose() * ds.x / 300.0;
  const double ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().maxCoeff();
  CHECK(second_moment_top_eigenvalue(ds.x, 500, 1e-14) == doctest::Approx(ref).epsilon(1e-9));
  CHECK(second_moment_top_eigenvalue(ds.x) == doctest::Approx(ref).epsilon(1e-3));
}

TEST_CASE("margin dynamics") {
  const double beta = 0.4;
  SUBCASE("single cluster of identical points") {
    PreferenceDataset ds;
    ds.x = EmbeddingMatrix::Zero(5, 4);
    ds.x.col(2).setOnes();
    ds.clean = SignVector::Ones(5);
    ds.noisy = ds.clean;
    for (LossKind k : {LossKind::Dpo, LossKind::Ipo, LossKind::Slic}) {
      const GpoLoss loss{k, beta};
      const double v = margin_dynamics_step(ds, LinearPreferenceModel::zero(4, beta), loss, ds.x.row(0).transpose(), 1);
      CHECK(v == doctest::Approx(-2.0 * beta * beta * f_prime(loss, 0.0)));
      CHECK(v > 0.0);
    }
  }

  SUBCASE("invariant under flipping every orientation") {
    PreferenceDataset ds = generated(16, 1, 30, 0.2, 8);
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd;
    LinearPreferenceModel m{Vec(16), beta};
    for (int k = 0; k < 16; ++k) m.w[k] = nd(gen);
    const GpoLoss loss{LossKind::Dpo, beta};
    const Vec probe = ds.x.row(3).transpose();
    const double a = margin_dynamics_step(ds, m, loss, probe, ds.noisy[3]);
    ds.noisy = -ds.noisy;
    const double b = margin_dynamics_step(ds, LinearPreferenceModel{-m.w, beta}, loss, probe, ds.noisy[3]);
    CHECK(a == doctest::Approx(b).epsilon(1e-13));
  }

  SUBCASE("one step divided by eta equals the velocity at the start") {
    const PreferenceDataset ds = generated(16, 1, 20, 0.2, 9);
    LinearPreferenceModel m{Vec::Constant(16, 0.3), beta};
    const GpoLoss loss{LossKind::Ipo, beta};
    for (double eta : {1e-3, 1e-4}) {
      const LinearPreferenceModel next = gradient_step(m, ds, loss, eta);
      const Vec x = ds.x.row(0).transpose();
      const double dr = (reward_margin(next, x, ds.noisy[0]) - reward_margin(m, x, ds.noisy[0])) / eta;
      CHECK(std::abs(dr - margin_dynamics_step(ds, m, loss, x, ds.noisy[0])) <= 10 * eta);
    }
  }

  CHECK_THROWS(margin_dynamics_step(generated(16, 1, 20, 0.0, 1), LinearPreferenceModel::zero(16, 0.1), GpoLoss{},
                                    Vec(Vec::Ones(3)), 1));
}

TEST_CASE("dynamics consistency over a trace") {
  const PreferenceDataset ds = generated(16, 1, 20, 0.1, 10);
  const GpoLoss loss{LossKind::Dpo, 1.0};
  const double eta = 1e-4;
  LinearPreferenceModel m{Vec::Constant(16, 0.5), 1.0};
  const Vec x = ds.x.row(2).transpose();
  const int s = ds.noisy[2];
  const double r0 = reward_margin(m, x, s);
  double integral = 0.0;
  for (int step = 0; step < 1000; ++step) {
    const LinearPreferenceModel next = gradient_step(m, ds, loss, eta);
    // Trapezoid in flow time; one step is one unit.
    integral += eta * 0.5 * (margin_dynamics_step(ds, m, loss, x, s) + margin_dynamics_step(ds, next, loss, x, s));
    m = next;
  }
  const double change = reward_margin(m, x, s) - r0;
  CHECK(std::abs(change - integral) <= 0.01 * std::abs(change));
}

TEST_CASE("boundary time") {
  CHECK(boundary_time(0.1, 1.0, 0.1, 0.25) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(boundary_time(0.2, 1.0, 0.1, 0.25) == doctest::Approx(2 * boundary_time(0.1, 1.0, 0.1, 0.25)));
  CHECK(boundary_time(0.1, 3.0, 0.1, 0.25) == doctest::Approx(3 * boundary_time(0.1, 1.0, 0.1, 0.25)));
  const GpoLoss slic{LossKind::Slic, 0.2};
  CHECK(boundary_time(0.1, 4.0, 0.2, slic.curvature_bound()) == doctest::Approx(0.1 * 4.0 / (2 * 0.2)));
  CHECK_THROWS(boundary_time(0.0, 1, 1, 1));
  CHECK_THROWS(boundary_time(1.0, 1, 1, 1));
  CHECK_THROWS(boundary_time(0.1, 0, 1, 1));
  CHECK(boundary_steps(0.1, 0.1, GpoLoss{LossKind::Dpo, 0.1}) == 100);
}

TEST_CASE("boundary angle") {
  const Vec a = Vec::LinSpaced(5, 1, 5);
  CHECK(boundary_angle(a, a) == 0.0);
  CHECK(boundary_angle(a, Vec(-a)) == doctest::Approx(std::numbers::pi));
  CHECK(boundary_angle(a, Vec(3 * a)) == 0.0);
  Vec b = Vec::Zero(5);
  b[0] = 1;
  Vec c = Vec::Zero(5);
  c[1] = 1;
  CHECK(boundary_angle(b, c) == doctest::Approx(std::numbers::pi / 2));
  CHECK_THROWS(boundary_angle(a, Vec(Vec::Zero(5))));
}

TEST_CASE("boundary budget keeps the weight direction") {
  for (int trial = 0; trial < 10; ++trial) {
    const PreferenceDataset ds = generated(128, 1.0, 500, 0.2, 100 + trial);
    for (LossKind k : {LossKind::Dpo, LossKind::Slic}) {
      TrainConfig c;
      c.loss = GpoLoss{k, 0.1};
      c.learning_rate = 0.1;
      c.stop_rule = StopRule::BoundaryBudget;
      c.delta = 0.1;
      const TrainResult r = train(ds, c);
      CHECK(r.trace.steps() == boundary_steps(0.1, 0.1, c.loss));
      const double angle = boundary_angle(first_step_direction(ds, c.loss), r.model.w);
      CHECK(angle <= std::asin(0.1) + 0.01);
      if (k == LossKind::Slic) CHECK(angle <= 1e-6);
      CHECK(r.warnings.empty());
    }
  }
}

TEST_CASE("non-unit embeddings warn under the boundary budget") {
  PreferenceDataset ds = generated(16, 1, 20, 0.0, 11);
  ds.x *= 3.0;
  TrainConfig c;
  c.learning_rate = 1.0;
  c.stop_rule = StopRule::BoundaryBudget;
  CHECK(train(ds, c).warnings.size() == 1);
}

TEST_CASE("trace CSV") {
  const PreferenceDataset ds = generated(16, 1, 20, 0.0, 12);
  TrainConfig c;
  c.learning_rate = 1.0;
  c.epochs = 3;
  const TrainResult r = train(ds, c);
  const auto path = std::filesystem::temp_directory_path() / "gpolab_trace_test.csv";
  write_trace_csv(path, r.trace);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,loss,probe_margin");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
  std::filesystem::remove(path);
}

#include <doctest.h>

#include <cmath>

#include "gpolab/vmf.hpp"
#include "oracles.hpp"

using namespace gpolab;

namespace {

Vec e1(int d) {
  Vec v = Vec::Zero(d);
  v[0] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("VmfParams validates and derives gamma") {
  CHECK_THROWS(VmfParams(Vec::Ones(3), 1.0));
  CHECK_THROWS(VmfParams(e1(2), 1.0));
  CHECK_THROWS(VmfParams(e1(8), -1.0));
  const VmfParams p = VmfParams::from_gamma(e1(512), 1.0);
  CHECK(p.kappa() == 256.0);
  CHECK(p.gamma() == 1.0);
  CHECK(p.dim() == 512);
}

TEST_CASE("radial log density") {
  const VmfParams p = VmfParams::from_gamma(e1(512), 1.0);
  CHECK(radial_log_density(0.0, p) == 0.0);
  CHECK(std::isinf(radial_log_density(1.0, p)));
  CHECK(std::isinf(radial_log_density(-1.0, p)));
  for (double t : {-0.9, -0.1, 0.3, 0.99}) CHECK(radial_log_density(t, 3.7, 3) == 3.7 * t);

  SUBCASE("maximizer equals t_zero") {
    for (double g : {0.125, 0.5, 1.0, 2.0}) {
      for (int d : {16, 64, 512}) {
        const double kappa = g * d / 2.0;
        const double t = oracle::golden_max([&](double x) { return radial_log_density(x, kappa, d); }, -1.0 + 1e-12,
                                            1.0 - 1e-12);
        CHECK(t == doctest::Approx(t_zero(g, d)).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("t_gamma") {
  CHECK(t_gamma(1.0) == doctest::Approx(0.41421356237309505).epsilon(1e-12));
  CHECK_THROWS(t_gamma(0.0));
  CHECK_THROWS(t_gamma(-1.0));
  CHECK(t_gamma(1e-12) == doctest::Approx(5e-13).epsilon(1e-9));
  CHECK(t_gamma(1e-300) > 0.0);
  CHECK(t_gamma(1e12) == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(t_gamma(INFINITY) == 1.0);
}

TEST_CASE("t_zero") {
  CHECK(t_zero(2.0, 64) == doctest::Approx(0.6311882916522786).epsilon(1e-12));
  CHECK(t_zero(1.0, 512) == doctest::Approx(0.41593582054307432).epsilon(1e-12));
  CHECK_THROWS(t_zero(0.0, 64));
  CHECK_THROWS(t_zero(1.0, 2));
  CHECK(std::abs(t_zero(1.0, 100000000) - t_gamma(1.0)) < 1e-7);

  SUBCASE("stationarity and lower bound over a grid") {
    for (double g : {1e-6, 0.01, 0.125, 0.5, 1.0, 2.0, 10.0, 1e4}) {
      for (int d : {4, 64, 512, 4096}) {
        const double t = t_zero(g, d);
        CHECK(t > 0.0);
        CHECK(t < 1.0);
        const double a = 1.0 - 3.0 / d;
        CHECK(std::abs(g / 2.0 - a * t / (1.0 - t * t)) <= 1e-10 * std::max(1.0, g));
        CHECK(t >= g / (2.0 + g) - 1e-15);
      }
    }
  }
}

TEST_CASE("sample_vmf basic contracts") {
  RandomStream rng(7);
  CHECK_THROWS(sample_vmf(VmfParams(e1(8), 1.0), 0, rng));
  const EmbeddingMatrix x = sample_vmf(VmfParams(e1(8), 1e6), 100, rng);
  CHECK(rows_unit_norm(x));
  CHECK((x.col(0).array() > 0.999).all());

  const int n = 20000;
  const EmbeddingMatrix u = sample_vmf(VmfParams(e1(64), 0.0), n, rng);
  CHECK(std::abs(u.col(0).mean()) < 3.0 / std::sqrt(n) * 1.0);
}

TEST_CASE("sample_vmf radial mean matches quadrature") {
  RandomStream rng(11);
  const int d = 512, n = 100000;
  const VmfParams p = VmfParams::from_gamma(e1(d), 1.0);
  const EmbeddingMatrix x = sample_vmf(p, n, rng);
  const double mean = x.col(0).mean();
  const auto [z, ref] = oracle::radial_mass_and_mean(p.kappa(), d);
  CHECK(z > 0.0);
  CHECK(ref == doctest::Approx(0.41438100772215813).epsilon(1e-9));
  CHECK(std::abs(mean - ref) < 0.005);

  SUBCASE("mean radial component is above t_gamma") {
    Vec t = x.col(0);
    const double se = std::sqrt((t.array() - mean).square().sum() / (n - 1.0) / n);
    CHECK(mean >= t_gamma(1.0) - 3.0 * se);
  }

  SUBCASE("tangential isotropy") {
    // Off-diagonal covariance of tangent coordinates 1..8.
    const Eigen::MatrixXd tang = x.middleCols(1, 8);
    const Eigen::MatrixXd centered = tang.rowwise() - tang.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / (n - 1.0);
    // Rescale to the unit tangent sphere, whose coordinates have variance 1/(d-1).
    const double scale = (d - 1.0) / (1.0 - (x.col(0).array().square().mean()));
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < i; ++j) CHECK(std::abs(cov(i, j) * scale) < 5.0 / std::sqrt(n));
    }
  }
}

TEST_CASE("Wood radial sampler passes KS against quadrature CDF") {
  for (double g : {0.125, 0.5, 2.0}) {
    for (int d : {64, 512}) {
      RandomStream rng(100 + d + static_cast<int>(8 * g));
      std::vector<double> t(100000);
      const double kappa = g * d / 2.0;
      for (double& v : t) v = sample_radial(kappa, d, rng);
      CHECK(oracle::radial_ks(t, kappa, d) < 0.01);
    }
  }
}

TEST_CASE("projected sampler matches materialized projections") {
  RandomStream rng(3);
  const int d = 64;
  Vec mu = Vec::Zero(d);
  mu[0] = std::cos(0.4);
  mu[1] = std::sin(0.4);
  const VmfParams p = VmfParams::from_gamma(mu, 0.5);
  Vec a(d);
  for (int k = 0; k < d; ++k) a[k] = rng.normal();
  const Vec proj = sample_projection(p, a, 20000, rng);
  const Vec full = sample_vmf(p, 20000, rng) * a;
  const double ks = oracle::ks_two_sample({proj.data(), proj.data() + proj.size()}, {full.data(), full.data() + full.size()});
  // Two-sample critical value at alpha = 0.001: 1.95 sqrt(2/n).
  CHECK(ks < 1.95 * std::sqrt(2.0 / 20000));
  CHECK(sample_projection(p, Vec::Zero(d), 10, rng).isZero());
}

TEST_CASE("sampling is deterministic per stream") {
  RandomStream a(42), b(42);
  const VmfParams p = VmfParams::from_gamma(e1(32), 1.0);
  CHECK(sample_vmf(p, 50, a) == sample_vmf(p, 50, b));
}

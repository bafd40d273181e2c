#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpolab/error.hpp"
#include "gpolab/geometry.hpp"

using namespace gpolab;

namespace {

PreferenceDataset clusters(int d, double gamma, double phi, Eigen::Index n, std::uint64_t seed) {
  PreferencePairConfig c;
  c.d = d;
  c.gamma = gamma;
  c.phi = phi;
  c.n = n;
  RandomStream rng(seed);
  return generate_clean(c, rng);
}

GeometryProfile synthetic(double gamma, double phi) {
  GeometryProfile p;
  p.d = 512;
  p.gamma_hat = gamma;
  p.kappa_hat = gamma * 256;
  p.phi_hat = phi;
  return p;
}

}  // namespace

TEST_CASE("kappa estimate") {
  CHECK(estimate_kappa(0.0, 512) == 0.0);
  CHECK(std::isinf(estimate_kappa(1.0, 512)));
  // Mean resultant length of vMF(kappa = 256) on S^511 maps back to kappa.
  CHECK(estimate_kappa(0.41438100772215813, 512) == doctest::Approx(256).epsilon(0.01));
  CHECK_THROWS(estimate_kappa(-0.1, 4));
}

TEST_CASE("profile recovers generator parameters") {
  const PreferenceDataset ds = clusters(512, 1.0, 1.2, 20000, 1);
  const GeometryProfile p = profile(ds.x, ds.clean);
  CHECK(p.n_pos == 10000);
  CHECK(p.n_neg == 10000);
  CHECK(p.avg_norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.norm_variance < 1e-20);
  CHECK(p.gamma_hat == doctest::Approx(1.0).epsilon(0.1));
  CHECK(std::abs(p.phi_hat - 1.2) <= 0.02);
  CHECK(p.avg_cosine_to_class_mean == doctest::Approx(0.41438100772215813).epsilon(0.02));
  CHECK(p.cosine_variance > 0.0);
}

TEST_CASE("profile invariances") {
  const PreferenceDataset ds = clusters(64, 2.0, 1.0, 400, 2);
  const GeometryProfile p = profile(ds.x, ds.clean);

  EmbeddingMatrix scaled = ds.x;
  for (Eigen::Index i = 0; i < scaled.rows(); ++i) scaled.row(i) *= 1.0 + 0.01 * i;
  const GeometryProfile s = profile(scaled, ds.clean);
  CHECK(s.gamma_hat == doctest::Approx(p.gamma_hat).epsilon(1e-12));
  CHECK(s.phi_hat == doctest::Approx(p.phi_hat).epsilon(1e-12));
  CHECK(s.avg_cosine_to_class_mean == doctest::Approx(p.avg_cosine_to_class_mean).epsilon(1e-12));
  CHECK(s.norm_variance > 0.0);
  CHECK(s.norm_std == doctest::Approx(std::sqrt(s.norm_variance)));

  EmbeddingMatrix reversed = ds.x.colwise().reverse();
  SignVector rlabels = ds.clean.reverse();
  const GeometryProfile r = profile(reversed, rlabels);
  CHECK(r.gamma_hat == doctest::Approx(p.gamma_hat).epsilon(1e-12));
  CHECK(r.phi_hat == doctest::Approx(p.phi_hat).epsilon(1e-12));
}

TEST_CASE("degenerate antipodal classes") {
  EmbeddingMatrix x = EmbeddingMatrix::Zero(6, 64);
  SignVector l(6);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = i % 2 ? 2.0 : -3.0;
    l[i] = i % 2 ? 1 : -1;
  }
  const GeometryProfile p = profile(x, l);
  CHECK(std::isinf(p.kappa_hat));
  CHECK(std::isinf(p.gamma_hat));
  CHECK(p.phi_hat == doctest::Approx(std::numbers::pi / 2));
  CHECK(p.avg_cosine_to_class_mean == 1.0);
  CHECK(p.cosine_variance == doctest::Approx(0.0).scale(1));
  const RobustnessVerdict v = robustness_verdict(p, 1e12, 1e-4);
  REQUIRE(v.threshold.value);
  CHECK(*v.threshold.value > 0.45);
}

TEST_CASE("profile errors") {
  EmbeddingMatrix x = EmbeddingMatrix::Ones(4, 8);
  SignVector l = SignVector::Ones(4);
  CHECK_THROWS_AS(profile(x, l), PreconditionError);
  CHECK_THROWS(profile(x, SignVector::Ones(3)));
  l[0] = -1;
  x.row(1).setZero();
  CHECK_THROWS(profile(x, l));
}

TEST_CASE("robustness verdicts") {
  SUBCASE("well separated classes") {
    const RobustnessVerdict v = robustness_verdict(synthetic(2.0, std::numbers::pi / 2), 1e12, 1e-4);
    REQUIRE(v.threshold.value);
    CHECK(*v.threshold.value == doctest::Approx(0.47370162158590607).epsilon(1e-4));
    CHECK(v.verdict.rfind("robust up to eps = 0.4737", 0) == 0);
  }
  SUBCASE("close class means") {
    const RobustnessVerdict v = robustness_verdict(synthetic(2.0, std::numbers::pi / 3), 1e12, 1e-4);
    CHECK_FALSE(v.threshold.value);
    CHECK(v.verdict.find("noise-aware optimization recommended") != std::string::npos);
    CHECK(v.verdict.find("gamma/(5(gamma+2))") != std::string::npos);
  }
  SUBCASE("too few pairs") {
    const RobustnessVerdict v = robustness_verdict(synthetic(2.0, std::numbers::pi / 2), 10, 1e-4);
    CHECK(v.threshold.reason == "N >= 25");
  }
  SUBCASE("vacuous") {
    const RobustnessVerdict v = robustness_verdict(synthetic(2.0, std::numbers::pi / 2), 2000, 1e-4);
    CHECK(v.verdict.rfind("threshold vacuous", 0) == 0);
  }
}

TEST_CASE("published reference statistics") {
  CHECK(kLlamaPersonaReference.avg_norm == 139.6);
  CHECK(kLlamaPersonaReference.norm_variance_as_printed == 0.9635);
  CHECK(kLlamaPersonaReference.avg_cosine == 0.9557);
  CHECK(kLlamaPersonaReference.cosine_variance == 8.963e-5);
}

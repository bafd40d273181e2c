#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gpolab/linalg.hpp"
#include "gpolab/random.hpp"

namespace gpolab {

/// von Mises-Fisher parameters on the (d-1)-sphere.
///
/// The concentration is stored once; the normalized concentration
/// gamma = 2 kappa / d is always derived from it.
class VmfParams {
 public:
  VmfParams(Vec mu, double kappa);

  static VmfParams from_gamma(Vec mu, double gamma);

  const Vec& mu() const { return mu_; }
  double kappa() const { return kappa_; }
  int dim() const { return static_cast<int>(mu_.size()); }
  double gamma() const { return 2.0 * kappa_ / dim(); }

 private:
  Vec mu_;
  double kappa_;
};

/// Unnormalized log density of the radial component t = mu^T x:
/// kappa t + ((d-3)/2) log(1 - t^2).
template <typename Scalar>
Scalar radial_log_density(Scalar t, Scalar kappa, int d) {
  if (d == 3) return kappa * t;
  const Scalar one_minus_t2 = (Scalar(1) - t) * (Scalar(1) + t);
  if (one_minus_t2 <= Scalar(0)) return -std::numeric_limits<Scalar>::infinity();
  return kappa * t + Scalar(d - 3) / Scalar(2) * std::log(one_minus_t2);
}

inline double radial_log_density(double t, const VmfParams& params) {
  return radial_log_density(t, params.kappa(), params.dim());
}

/// Lower bound on the mean radial component, (sqrt(1 + gamma^2) - 1) / gamma.
template <typename Scalar>
Scalar t_gamma(Scalar gamma) {
  if (!(gamma > Scalar(0))) throw std::domain_error("t_gamma: gamma must be > 0");
  if (std::isinf(gamma)) return Scalar(1);
  // Rationalized form; no cancellation as gamma -> 0.
  return gamma / (std::sqrt(Scalar(1) + gamma * gamma) + Scalar(1));
}

/// Mode of the radial density,
/// (sqrt(gamma^2 + (1 - 3/d)^2) - (1 - 3/d)) / gamma.
template <typename Scalar>
Scalar t_zero(Scalar gamma, int d) {
  if (!(gamma > Scalar(0))) throw std::domain_error("t_zero: gamma must be > 0");
  if (d < 3) throw std::domain_error("t_zero: d must be >= 3");
  if (std::isinf(gamma)) return Scalar(1);
  const Scalar a = Scalar(1) - Scalar(3) / Scalar(d);
  return gamma / (std::sqrt(gamma * gamma + a * a) + a);
}

/// One radial draw t in [-1, 1] with density proportional to
/// exp(kappa t) (1 - t^2)^((d-3)/2), by Wood's rejection scheme.
double sample_radial(double kappa, int d, RandomStream& rng);

/// First coordinate of a uniform point on the unit sphere in R^m.
double sample_sphere_coordinate(int m, RandomStream& rng);

/// Fills every row of `out` with an independent vMF draw.
void sample_vmf_into(const VmfParams& params, Eigen::Ref<EmbeddingMatrix> out, RandomStream& rng);

EmbeddingMatrix sample_vmf(const VmfParams& params, Eigen::Index n, RandomStream& rng);

/// Exact draws of direction^T x for x ~ vMF(mu, kappa) without
/// materializing x: t mu^T a + sqrt(1 - t^2) |a_perp| u.
Vec sample_projection(const VmfParams& params, const Vec& direction, Eigen::Index n, RandomStream& rng);

}  // namespace gpolab

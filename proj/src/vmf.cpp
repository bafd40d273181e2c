#include "gpolab/vmf.hpp"

#include <string>

namespace gpolab {

VmfParams::VmfParams(Vec mu, double kappa) : mu_(std::move(mu)), kappa_(kappa) {
  if (mu_.size() < 3) throw std::invalid_argument("VmfParams: dimension must be >= 3");
  if (!(kappa_ >= 0.0)) throw std::invalid_argument("VmfParams: kappa must be >= 0");
  if (std::abs(mu_.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("VmfParams: mu must be unit norm, got |mu| = " +
                                std::to_string(mu_.norm()));
  }
}

VmfParams VmfParams::from_gamma(Vec mu, double gamma) {
  const double d = static_cast<double>(mu.size());
  return VmfParams(std::move(mu), gamma * d / 2.0);
}

double sample_radial(double kappa, int d, RandomStream& rng) {
  const double m1 = d - 1.0;
  // b = (-2k + sqrt(4k^2 + (d-1)^2)) / (d-1), written without cancellation.
  const double b = m1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m1 * m1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + m1 * std::log(1.0 - x0 * x0);
  for (;;) {
    const double z = rng.beta(m1 / 2.0, m1 / 2.0);
    const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = rng.uniform();
    if (kappa * w + m1 * std::log(1.0 - x0 * w) - c >= std::log(u)) return w;
  }
}

double sample_sphere_coordinate(int m, RandomStream& rng) {
  // u^2 ~ Beta(1/2, (m-1)/2) with a symmetric sign.
  const double u2 = rng.beta(0.5, (m - 1) / 2.0);
  const double u = std::sqrt(u2);
  return rng.uniform() < 0.5 ? -u : u;
}

void sample_vmf_into(const VmfParams& params, Eigen::Ref<EmbeddingMatrix> out, RandomStream& rng) {
  const int d = params.dim();
  if (out.cols() != d) throw std::invalid_argument("sample_vmf: output width does not match dimension");
  const Vec& mu = params.mu();
  Vec v(d);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double t = sample_radial(params.kappa(), d, rng);
    double vnorm = 0.0;
    do {
      for (int k = 0; k < d; ++k) v[k] = rng.normal();
      v -= v.dot(mu) * mu;
      vnorm = v.norm();
    } while (vnorm == 0.0);
    v /= vnorm;
    auto row = out.row(i);
    row = (t * mu + std::sqrt(std::max(0.0, 1.0 - t * t)) * v).transpose();
    row /= row.norm();
  }
}

EmbeddingMatrix sample_vmf(const VmfParams& params, Eigen::Index n, RandomStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_vmf: n must be >= 1");
  EmbeddingMatrix out(n, params.dim());
  sample_vmf_into(params, out, rng);
  return out;
}

Vec sample_projection(const VmfParams& params, const Vec& direction, Eigen::Index n, RandomStream& rng) {
  const int d = params.dim();
  if (direction.size() != d) throw std::invalid_argument("sample_projection: dimension mismatch");
  const double along = direction.dot(params.mu());
  const double perp = std::sqrt(std::max(0.0, direction.squaredNorm() - along * along));
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = sample_radial(params.kappa(), d, rng);
    const double u = sample_sphere_coordinate(d - 1, rng);
    out[i] = t * along + std::sqrt(std::max(0.0, 1.0 - t * t)) * perp * u;
  }
  return out;
}

}  // namespace gpolab

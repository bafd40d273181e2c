#include "gpolab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gpolab/error.hpp"

namespace gpolab {

double estimate_kappa(double resultant_length, int d) {
  const double r = resultant_length;
  if (!(r >= 0.0)) throw std::domain_error("estimate_kappa: resultant length must be >= 0");
  if (r >= 1.0 - 1e-15) return std::numeric_limits<double>::infinity();
  return r * (d - r * r) / (1.0 - r * r);
}

GeometryProfile profile(const EmbeddingMatrix& embeddings, const SignVector& labels) {
  const Eigen::Index n = embeddings.rows();
  if (labels.size() != n) throw std::invalid_argument("profile: label count does not match row count");
  GeometryProfile p;
  p.d = static_cast<int>(embeddings.cols());

  const Vec norms = embeddings.rowwise().norm();
  if ((norms.array() == 0.0).any()) throw std::invalid_argument("profile: all-zero row has no direction");
  p.avg_norm = norms.mean();
  p.norm_variance = (norms.array() - p.avg_norm).square().mean();
  p.norm_std = std::sqrt(p.norm_variance);

  const EmbeddingMatrix unit = norms.asDiagonal().inverse() * embeddings;
  Vec sum_pos = Vec::Zero(p.d);
  Vec sum_neg = Vec::Zero(p.d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] > 0) {
      sum_pos += unit.row(i).transpose();
      ++p.n_pos;
    } else {
      sum_neg += unit.row(i).transpose();
      ++p.n_neg;
    }
  }
  if (p.n_pos == 0 || p.n_neg == 0) throw PreconditionError("profile: both classes must be nonempty");

  const Vec mean_pos = sum_pos / static_cast<double>(p.n_pos);
  const Vec mean_neg = sum_neg / static_cast<double>(p.n_neg);
  p.resultant_pos = std::min(1.0, mean_pos.norm());
  p.resultant_neg = std::min(1.0, mean_neg.norm());
  const Vec dir_pos = mean_pos.normalized();
  const Vec dir_neg = mean_neg.normalized();

  Vec cosines(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cosines[i] = unit.row(i).dot(labels[i] > 0 ? dir_pos : dir_neg);
  }
  p.avg_cosine_to_class_mean = std::clamp(cosines.mean(), 0.0, 1.0);
  p.cosine_variance = (cosines.array() - cosines.mean()).square().mean();

  const double k_pos = estimate_kappa(p.resultant_pos, p.d);
  const double k_neg = estimate_kappa(p.resultant_neg, p.d);
  p.kappa_hat = (std::isinf(k_pos) || std::isinf(k_neg))
                    ? std::numeric_limits<double>::infinity()
                    : (p.n_pos * k_pos + p.n_neg * k_neg) / static_cast<double>(n);
  p.gamma_hat = 2.0 * p.kappa_hat / p.d;
  p.phi_hat = std::acos(std::clamp(dir_pos.dot(dir_neg), -1.0, 1.0)) / 2.0;
  return p;
}

RobustnessVerdict robustness_verdict(const GeometryProfile& p, double N, double delta) {
  BoundInputs in;
  in.N = N;
  in.d = p.d;
  in.gamma = p.gamma_hat;
  in.phi = p.phi_hat;
  in.delta = delta;
  RobustnessVerdict v;
  std::ostringstream s;
  if (std::isinf(p.gamma_hat)) {
    // Degenerate concentration: evaluate the limit gamma -> inf.
    in.gamma = 1e300;
  }
  v.threshold = noise_threshold(in);
  if (!v.threshold.value) {
    s << "preconditions unsatisfied (" << v.threshold.reason << ") - noise-aware optimization recommended";
  } else if (v.threshold.vacuous) {
    s << "threshold vacuous at N = " << N << " - noise-aware optimization recommended";
  } else {
    s << "robust up to eps = " << *v.threshold.value;
    if (!v.threshold.satisfied()) s << " (outside " << v.threshold.reason << ")";
  }
  v.verdict = s.str();
  return v;
}

}  // namespace gpolab

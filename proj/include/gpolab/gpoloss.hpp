#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "gpolab/linalg.hpp"
#include "gpolab/prefdata.hpp"

namespace gpolab {

enum class LossKind { Dpo, Ipo, Slic };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

/// Convex surrogate f applied to the scaled reward margin.
///   DPO  f(z) = -log sigmoid(z)
///   IPO  f(z) = (z - 1/2)^2
///   SLiC f(z) = max(0, 1 - z)
struct GpoLoss {
  LossKind kind = LossKind::Dpo;
  double beta = 0.1;

  /// D = sup |f''|: 1/4, 2, and the hinge convention 1/(2 beta).
  double curvature_bound() const {
    switch (kind) {
      case LossKind::Dpo: return 0.25;
      case LossKind::Ipo: return 2.0;
      case LossKind::Slic: return 1.0 / (2.0 * beta);
    }
    return 0.0;
  }
};

template <typename Scalar>
Scalar f_value(const GpoLoss& loss, Scalar z) {
  using std::exp;
  using std::log1p;
  switch (loss.kind) {
    case LossKind::Dpo:
      // softplus(-z), stable on both tails
      return z > Scalar(0) ? log1p(exp(-z)) : -z + log1p(exp(z));
    case LossKind::Ipo: {
      const Scalar e = z - Scalar(0.5);
      return e * e;
    }
    case LossKind::Slic:
      return z < Scalar(1) ? Scalar(1) - z : Scalar(0);
  }
  return Scalar(0);
}

/// Derivative of f. The SLiC subgradient at the kink z = 1 is 0.
template <typename Scalar>
Scalar f_prime(const GpoLoss& loss, Scalar z) {
  switch (loss.kind) {
    case LossKind::Dpo: return -sigmoid(-z);
    case LossKind::Ipo: return Scalar(2) * (z - Scalar(0.5));
    case LossKind::Slic: return z < Scalar(1) ? Scalar(-1) : Scalar(0);
  }
  return Scalar(0);
}

/// Two-token linear head. w is the difference of the two output rows of
/// Delta W = W - W0, so the margin of (x, s) is beta s w^T x.
struct LinearPreferenceModel {
  Vec w;
  double beta = 0.1;

  static LinearPreferenceModel zero(int d, double beta) { return {Vec::Zero(d), beta}; }
  int dim() const { return static_cast<int>(w.size()); }
};

template <typename Derived>
double reward_margin(const LinearPreferenceModel& model, const Eigen::MatrixBase<Derived>& x, int orientation) {
  if (x.size() != model.w.size()) throw std::invalid_argument("reward_margin: dimension mismatch");
  return model.beta * orientation * model.w.dot(x.derived().template cast<double>());
}

/// Margins beta s_i w^T x_i for every row, using clean or noisy orientations.
Vec reward_margins(const LinearPreferenceModel& model, const EmbeddingMatrix& x, const SignVector& orientation);

struct LossAndGradient {
  double loss = 0.0;
  Vec gradient;  // with respect to w
};

/// Mean of f(r_i) over the noisy orientations and its gradient
/// (1/N) sum f'(r_i) beta s_i x_i.
LossAndGradient batch_loss_and_gradient(const GpoLoss& loss, const LinearPreferenceModel& model,
                                        const PreferenceDataset& ds);

}  // namespace gpolab

#include "gpolab/gpoloss.hpp"

#include "gpolab/error.hpp"

namespace gpolab {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Dpo: return "dpo";
    case LossKind::Ipo: return "ipo";
    case LossKind::Slic: return "slic";
  }
  return "dpo";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "dpo") return LossKind::Dpo;
  if (name == "ipo") return LossKind::Ipo;
  if (name == "slic") return LossKind::Slic;
  throw ConfigError("unknown loss '" + name + "' (valid: dpo, ipo, slic)");
}

Vec reward_margins(const LinearPreferenceModel& model, const EmbeddingMatrix& x, const SignVector& orientation) {
  if (x.cols() != model.w.size()) throw std::invalid_argument("reward_margins: dimension mismatch");
  if (orientation.size() != x.rows()) throw std::invalid_argument("reward_margins: label count mismatch");
  return model.beta * (x * model.w).cwiseProduct(orientation.cast<double>());
}

LossAndGradient batch_loss_and_gradient(const GpoLoss& loss, const LinearPreferenceModel& model,
                                        const PreferenceDataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("batch_loss_and_gradient: empty dataset");
  if (loss.beta != model.beta) throw std::invalid_argument("batch_loss_and_gradient: loss and model beta differ");
  const Vec r = reward_margins(model, ds.x, ds.noisy);
  const double n = static_cast<double>(ds.size());
  Vec coef(ds.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    total += f_value(loss, r[i]);
    coef[i] = f_prime(loss, r[i]) * model.beta * ds.noisy[i];
  }
  return {total / n, ds.x.transpose() * coef / n};
}

}  // namespace gpolab

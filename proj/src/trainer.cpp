#include "gpolab/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "gpolab/error.hpp"

namespace gpolab {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("TrainConfig: learning rate must be finite and >= 0");
  }
  if (!(loss.beta > 0.0)) throw std::invalid_argument("TrainConfig: beta must be > 0");
  if (stop_rule == StopRule::FixedEpochs && epochs < 1) {
    throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  }
  if (stop_rule == StopRule::BoundaryBudget) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("TrainConfig: delta must lie in (0, 1)");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: boundary budget needs eta > 0");
  }
}

TrainResult train(const PreferenceDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (ds.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (cfg.probe < 0 || cfg.probe >= ds.size()) throw std::invalid_argument("train: probe index out of range");

  TrainResult result{LinearPreferenceModel::zero(ds.dim(), cfg.loss.beta), {}, {}};
  int steps = cfg.epochs;
  if (cfg.stop_rule == StopRule::BoundaryBudget) {
    steps = boundary_steps(cfg.delta, cfg.learning_rate, cfg.loss);
    if (!rows_unit_norm(ds.x, 1e-6)) {
      result.warnings.push_back("boundary budget assumes unit-norm embeddings; rows are not unit norm");
    }
  }

  auto& model = result.model;
  auto& trace = result.trace;
  trace.loss.reserve(static_cast<std::size_t>(steps) + 1);
  trace.probe_margin.reserve(static_cast<std::size_t>(steps) + 1);

  const auto probe_row = ds.x.row(cfg.probe);
  const int probe_sign = ds.noisy[cfg.probe];
  LossAndGradient lg = batch_loss_and_gradient(cfg.loss, model, ds);
  const double initial = lg.loss;
  trace.loss.push_back(lg.loss);
  trace.probe_margin.push_back(reward_margin(model, probe_row, probe_sign));

  for (int step = 0; step < steps; ++step) {
    model.w -= 2.0 * cfg.learning_rate * lg.gradient;
    lg = batch_loss_and_gradient(cfg.loss, model, ds);
    trace.loss.push_back(lg.loss);
    trace.probe_margin.push_back(reward_margin(model, probe_row, probe_sign));
    if (!std::isfinite(lg.loss) || lg.loss > 10.0 * initial) {
      throw DivergenceError("train: loss " + std::to_string(lg.loss) + " exceeded 10x the initial loss " +
                            std::to_string(initial) + " at step " + std::to_string(step + 1));
    }
  }
  return result;
}

LinearPreferenceModel gradient_step(const LinearPreferenceModel& model, const PreferenceDataset& ds,
                                    const GpoLoss& loss, double learning_rate) {
  LinearPreferenceModel next = model;
  next.w -= 2.0 * learning_rate * batch_loss_and_gradient(loss, model, ds).gradient;
  return next;
}

double second_moment_top_eigenvalue(const EmbeddingMatrix& x, int max_iterations, double rel_tol) {
  if (x.rows() == 0) throw std::invalid_argument("second_moment_top_eigenvalue: empty matrix");
  const double n = static_cast<double>(x.rows());
  Vec v = x.colwise().sum().transpose();
  if (v.norm() == 0.0) v = Vec::Ones(x.cols());
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vec next = x.transpose() * (x * v) / n;
    const double est = next.norm();
    if (est == 0.0) return 0.0;
    v = next / est;
    if (std::abs(est - lambda) <= rel_tol * est) return est;
    lambda = est;
  }
  return lambda;
}

double stable_learning_rate(const PreferenceDataset& ds, const GpoLoss& loss, double safety) {
  const double lambda = 2.0 * second_moment_top_eigenvalue(ds.x);
  if (!(lambda > 0.0)) throw PreconditionError("stable_learning_rate: embeddings have zero second moment");
  return safety / (loss.beta * loss.beta * loss.curvature_bound() * lambda);
}

double margin_dynamics_step(const PreferenceDataset& ds, const LinearPreferenceModel& model, const GpoLoss& loss,
                            const Vec& probe_x, int probe_orientation) {
  if (probe_x.size() != ds.dim() || model.w.size() != ds.dim()) {
    throw std::invalid_argument("margin_dynamics_step: dimension mismatch");
  }
  const double beta = model.beta;
  const Vec r = reward_margins(model, ds.x, ds.noisy);
  const Vec gram = ds.x * probe_x;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    sum += f_prime(loss, r[i]) * 2.0 * probe_orientation * ds.noisy[i] * gram[i];
  }
  return -beta * beta * sum / static_cast<double>(ds.size());
}

double boundary_time(double delta, double tau, double beta, double curvature) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("boundary_time: delta must lie in (0, 1)");
  if (!(tau > 0.0) || !(beta > 0.0) || !(curvature > 0.0)) {
    throw std::domain_error("boundary_time: tau, beta and D must be > 0");
  }
  return delta * tau / (4.0 * beta * beta * curvature);
}

int boundary_steps(double delta, double learning_rate, const GpoLoss& loss) {
  const double budget = boundary_time(delta, 1.0 / learning_rate, loss.beta, loss.curvature_bound());
  return static_cast<int>(std::floor(budget * (1.0 + 1e-12)));
}

double boundary_angle(const Vec& before, const Vec& after) {
  const double na = before.norm();
  const double nb = after.norm();
  if (na == 0.0 || nb == 0.0) throw std::domain_error("boundary_angle: zero weight vector has no direction");
  const Vec a = before / na;
  const Vec b = after / nb;
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

Vec first_step_direction(const PreferenceDataset& ds, const GpoLoss& loss) {
  return -batch_loss_and_gradient(loss, LinearPreferenceModel::zero(ds.dim(), loss.beta), ds).gradient;
}

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "step,loss,probe_margin\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.loss.size(); ++i) {
    out << i;
    std::snprintf(buf, sizeof buf, ",%.17g", trace.loss[i]);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.17g", trace.probe_margin[i]);
    out << buf << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace gpolab

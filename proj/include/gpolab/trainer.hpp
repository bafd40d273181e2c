#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gpolab/gpoloss.hpp"
#include "gpolab/prefdata.hpp"

namespace gpolab {

enum class StopRule { FixedEpochs, BoundaryBudget };

struct TrainConfig {
  double learning_rate = 0.1;  // eta; the inverse rate is tau = 1 / eta
  int epochs = 10;             // full-batch steps under FixedEpochs
  GpoLoss loss;
  StopRule stop_rule = StopRule::FixedEpochs;
  double delta = 0.1;          // sine of the boundary angle budget
  Eigen::Index probe = 0;      // training row whose margin is traced

  void validate() const;
};

/// Loss and probe margin at initialization and after every step.
struct TrainTrace {
  std::vector<double> loss;
  std::vector<double> probe_margin;

  int steps() const { return static_cast<int>(loss.size()) - 1; }
};

struct TrainResult {
  LinearPreferenceModel model;
  TrainTrace trace;
  std::vector<std::string> warnings;
};

/// Full-batch gradient descent on both output rows of Delta W from zero.
/// Each row moves by eta times its gradient, so the row difference w
/// moves by 2 eta grad_w; one step is one unit of flow time.
TrainResult train(const PreferenceDataset& ds, const TrainConfig& cfg);

/// One full-batch step from `model`: w - 2 eta grad_w.
LinearPreferenceModel gradient_step(const LinearPreferenceModel& model, const PreferenceDataset& ds,
                                    const GpoLoss& loss, double learning_rate);

/// Largest eigenvalue of (1/N) X^T X by power iteration.
double second_moment_top_eigenvalue(const EmbeddingMatrix& x, int max_iterations = 30, double rel_tol = 1e-4);

/// eta = safety / (beta^2 D lambda), lambda = 2 * top eigenvalue of (1/N) X^T X.
double stable_learning_rate(const PreferenceDataset& ds, const GpoLoss& loss, double safety = 0.5);

/// tau * dr_j/dt = -(1/N) sum_i beta^2 f'(r_i) 2 s_j s_i x_j^T x_i.
double margin_dynamics_step(const PreferenceDataset& ds, const LinearPreferenceModel& model, const GpoLoss& loss,
                            const Vec& probe_x, int probe_orientation);

/// delta tau / (4 beta^2 D).
double boundary_time(double delta, double tau, double beta, double curvature);

/// Number of steps that keeps steps <= boundary_time(delta, 1/eta, beta, D).
int boundary_steps(double delta, double learning_rate, const GpoLoss& loss);

/// Angle between two weight directions in [0, pi].
double boundary_angle(const Vec& before, const Vec& after);

/// Direction of the first update from w = 0: -f'(0) beta (1/N) sum s_i x_i.
Vec first_step_direction(const PreferenceDataset& ds, const GpoLoss& loss);

/// CSV with header step,loss,probe_margin.
void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace);

}  // namespace gpolab

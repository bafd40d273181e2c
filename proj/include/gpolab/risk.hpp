#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpolab/gpoloss.hpp"
#include "gpolab/prefdata.hpp"
#include "gpolab/trainer.hpp"

namespace gpolab {

/// 0-1 risk with ties (margin exactly 0) counted as errors.
struct RiskEstimate {
  double risk = 0.0;
  double accuracy = 0.0;
  Eigen::Index n_test = 0;
  Eigen::Index errors = 0;
  double std_error = 0.0;  // sqrt(p (1 - p) / n_test)
};

RiskEstimate risk_from_margins(const Vec& margins);

/// Risk of the model on a labelled set, against clean orientations by default.
RiskEstimate zero_one_risk(const LinearPreferenceModel& model, const PreferenceDataset& test,
                           bool use_clean_labels = true);

enum class TestSampling { Projected, Materialized };

/// Risk on a fresh clean test set of n_test draws, half per cluster.
/// Projected sampling draws w^T x exactly without building the rows.
RiskEstimate zero_one_risk_fresh(const LinearPreferenceModel& model, const GeneratorMeta& generator,
                                 Eigen::Index n_test, RandomStream& rng,
                                 TestSampling sampling = TestSampling::Projected);

/// Everything one trial needs: generate, corrupt, train, evaluate.
struct TrialSpec {
  PreferencePairConfig data;
  GpoLoss loss;
  std::optional<double> learning_rate;  // empty: stable rule on each training set
  int epochs = 10;
  StopRule stop_rule = StopRule::FixedEpochs;
  double delta = 0.1;
  NoiseKind noise = NoiseKind::Mislabel;
  double epsilon = 0.0;  // flip rate, or the calibration target under Uncertain
  double omega = 0.0;    // temperature used under Uncertain
  Eigen::Index n_test = 2000;
  TestSampling test_sampling = TestSampling::Projected;

  void validate() const;
};

struct TrialOutcome {
  std::uint64_t seed = 0;
  RiskEstimate test;
  double learning_rate = 0.0;
  int steps = 0;
  bool diverged = false;
  std::string message;
};

/// seed xor hash(cell parameter values, trial). Cells are keyed by their
/// values rather than their position, so a cell reruns identically alone.
std::uint64_t trial_seed(std::uint64_t base_seed, const TrialSpec& spec, int trial);

/// Runs one trial on the stream seeded with `seed`. A trainer divergence
/// is recorded in the outcome rather than thrown.
TrialOutcome run_trial(const TrialSpec& spec, std::uint64_t seed);

struct CurvePoint {
  double epsilon = 0.0;
  double mean_accuracy = 0.0;
  double std_error = 0.0;  // standard error of the mean over included trials
  int trials = 0;          // included trials
  int excluded = 0;        // diverged trials

  double mean_risk() const { return 1.0 - mean_accuracy; }
};

/// Mean and standard error over trials, reduced from integer error counts.
CurvePoint aggregate_trials(double epsilon, const std::vector<TrialOutcome>& outcomes);

/// Mean test accuracy over `trials` independent trials at every epsilon.
std::vector<CurvePoint> expected_risk_curve(const TrialSpec& base, const std::vector<double>& eps_grid,
                                            int trials, std::uint64_t seed, int threads = 1);

struct InflectionEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double step = 0.0;
};

/// Central second difference of mean risk at epsilon = 1/2 over the
/// nearest symmetric neighbours, divided by step^2.
InflectionEstimate inflection_diagnostic(const std::vector<CurvePoint>& curve);

}  // namespace gpolab

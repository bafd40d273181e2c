#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gpolab/prefdata.hpp"
#include "gpolab/risk.hpp"

namespace gpolab {

/// Symbols shared by the generalization bounds. N is real so that
/// asymptotic sample sizes such as 1e12 can be evaluated.
struct BoundInputs {
  double N = 2000;
  int d = 512;
  double gamma = 1.0;
  double phi = 1.5707963267948966;
  double delta = 1e-4;  // sine of the largest admissible boundary angle
  double epsilon = 0.0;

  void validate() const;
};

/// Which algebraic form of the threshold denominator to evaluate. The
/// proof form keeps the intermediate 3g/(5(g+2)) - 2B/(d g) - cos(phi) - 2 sqrt(delta)
/// with B = d g^2 / (5(g+2)); both are equal.
enum class ThresholdForm { Statement, Proof };

/// Constants whose existence the theory asserts but whose values it does
/// not give. They are always reported as unspecified.
struct BoundConstants {
  double c = 1.0;  // risk bound prefactor
  double C = 1.0;  // O(1/d) allowance for the uncertain-label threshold
};

struct Precondition {
  std::string name;
  bool holds = false;
  double margin = 0.0;  // positive when satisfied
};

enum class BoundStatus { Satisfied, Unsatisfied };

struct BoundReport {
  std::optional<double> value;
  BoundStatus status = BoundStatus::Unsatisfied;
  std::string reason;  // first violated precondition, verbatim
  std::vector<Precondition> preconditions;
  double probability_floor = 0.0;
  bool vacuous = false;
  std::vector<std::string> unspecified_constants;

  bool satisfied() const { return status == BoundStatus::Satisfied; }
};

double probability_floor(double N, int d);

/// Largest mislabel rate epsilon for which the risk bound holds:
/// 1/2 - (16 / den^2 + 3/2) ((2 + g) / g) sqrt(log N / N),
/// den = g / (5(g + 2)) - cos(phi) - 2 sqrt(delta).
///
/// N >= 25, d >= 64 and den > 0 are required for a value. The angle
/// condition tan(phi) <= sqrt(log N) is checked and reported, but a value
/// is still returned when it alone fails.
BoundReport noise_threshold(const BoundInputs& in, ThresholdForm form = ThresholdForm::Statement);

/// c exp(-d g^2 / (5 (2 + g))).
double risk_bound(int d, double gamma, double c = 1.0);

/// Lower bound on the cosine between the noisy class-mean difference and mu_+ - mu_-:
/// 1 - 5/sqrt(N) - 5 s / ((1 - 2 eps) g / (2 + g) + 2 s), s = sqrt(log N / N).
double concentration_bound(double N, double gamma, double epsilon);
BoundReport concentration_bound_report(double N, int d, double gamma, double epsilon, double phi);

/// noise_threshold minus C / d, for rates induced by label temperature.
/// Throws PreconditionError unless t_zero(gamma, d) > cos(phi).
BoundReport eps_omega_threshold(const BoundInputs& in, const BoundConstants& constants = {},
                                ThresholdForm form = ThresholdForm::Statement);

/// Smallest N >= 25 at which noise_threshold is positive, ignoring the
/// angle condition; empty when den <= 0.
std::optional<double> minimal_sample_size(const BoundInputs& in, ThresholdForm form = ThresholdForm::Statement);

struct CellCheck {
  double epsilon = 0.0;
  double empirical_risk = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct TheoryComparison {
  BoundReport threshold;
  double risk_bound = 0.0;
  std::vector<CellCheck> checks;
  std::optional<double> minimal_N;
  std::string note;

  bool all_pass() const;
};

/// Checks empirical risk <= risk_bound + 3 stderr on every cell whose
/// epsilon lies below a satisfied, non-vacuous threshold.
TheoryComparison compare_theory_experiment(const std::vector<CurvePoint>& curve, const PreferencePairConfig& curve_config,
                                           const BoundInputs& in, const BoundConstants& constants = {});

}  // namespace gpolab

#include "gpolab/bounds.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gpolab/error.hpp"
#include "gpolab/vmf.hpp"

namespace gpolab {

namespace {

const char* kPreN = "N >= 25";
const char* kPreD = "d >= 64";
const char* kPreTan = "0 <= tan(phi) <= sqrt(log N)";
const char* kPreDen = "gamma/(5(gamma+2)) - cos(phi) - 2 sqrt(delta) > 0";
const char* kPreT0 = "t0(gamma, d) > cos(phi)";

double rate(double N) { return std::sqrt(std::log(N) / N); }

double denominator(const BoundInputs& in, ThresholdForm form) {
  const double g = in.gamma;
  if (form == ThresholdForm::Proof) {
    const double b = in.d * g * g / (5.0 * (g + 2.0));
    return 3.0 * g / (5.0 * (g + 2.0)) - 2.0 * b / (in.d * g) - std::cos(in.phi) - 2.0 * std::sqrt(in.delta);
  }
  return g / (5.0 * (g + 2.0)) - std::cos(in.phi) - 2.0 * std::sqrt(in.delta);
}

double threshold_value(const BoundInputs& in, double den) {
  return 0.5 - (16.0 / (den * den) + 1.5) * ((2.0 + in.gamma) / in.gamma) * rate(in.N);
}

std::string constant(const char* name, double v) {
  std::ostringstream os;
  os << name << '=' << v;
  return os.str();
}

void mark_first_violation(BoundReport& r) {
  for (const auto& p : r.preconditions) {
    if (!p.holds) {
      r.status = BoundStatus::Unsatisfied;
      r.reason = p.name;
      return;
    }
  }
  r.status = BoundStatus::Satisfied;
  r.reason.clear();
}

}  // namespace

void BoundInputs::validate() const {
  if (!(N >= 1.0) || !std::isfinite(N)) throw std::domain_error("bounds: N must be finite and >= 1");
  if (d < 3) throw std::domain_error("bounds: d must be >= 3");
  if (!(gamma > 0.0)) throw std::domain_error("bounds: gamma must be > 0");
  if (!(phi >= 0.0 && phi <= std::numbers::pi / 2.0 + 1e-15)) throw std::domain_error("bounds: phi must lie in [0, pi/2]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("bounds: delta must lie in (0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::domain_error("bounds: epsilon must lie in [0, 1]");
}

double probability_floor(double N, int d) {
  const double nd = N * static_cast<double>(d);
  return 1.0 - 4.0 / N - 8.0 / (nd * nd);
}

BoundReport noise_threshold(const BoundInputs& in, ThresholdForm form) {
  in.validate();
  BoundReport r;
  r.probability_floor = probability_floor(in.N, in.d);
  const double den = denominator(in, form);
  const double tan_bound = in.N > 1.0 ? std::sqrt(std::log(in.N)) : 0.0;
  r.preconditions = {
      {kPreN, in.N >= 25.0, in.N - 25.0},
      {kPreD, in.d >= 64, static_cast<double>(in.d - 64)},
      {kPreTan, std::tan(in.phi) <= tan_bound, tan_bound - std::tan(in.phi)},
      {kPreDen, den > 0.0, den},
  };
  mark_first_violation(r);
  if (r.preconditions[0].holds && r.preconditions[1].holds && r.preconditions[3].holds) {
    r.value = threshold_value(in, den);
    r.vacuous = *r.value < 0.0;
  }
  return r;
}

double risk_bound(int d, double gamma, double c) {
  if (d < 64) throw std::domain_error("risk_bound: d must be >= 64");
  if (!(gamma > 0.0)) throw std::domain_error("risk_bound: gamma must be > 0");
  return c * std::exp(-d * gamma * gamma / (5.0 * (2.0 + gamma)));
}

double concentration_bound(double N, double gamma, double epsilon) {
  if (!(N >= 25.0)) throw std::domain_error("concentration_bound: N must be >= 25");
  if (!(gamma > 0.0)) throw std::domain_error("concentration_bound: gamma must be > 0");
  const double s = rate(N);
  return 1.0 - 5.0 / std::sqrt(N) - 5.0 * s / ((1.0 - 2.0 * epsilon) * (gamma / (2.0 + gamma)) + 2.0 * s);
}

BoundReport concentration_bound_report(double N, int d, double gamma, double epsilon, double phi) {
  BoundReport r;
  r.value = concentration_bound(N, gamma, epsilon);
  r.vacuous = *r.value <= -1.0;
  r.probability_floor = probability_floor(N, d);
  const double eps_max = 0.5 - 3.0 * (2.0 + gamma) / (2.0 * gamma) * rate(N);
  const double tan_bound = std::sqrt(std::log(N));
  r.preconditions = {
      {kPreN, true, N - 25.0},
      {kPreTan, std::tan(phi) <= tan_bound, tan_bound - std::tan(phi)},
      {"epsilon <= 1/2 - (3(2+gamma)/(2 gamma)) sqrt(log N / N)", epsilon <= eps_max, eps_max - epsilon},
  };
  mark_first_violation(r);
  return r;
}

BoundReport eps_omega_threshold(const BoundInputs& in, const BoundConstants& constants, ThresholdForm form) {
  in.validate();
  const double t0 = t_zero(in.gamma, in.d);
  if (!(t0 > std::cos(in.phi))) {
    throw PreconditionError(std::string("eps_omega_threshold: requires ") + kPreT0 + ", got t0 = " +
                            std::to_string(t0) + ", cos(phi) = " + std::to_string(std::cos(in.phi)));
  }
  BoundReport r = noise_threshold(in, form);
  r.preconditions.push_back({kPreT0, true, t0 - std::cos(in.phi)});
  if (r.value) {
    r.value = *r.value - constants.C / in.d;
    r.vacuous = *r.value < 0.0;
  }
  r.unspecified_constants.push_back(constant("C", constants.C));
  return r;
}

std::optional<double> minimal_sample_size(const BoundInputs& in, ThresholdForm form) {
  in.validate();
  const double den = denominator(in, form);
  if (!(den > 0.0)) return std::nullopt;
  BoundInputs probe = in;
  auto value_at = [&](double n) {
    probe.N = n;
    return threshold_value(probe, den);
  };
  double lo = 25.0;
  if (value_at(lo) > 0.0) return lo;
  double hi = 50.0;
  while (!(value_at(hi) > 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return std::nullopt;
  }
  // The threshold increases in N above e, so bisect in log N.
  for (int it = 0; it < 200 && hi - lo > 0.5; ++it) {
    const double mid = std::sqrt(lo * hi);
    (value_at(mid) > 0.0 ? hi : lo) = mid;
  }
  const double n = std::ceil(hi);
  return value_at(n - 1.0) > 0.0 ? n - 1.0 : n;
}

bool TheoryComparison::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

TheoryComparison compare_theory_experiment(const std::vector<CurvePoint>& curve, const PreferencePairConfig& curve_config,
                                           const BoundInputs& in, const BoundConstants& constants) {
  if (curve_config.n != static_cast<Eigen::Index>(in.N) || curve_config.d != in.d ||
      std::abs(curve_config.gamma - in.gamma) > 1e-12 || std::abs(curve_config.phi - in.phi) > 1e-12) {
    throw std::invalid_argument("compare_theory_experiment: curve and bound inputs use different (N, d, gamma, phi)");
  }
  TheoryComparison out;
  out.threshold = noise_threshold(in);
  out.risk_bound = risk_bound(in.d, in.gamma, constants.c);
  out.threshold.unspecified_constants.push_back(constant("c", constants.c));

  std::ostringstream note;
  if (!out.threshold.value) {
    note << "preconditions unsatisfied: " << out.threshold.reason << "; zero checks";
  } else if (out.threshold.vacuous) {
    out.minimal_N = minimal_sample_size(in);
    note << "threshold vacuous at this N";
    if (out.minimal_N) note << "; minimal N for a positive threshold = " << *out.minimal_N;
    note << "; zero checks";
  } else {
    for (const auto& p : curve) {
      if (!(p.epsilon <= *out.threshold.value)) continue;
      CellCheck c;
      c.epsilon = p.epsilon;
      c.empirical_risk = p.mean_risk();
      c.std_error = p.std_error;
      c.bound = out.risk_bound;
      c.pass = c.empirical_risk <= c.bound + 3.0 * c.std_error;
      out.checks.push_back(c);
    }
    if (out.checks.empty()) note << "no cells below the threshold " << *out.threshold.value << "; zero checks";
    if (!out.threshold.satisfied()) {
      if (!note.str().empty()) note << "; ";
      note << "precondition not met: " << out.threshold.reason;
    }
  }
  out.note = note.str();
  return out;
}

}  // namespace gpolab

#pragma once

// Independent reference computations for the tests. None of these call
// into the library except for the closed-form density they integrate.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Adaptive Simpson on [a, b] with absolute tolerance tol.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 50) {
  struct R {
    static double step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m);
      const double rm = 0.5 * (m + b);
      const double flm = f(lm);
      const double frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double diff = left + right - whole;
      if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
      return step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
             step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
    }
  };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return R::step(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Radial density of vMF(kappa) in R^d, shifted by its maximum so the
/// exponent never overflows: exp(kappa t + (d-3)/2 log(1-t^2) - peak).
struct RadialDensity {
  double kappa;
  int d;
  double peak;

  RadialDensity(double kappa_, int d_) : kappa(kappa_), d(d_) {
    // Mode of the exponent, solved independently by bisection on its derivative.
    double lo = -1.0 + 1e-15, hi = 1.0 - 1e-15;
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (lo + hi);
      const double g = kappa - (d - 3.0) * m / (1.0 - m * m);
      (g > 0 ? lo : hi) = m;
    }
    peak = log_density(0.5 * (lo + hi));
  }
  double log_density(double t) const {
    const double u = 1.0 - t * t;
    if (u <= 0.0) return -INFINITY;
    return kappa * t + 0.5 * (d - 3.0) * std::log(u);
  }
  double operator()(double t) const { return std::exp(log_density(t) - peak); }
};

/// Normalizing mass and mean of the radial density.
inline std::pair<double, double> radial_mass_and_mean(double kappa, int d, double tol = 1e-10) {
  const RadialDensity p(kappa, d);
  const double z = simpson(p, -1.0, 1.0, tol);
  const double m = simpson([&](double t) { return t * p(t); }, -1.0, 1.0, tol);
  return {z, m / z};
}

/// KS statistic of samples against the quadrature-normalized radial CDF.
/// The CDF is integrated exactly between consecutive sorted samples.
inline double radial_ks(std::vector<double> samples, double kappa, int d) {
  std::sort(samples.begin(), samples.end());
  const RadialDensity p(kappa, d);
  const double z = simpson(p, -1.0, 1.0, 1e-12);
  const double n = static_cast<double>(samples.size());
  double cdf = 0.0, prev = -1.0, ks = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    cdf += simpson(p, prev, samples[i], 1e-13) / z;
    prev = samples[i];
    ks = std::max({ks, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
  }
  return ks;
}

/// Two-sample KS statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double ks = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    ks = std::max(ks, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return ks;
}

/// Golden-section maximization on [a, b].
inline double golden_max(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Central difference of f along coordinate k.
template <typename F, typename V>
double central_difference(F&& f, V x, int k, double h) {
  const double x0 = x[k];
  x[k] = x0 + h;
  const double fp = f(x);
  x[k] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

}  // namespace oracle

#include "gpolab/risk.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "gpolab/error.hpp"
#include "gpolab/parallel.hpp"

namespace gpolab {

namespace {

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v); }

}  // namespace

RiskEstimate risk_from_margins(const Vec& margins) {
  if (margins.size() == 0) throw std::invalid_argument("zero_one_risk: empty test set");
  RiskEstimate est;
  est.n_test = margins.size();
  est.errors = (margins.array() <= 0.0).count();
  const double n = static_cast<double>(est.n_test);
  est.risk = static_cast<double>(est.errors) / n;
  est.accuracy = static_cast<double>(est.n_test - est.errors) / n;
  est.std_error = std::sqrt(est.risk * (1.0 - est.risk) / n);
  return est;
}

RiskEstimate zero_one_risk(const LinearPreferenceModel& model, const PreferenceDataset& test, bool use_clean_labels) {
  if (test.size() == 0) throw std::invalid_argument("zero_one_risk: empty test set");
  return risk_from_margins(reward_margins(model, test.x, use_clean_labels ? test.clean : test.noisy));
}

RiskEstimate zero_one_risk_fresh(const LinearPreferenceModel& model, const GeneratorMeta& generator,
                                 Eigen::Index n_test, RandomStream& rng, TestSampling sampling) {
  if (n_test < 2 || n_test % 2 != 0) throw std::invalid_argument("zero_one_risk_fresh: n_test must be even and >= 2");
  if (model.w.size() != generator.mu_pos.size()) throw std::invalid_argument("zero_one_risk_fresh: dimension mismatch");
  const Eigen::Index half = n_test / 2;
  const VmfParams pos(generator.mu_pos, generator.kappa);
  const VmfParams neg(generator.mu_neg, generator.kappa);
  Vec margins(n_test);
  if (sampling == TestSampling::Projected) {
    margins.head(half) = model.beta * sample_projection(pos, model.w, half, rng);
    margins.tail(half) = -model.beta * sample_projection(neg, model.w, half, rng);
  } else {
    EmbeddingMatrix x(n_test, model.w.size());
    sample_vmf_into(pos, x.topRows(half), rng);
    sample_vmf_into(neg, x.bottomRows(half), rng);
    margins = model.beta * (x * model.w);
    margins.tail(half) = -margins.tail(half);
  }
  return risk_from_margins(margins);
}

void TrialSpec::validate() const {
  data.validate();
  if (!(loss.beta > 0.0)) throw std::invalid_argument("trial: beta must be > 0");
  if (learning_rate && !(*learning_rate >= 0.0)) throw std::invalid_argument("trial: learning rate must be >= 0");
  if (epochs < 1) throw std::invalid_argument("trial: epochs must be >= 1");
  if (n_test < 2 || n_test % 2 != 0) throw std::invalid_argument("trial: n_test must be even and >= 2");
  if (noise == NoiseKind::Mislabel && !(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("trial: epsilon must lie in [0, 1]");
  }
  if (noise == NoiseKind::Uncertain && !(omega >= 0.0)) throw std::invalid_argument("trial: omega must be >= 0");
}

std::uint64_t trial_seed(std::uint64_t base_seed, const TrialSpec& spec, int trial) {
  const std::uint64_t lr = spec.learning_rate ? bits(*spec.learning_rate) : ~std::uint64_t{0};
  return base_seed ^ hash_words({static_cast<std::uint64_t>(spec.data.d), bits(spec.data.gamma), bits(spec.data.phi),
                                 static_cast<std::uint64_t>(spec.data.n), static_cast<std::uint64_t>(spec.loss.kind),
                                 bits(spec.loss.beta), lr, static_cast<std::uint64_t>(spec.epochs),
                                 static_cast<std::uint64_t>(spec.stop_rule), bits(spec.delta),
                                 static_cast<std::uint64_t>(spec.noise), bits(spec.epsilon),
                                 static_cast<std::uint64_t>(spec.n_test), static_cast<std::uint64_t>(trial)});
}

TrialOutcome run_trial(const TrialSpec& spec, std::uint64_t seed) {
  spec.validate();
  TrialOutcome out;
  out.seed = seed;
  RandomStream data_rng = RandomStream::derive(seed, {1});
  RandomStream noise_rng = RandomStream::derive(seed, {2});
  RandomStream test_rng = RandomStream::derive(seed, {3});

  PreferenceDataset ds = generate_clean(spec.data, data_rng);
  switch (spec.noise) {
    case NoiseKind::None: break;
    case NoiseKind::Mislabel: ds = apply_mislabel(std::move(ds), spec.epsilon, noise_rng); break;
    case NoiseKind::Uncertain: ds = apply_uncertain(std::move(ds), spec.omega, noise_rng); break;
  }

  TrainConfig cfg;
  cfg.loss = spec.loss;
  cfg.learning_rate = spec.learning_rate ? *spec.learning_rate : stable_learning_rate(ds, spec.loss);
  cfg.epochs = spec.epochs;
  cfg.stop_rule = spec.stop_rule;
  cfg.delta = spec.delta;
  out.learning_rate = cfg.learning_rate;

  try {
    const TrainResult trained = train(ds, cfg);
    out.steps = trained.trace.steps();
    out.test = zero_one_risk_fresh(trained.model, *ds.generator, spec.n_test, test_rng, spec.test_sampling);
  } catch (const DivergenceError& e) {
    out.diverged = true;
    out.message = e.what();
  }
  return out;
}

CurvePoint aggregate_trials(double epsilon, const std::vector<TrialOutcome>& outcomes) {
  CurvePoint p;
  p.epsilon = epsilon;
  // Exact integer sums keep the reduction independent of trial order.
  __int128 s1 = 0;
  __int128 s2 = 0;
  Eigen::Index n_test = 0;
  for (const auto& o : outcomes) {
    if (o.diverged) {
      ++p.excluded;
      continue;
    }
    if (n_test == 0) n_test = o.test.n_test;
    if (o.test.n_test != n_test) throw std::invalid_argument("aggregate_trials: trials use different n_test");
    const __int128 correct = o.test.n_test - o.test.errors;
    s1 += correct;
    s2 += correct * correct;
    ++p.trials;
  }
  if (p.trials == 0) {
    p.mean_accuracy = std::nan("");
    p.std_error = std::nan("");
    return p;
  }
  const double t = p.trials;
  const double n = static_cast<double>(n_test);
  p.mean_accuracy = static_cast<double>(s1) / (t * n);
  if (p.trials > 1) {
    const double ss = static_cast<double>(s2 * p.trials - s1 * s1) / (t * n * n);  // sum of squared deviations
    p.std_error = std::sqrt(ss / (t - 1.0) / t);
  }
  return p;
}

std::vector<CurvePoint> expected_risk_curve(const TrialSpec& base, const std::vector<double>& eps_grid, int trials,
                                            std::uint64_t seed, int threads) {
  if (trials < 1) throw std::invalid_argument("expected_risk_curve: trials must be >= 1");
  for (double e : eps_grid) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("expected_risk_curve: epsilon grid must lie in [0, 1]");
  }
  base.validate();
  const std::size_t cells = eps_grid.size();
  const std::size_t per_cell = static_cast<std::size_t>(trials);
  std::vector<TrialOutcome> outcomes(cells * per_cell);
  parallel_for(outcomes.size(), threads, [&](std::size_t k) {
    TrialSpec spec = base;
    spec.noise = NoiseKind::Mislabel;
    spec.epsilon = eps_grid[k / per_cell];
    const int trial = static_cast<int>(k % per_cell);
    outcomes[k] = run_trial(spec, trial_seed(seed, spec, trial));
  });
  std::vector<CurvePoint> curve;
  curve.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<TrialOutcome> cell(outcomes.begin() + c * per_cell, outcomes.begin() + (c + 1) * per_cell);
    curve.push_back(aggregate_trials(eps_grid[c], cell));
  }
  return curve;
}

InflectionEstimate inflection_diagnostic(const std::vector<CurvePoint>& curve) {
  constexpr double tol = 1e-9;
  const CurvePoint* mid = nullptr;
  const CurvePoint* lo = nullptr;
  const CurvePoint* hi = nullptr;
  for (const auto& p : curve) {
    const double off = p.epsilon - 0.5;
    if (std::abs(off) <= tol) {
      mid = &p;
    } else if (off < 0.0) {
      if (!lo || p.epsilon > lo->epsilon) lo = &p;
    } else if (!hi || p.epsilon < hi->epsilon) {
      hi = &p;
    }
  }
  if (!mid || !lo || !hi) throw std::invalid_argument("inflection_diagnostic: grid must contain 1/2 and neighbours on both sides");
  const double h = 0.5 - lo->epsilon;
  if (std::abs((hi->epsilon - 0.5) - h) > tol) {
    throw std::invalid_argument("inflection_diagnostic: grid is not symmetric around 1/2");
  }
  InflectionEstimate est;
  est.step = h;
  est.value = (hi->mean_risk() - 2.0 * mid->mean_risk() + lo->mean_risk()) / (h * h);
  est.std_error = std::sqrt(hi->std_error * hi->std_error + 4.0 * mid->std_error * mid->std_error +
                            lo->std_error * lo->std_error) /
                  (h * h);
  return est;
}

}  // namespace gpolab

#include "gpolab/prefdata.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gpolab/embedding_io.hpp"
#include "gpolab/error.hpp"

namespace gpolab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(const std::string& s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  return std::stod(s);
}

}  // namespace

void PreferencePairConfig::validate() const {
  if (d < 3) throw std::invalid_argument("PreferencePairConfig: d must be >= 3");
  if (!(gamma >= 0.0)) throw std::invalid_argument("PreferencePairConfig: gamma must be >= 0");
  if (!(phi > 0.0 && phi <= M_PI / 2 + 1e-15)) {
    throw std::invalid_argument("PreferencePairConfig: phi must lie in (0, pi/2]");
  }
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("PreferencePairConfig: n must be even and >= 2");
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::Mislabel: return "mislabel";
    case NoiseKind::Uncertain: return "uncertain";
  }
  return "none";
}

ClassMeans class_means(int d, double phi) {
  ClassMeans m{Vec::Zero(d), Vec::Zero(d)};
  m.pos[0] = m.neg[0] = std::cos(phi);
  m.pos[1] = std::sin(phi);
  m.neg[1] = -std::sin(phi);
  return m;
}

PreferenceDataset generate_clean(const PreferencePairConfig& config, RandomStream& rng) {
  config.validate();
  const ClassMeans means = class_means(config.d, config.phi);
  const Eigen::Index half = config.n / 2;

  PreferenceDataset ds;
  ds.x.resize(config.n, config.d);
  sample_vmf_into(VmfParams(means.pos, config.kappa()), ds.x.topRows(half), rng);
  sample_vmf_into(VmfParams(means.neg, config.kappa()), ds.x.bottomRows(half), rng);
  ds.clean.resize(config.n);
  ds.clean.head(half).setConstant(1);
  ds.clean.tail(half).setConstant(-1);
  ds.noisy = ds.clean;
  ds.generator = GeneratorMeta{means.pos, means.neg, config.kappa(), config.gamma, config.phi};
  return ds;
}

PreferenceDataset apply_mislabel(PreferenceDataset ds, double epsilon, RandomStream& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("apply_mislabel: epsilon must lie in [0, 1]");
  const bool low = epsilon <= 0.5;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const double u = rng.uniform();
    const bool flip = low ? (u < epsilon) : (u >= 1.0 - epsilon);
    if (flip) ds.noisy[i] = static_cast<std::int8_t>(-ds.noisy[i]);
  }
  double effective = epsilon;
  if (ds.noise.kind == NoiseKind::Mislabel) {
    const double prior = ds.noise.value;
    effective = prior * (1.0 - epsilon) + epsilon * (1.0 - prior);
  }
  ds.noise = NoiseMeta{NoiseKind::Mislabel, effective, rng.seed()};
  return ds;
}

PreferenceDataset apply_uncertain(PreferenceDataset ds, double omega, RandomStream& rng,
                                  const std::optional<Vec>& reward_direction) {
  if (!(omega >= 0.0)) throw std::invalid_argument("apply_uncertain: omega must be >= 0");
  Vec reward;
  if (reward_direction) {
    reward = *reward_direction;
  } else if (ds.generator) {
    reward = ds.generator->reward_direction();
  } else {
    throw PreconditionError(
        "apply_uncertain: dataset has no generator metadata; supply a reward direction");
  }
  if (reward.size() != ds.dim()) throw std::invalid_argument("apply_uncertain: reward direction dimension mismatch");

  const Vec score = ds.x * reward;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    double p_pos = 0.5;
    if (std::isinf(omega)) {
      p_pos = 0.5;
    } else if (omega == 0.0) {
      p_pos = score[i] > 0.0 ? 1.0 : (score[i] < 0.0 ? 0.0 : 0.5);
    } else {
      p_pos = sigmoid(score[i] / omega);
    }
    ds.noisy[i] = rng.uniform() < p_pos ? 1 : -1;
  }
  ds.noise = NoiseMeta{NoiseKind::Uncertain, omega, rng.seed()};
  return ds;
}

double eps_omega(double omega, double gamma, int d, double phi, SignConvention convention) {
  const double t0 = t_zero(gamma, d);
  if (!(t0 > std::cos(phi))) {
    std::ostringstream os;
    os << "eps_omega: requires t0 > cos(phi); t0 = " << t0 << ", cos(phi) = " << std::cos(phi);
    throw PreconditionError(os.str());
  }
  if (!(omega >= 0.0)) throw std::invalid_argument("eps_omega: omega must be >= 0");
  const double tangential = std::sin(2.0 * phi) * std::sqrt(1.0 - t0 * t0);
  const double arg = t0 * (1.0 - std::cos(2.0 * phi)) +
                     (convention == SignConvention::Additive ? tangential : -tangential);
  if (std::isinf(omega)) return 0.5;
  if (omega == 0.0) return arg > 0.0 ? 0.0 : (arg < 0.0 ? 1.0 : 0.5);
  const double kappa = gamma * d / 2.0;
  return sigmoid(-(kappa / omega) * arg);
}

double eps_omega(double omega, const VmfParams& params, double phi, SignConvention convention) {
  return eps_omega(omega, params.gamma(), params.dim(), phi, convention);
}

Vec calibration_probe(const PreferencePairConfig& config, const std::optional<Vec>& reward_direction,
                      FlipReference reference, Eigen::Index n_probe, RandomStream& rng) {
  PreferencePairConfig probe_config = config;
  probe_config.n = n_probe;
  probe_config.validate();
  const ClassMeans means = class_means(config.d, config.phi);
  const Vec reward = reward_direction ? *reward_direction : Vec(config.kappa() * (means.pos - means.neg));
  if (reward.size() != config.d) throw std::invalid_argument("calibration_probe: reward direction dimension mismatch");

  const Eigen::Index half = n_probe / 2;
  Vec probe(n_probe);
  probe.head(half) = sample_projection(VmfParams(means.pos, config.kappa()), reward, half, rng);
  probe.tail(half) = -sample_projection(VmfParams(means.neg, config.kappa()), reward, half, rng);
  if (reference == FlipReference::RewardSign) probe = probe.cwiseAbs();
  return probe;
}

double mean_flip_probability(const Vec& probe, double omega) {
  if (std::isinf(omega)) return 0.5;
  double total = 0.0;
  for (Eigen::Index i = 0; i < probe.size(); ++i) {
    const double c = probe[i];
    if (omega == 0.0) {
      total += c > 0.0 ? 0.0 : (c < 0.0 ? 1.0 : 0.5);
    } else {
      total += sigmoid(-c / omega);
    }
  }
  return total / static_cast<double>(probe.size());
}

OmegaCalibration calibrate_omega_on_probe(double target_eps, const Vec& probe, const CalibrationOptions& options) {
  if (!(target_eps >= 0.0 && target_eps <= 0.5)) {
    throw std::invalid_argument("calibrate_omega: target epsilon must lie in [0, 0.5]");
  }
  OmegaCalibration cal;
  cal.target = target_eps;
  if (target_eps == 0.0) {
    cal.omega = 0.0;
    cal.realized = mean_flip_probability(probe, 0.0);
    return cal;
  }
  if (target_eps == 0.5) {
    cal.omega = kInf;
    cal.realized = 0.5;
    return cal;
  }

  const double floor = mean_flip_probability(probe, 0.0);
  if (floor > target_eps + options.tolerance) {
    std::ostringstream os;
    os << "calibrate_omega: target " << target_eps << " lies below the omega = 0 flip rate " << floor
       << "; bracket [0, 0]";
    throw CalibrationError(os.str());
  }

  const double scale = std::max(probe.cwiseAbs().maxCoeff(), 1e-300);
  double hi = scale;
  int it = 0;
  while (mean_flip_probability(probe, hi) < target_eps) {
    hi *= 2.0;
    if (++it > options.max_iterations) throw CalibrationError("calibrate_omega: failed to bracket target from above");
  }
  double lo = hi;
  while (lo > 0.0 && mean_flip_probability(probe, lo) > target_eps) {
    lo /= 2.0;
    if (++it > options.max_iterations) {
      lo = 0.0;
      break;
    }
  }

  // Geometric bisection; stop well inside the tolerance band.
  const double stop = options.tolerance * 1e-3;
  double mid = hi;
  double realized = mean_flip_probability(probe, hi);
  for (; it < options.max_iterations; ++it) {
    if (std::abs(realized - target_eps) <= stop) break;
    mid = lo > 0.0 ? std::sqrt(lo * hi) : hi / 2.0;
    realized = mean_flip_probability(probe, mid);
    if (realized < target_eps) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (lo > 0.0 && hi / lo - 1.0 < 1e-14) break;
  }
  if (std::abs(realized - target_eps) > options.tolerance) {
    std::ostringstream os;
    os << "calibrate_omega: no convergence for target " << target_eps << "; bracket [" << lo << ", " << hi
       << "], realized " << realized;
    throw CalibrationError(os.str());
  }
  cal.omega = mid;
  cal.realized = realized;
  cal.iterations = it;
  return cal;
}

OmegaCalibration calibrate_omega(double target_eps, const PreferencePairConfig& config,
                                 const std::optional<Vec>& reward_direction, RandomStream& rng,
                                 const CalibrationOptions& options) {
  if (!(target_eps >= 0.0 && target_eps <= 0.5)) {
    throw std::invalid_argument("calibrate_omega: target epsilon must lie in [0, 0.5]");
  }
  const Vec probe = calibration_probe(config, reward_direction, options.reference, options.n_probe, rng);
  return calibrate_omega_on_probe(target_eps, probe, options);
}

Vec class_mean_difference(const PreferenceDataset& ds, bool use_noisy) {
  const SignVector& s = use_noisy ? ds.noisy : ds.clean;
  Vec pos = Vec::Zero(ds.dim());
  Vec neg = Vec::Zero(ds.dim());
  Eigen::Index n_pos = 0;
  Eigen::Index n_neg = 0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    if (s[i] > 0) {
      pos += ds.x.row(i).transpose();
      ++n_pos;
    } else {
      neg += ds.x.row(i).transpose();
      ++n_neg;
    }
  }
  if (n_pos == 0 || n_neg == 0) throw PreconditionError("class_mean_difference: an orientation class is empty");
  return pos / static_cast<double>(n_pos) - neg / static_cast<double>(n_neg);
}

void save_dataset(const std::filesystem::path& prefix, const PreferenceDataset& ds) {
  const std::string p = prefix.string();
  io::write_emb1(p + ".emb", ds.x);
  io::write_lbl1(p + ".lbl", ds.clean, ds.noisy);
  io::KeyValues kv;
  kv["noise_kind"] = to_string(ds.noise.kind);
  kv["noise_value"] = format_double(ds.noise.value);
  kv["noise_seed"] = std::to_string(ds.noise.seed);
  kv["rows"] = std::to_string(ds.size());
  kv["d"] = std::to_string(ds.dim());
  if (ds.generator) {
    kv["generator"] = "vmf_pair";
    kv["gamma"] = format_double(ds.generator->gamma);
    kv["kappa"] = format_double(ds.generator->kappa);
    kv["phi"] = format_double(ds.generator->phi);
  }
  io::write_key_values(p + ".meta", kv);
}

PreferenceDataset load_dataset(const std::filesystem::path& prefix) {
  const std::string p = prefix.string();
  PreferenceDataset ds;
  ds.x = io::read_emb1(p + ".emb");
  std::tie(ds.clean, ds.noisy) = io::read_lbl1(p + ".lbl");
  if (ds.clean.size() != ds.x.rows()) throw IoError("label count does not match embedding rows for " + p);
  if (std::filesystem::exists(p + ".meta")) {
    const io::KeyValues kv = io::read_key_values(p + ".meta");
    auto get = [&](const std::string& k) -> std::optional<std::string> {
      auto it = kv.find(k);
      return it == kv.end() ? std::nullopt : std::optional<std::string>(it->second);
    };
    if (auto kind = get("noise_kind")) {
      if (*kind == "mislabel") ds.noise.kind = NoiseKind::Mislabel;
      else if (*kind == "uncertain") ds.noise.kind = NoiseKind::Uncertain;
    }
    if (auto v = get("noise_value")) ds.noise.value = parse_double(*v);
    if (auto v = get("noise_seed")) ds.noise.seed = std::stoull(*v);
    if (get("generator") == std::optional<std::string>("vmf_pair")) {
      GeneratorMeta g;
      g.gamma = parse_double(get("gamma").value_or("0"));
      g.kappa = parse_double(get("kappa").value_or("0"));
      g.phi = parse_double(get("phi").value_or("0"));
      const ClassMeans m = class_means(ds.dim(), g.phi);
      g.mu_pos = m.pos;
      g.mu_neg = m.neg;
      ds.generator = g;
    }
  }
  return ds;
}

}  // namespace gpolab

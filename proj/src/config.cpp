#include "gpolab/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "gpolab/error.hpp"

namespace gpolab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_factor(const std::string& tok) {
  const std::string t = lower(trim(tok));
  if (!t.empty() && t[0] == '-') return -parse_factor(t.substr(1));
  if (t == "pi") return std::numbers::pi;
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + tok + "'");
  }
  if (used != t.size()) throw ConfigError("not a number: '" + tok + "'");
  return v;
}

long long parse_integer(const std::string& text) {
  const double v = parse_real(text);
  if (!std::isfinite(v) || v != std::floor(v)) throw ConfigError("expected an integer, got '" + text + "'");
  return static_cast<long long>(v);
}

std::string format_real(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += f(xs[i]);
  }
  return out;
}

const std::vector<std::string> kKeys = {
    "d",           "phi",        "gamma",          "N",          "loss",        "epsilon",
    "epsilon_range", "trials",   "seed",           "beta",       "lr",          "epochs",
    "stop_rule",   "delta",      "n_test",         "noise",      "test_sampling", "calibration_probe",
    "calibration_tolerance",     "flip_reference", "threads"};

}  // namespace

double parse_real(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw ConfigError("empty numeric value");
  double value = 0.0;
  char op = '*';
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    // '*' and '/' separate factors; a sign after an exponent marker is part of the number.
    if (i == s.size() || s[i] == '*' || s[i] == '/') {
      const double f = parse_factor(s.substr(start, i - start));
      if (start == 0) {
        value = f;
      } else if (op == '*') {
        value *= f;
      } else {
        if (f == 0.0) throw ConfigError("division by zero in '" + text + "'");
        value /= f;
      }
      if (i < s.size()) op = s[i];
      start = i + 1;
    }
  }
  return value;
}

std::vector<double> linear_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw ConfigError("grid needs step > 0 and stop >= start");
  const long long count = std::llround(std::floor((stop - start) / step + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count) + 1);
  // start + k * step, so grid points do not accumulate rounding.
  for (long long k = 0; k <= count; ++k) out.push_back(start + static_cast<double>(k) * step);
  return out;
}

std::vector<std::string> valid_config_keys() { return kKeys; }

void apply_config_key(SweepConfig& cfg, const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(value);
  const auto items = split_list(v);
  if (key == "d") {
    cfg.d = static_cast<int>(parse_integer(v));
  } else if (key == "phi") {
    cfg.phi = parse_real(v);
  } else if (key == "gamma") {
    cfg.gammas.clear();
    for (const auto& s : items) cfg.gammas.push_back(parse_real(s));
  } else if (key == "N") {
    cfg.Ns.clear();
    for (const auto& s : items) cfg.Ns.push_back(parse_integer(s));
  } else if (key == "loss") {
    cfg.losses.clear();
    for (const auto& s : items) cfg.losses.push_back(parse_loss_kind(lower(s)));
  } else if (key == "epsilon") {
    cfg.eps_grid.clear();
    for (const auto& s : items) cfg.eps_grid.push_back(parse_real(s));
  } else if (key == "epsilon_range") {
    std::vector<std::string> parts;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3) throw ConfigError("epsilon_range expects start:stop:step, got '" + v + "'");
    cfg.eps_grid = linear_grid(parse_real(parts[0]), parse_real(parts[1]), parse_real(parts[2]));
  } else if (key == "trials") {
    cfg.trials = static_cast<int>(parse_integer(v));
  } else if (key == "seed") {
    try {
      cfg.seed = std::stoull(v, nullptr, 0);
    } catch (const std::exception&) {
      throw ConfigError("seed expects an unsigned 64-bit integer, got '" + v + "'");
    }
  } else if (key == "beta") {
    cfg.beta = parse_real(v);
  } else if (key == "lr") {
    if (lower(v) == "auto") {
      cfg.learning_rate.reset();
    } else {
      cfg.learning_rate = parse_real(v);
    }
  } else if (key == "epochs") {
    cfg.epochs = static_cast<int>(parse_integer(v));
  } else if (key == "stop_rule") {
    const std::string s = lower(v);
    if (s == "fixed") {
      cfg.stop_rule = StopRule::FixedEpochs;
    } else if (s == "boundary") {
      cfg.stop_rule = StopRule::BoundaryBudget;
    } else {
      throw ConfigError("stop_rule expects fixed|boundary, got '" + v + "'");
    }
  } else if (key == "delta") {
    cfg.delta = parse_real(v);
  } else if (key == "n_test") {
    cfg.n_test = parse_integer(v);
  } else if (key == "noise") {
    const std::string s = lower(v);
    if (s == "mislabel") {
      cfg.noise = NoiseKind::Mislabel;
    } else if (s == "uncertain") {
      cfg.noise = NoiseKind::Uncertain;
    } else {
      throw ConfigError("noise expects mislabel|uncertain, got '" + v + "'");
    }
  } else if (key == "test_sampling") {
    const std::string s = lower(v);
    if (s == "projected") {
      cfg.test_sampling = TestSampling::Projected;
    } else if (s == "materialized") {
      cfg.test_sampling = TestSampling::Materialized;
    } else {
      throw ConfigError("test_sampling expects projected|materialized, got '" + v + "'");
    }
  } else if (key == "calibration_probe") {
    cfg.calibration.n_probe = parse_integer(v);
  } else if (key == "calibration_tolerance") {
    cfg.calibration.tolerance = parse_real(v);
  } else if (key == "flip_reference") {
    const std::string s = lower(v);
    if (s == "reward_sign") {
      cfg.calibration.reference = FlipReference::RewardSign;
    } else if (s == "cluster_label") {
      cfg.calibration.reference = FlipReference::ClusterLabel;
    } else {
      throw ConfigError("flip_reference expects reward_sign|cluster_label, got '" + v + "'");
    }
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(parse_integer(v));
  } else {
    std::string msg = "unknown config key '" + key + "'; valid keys: ";
    msg += join(kKeys, [](const std::string& s) { return s; });
    throw ConfigError(msg);
  }
}

void apply_config_stream(SweepConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    try {
      apply_config_key(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(SweepConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  apply_config_stream(cfg, in);
}

void SweepConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (d < 3) fail("d must be >= 3");
  if (!(phi > 0.0 && phi <= std::numbers::pi / 2 + 1e-15)) fail("phi must lie in (0, pi/2]");
  if (gammas.empty() || Ns.empty() || losses.empty() || eps_grid.empty()) fail("gamma, N, loss and epsilon lists must be nonempty");
  if (gammas.size() > 1 && Ns.size() > 1) fail("only one of the gamma and N lists may have more than one value");
  for (double g : gammas) {
    if (!(g > 0.0) || !std::isfinite(g)) fail("gamma values must be finite and > 0");
  }
  for (auto n : Ns) {
    if (n < 2 || n % 2 != 0) fail("N values must be even and >= 2");
  }
  const double eps_max = noise == NoiseKind::Uncertain ? 0.5 : 1.0;
  for (double e : eps_grid) {
    if (!(e >= 0.0 && e <= eps_max)) {
      fail(noise == NoiseKind::Uncertain ? "uncertain targets must lie in [0, 0.5]" : "epsilon values must lie in [0, 1]");
    }
  }
  if (trials < 1) fail("trials must be >= 1");
  if (!(beta > 0.0)) fail("beta must be > 0");
  if (learning_rate && !(*learning_rate > 0.0)) fail("lr must be > 0 or auto");
  if (epochs < 1) fail("epochs must be >= 1");
  if (stop_rule == StopRule::BoundaryBudget && !(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0, 1)");
  if (n_test < 2 || n_test % 2 != 0) fail("n_test must be even and >= 2");
  if (calibration.n_probe < 2 || calibration.n_probe % 2 != 0) fail("calibration_probe must be even and >= 2");
  if (!(calibration.tolerance > 0.0)) fail("calibration_tolerance must be > 0");
  if (threads < 1) fail("threads must be >= 1");
}

std::vector<std::string> preset_names() { return {"fig4-gamma", "fig4-N", "fig5-uncertain", "fig5-uncertain-N"}; }

SweepConfig preset(const std::string& name) {
  SweepConfig c;
  c.d = 512;
  c.trials = 100;
  c.epochs = 10;
  c.n_test = 2000;
  c.losses = {LossKind::Dpo, LossKind::Ipo, LossKind::Slic};
  c.eps_grid = linear_grid(0.0, 0.5, 0.025);
  if (name == "fig4-gamma") {
    c.phi = std::numbers::pi / 3;
    c.gammas = {0.125, 0.25, 0.5, 1.0, 2.0};
    c.Ns = {2000};
  } else if (name == "fig4-N") {
    c.phi = std::numbers::pi / 3;
    c.gammas = {1.0};
    c.Ns = {200, 600, 2000};
  } else if (name == "fig5-uncertain") {
    c.phi = std::numbers::pi / 2;
    c.noise = NoiseKind::Uncertain;
    c.gammas = {0.125, 0.25, 0.5, 1.0, 2.0};
    c.Ns = {2000};
  } else if (name == "fig5-uncertain-N") {
    c.phi = std::numbers::pi / 2;
    c.noise = NoiseKind::Uncertain;
    c.gammas = {1.0};
    c.Ns = {200, 600, 2000};
  } else {
    throw ConfigError("unknown preset '" + name + "'; valid presets: " +
                      join(preset_names(), [](const std::string& s) { return s; }));
  }
  return c;
}

std::string describe(const SweepConfig& c) {
  std::ostringstream os;
  os << "d = " << c.d << '\n'
     << "phi = " << format_real(c.phi) << '\n'
     << "gamma = " << join(c.gammas, format_real) << '\n'
     << "N = " << join(c.Ns, [](Eigen::Index n) { return std::to_string(n); }) << '\n'
     << "loss = " << join(c.losses, [](LossKind k) { return to_string(k); }) << '\n'
     << "epsilon = " << join(c.eps_grid, format_real) << '\n'
     << "trials = " << c.trials << '\n'
     << "seed = " << c.seed << '\n'
     << "beta = " << format_real(c.beta) << '\n'
     << "lr = " << (c.learning_rate ? format_real(*c.learning_rate) : std::string("auto")) << '\n'
     << "epochs = " << c.epochs << '\n'
     << "stop_rule = " << (c.stop_rule == StopRule::FixedEpochs ? "fixed" : "boundary") << '\n'
     << "delta = " << format_real(c.delta) << '\n'
     << "n_test = " << c.n_test << '\n'
     << "noise = " << to_string(c.noise) << '\n'
     << "test_sampling = " << (c.test_sampling == TestSampling::Projected ? "projected" : "materialized") << '\n'
     << "calibration_probe = " << c.calibration.n_probe << '\n'
     << "calibration_tolerance = " << format_real(c.calibration.tolerance) << '\n'
     << "flip_reference = "
     << (c.calibration.reference == FlipReference::RewardSign ? "reward_sign" : "cluster_label") << '\n'
     << "threads = " << c.threads << '\n';
  return os.str();
}

}  // namespace gpolab

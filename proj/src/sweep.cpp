#include "gpolab/sweep.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gpolab/error.hpp"
#include "gpolab/parallel.hpp"

namespace gpolab {

const char* const kPerTrialHeader = "epsilon,gamma,phi,N,d,loss,beta,lr,epochs,trial,test_accuracy,seed";

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  if (s == "nan") return NAN;
  return std::stod(s);
}

TrialSpec base_spec(const SweepConfig& cfg) {
  TrialSpec t;
  t.data.d = cfg.d;
  t.data.phi = cfg.phi;
  t.loss.beta = cfg.beta;
  t.learning_rate = cfg.learning_rate;
  t.epochs = cfg.epochs;
  t.stop_rule = cfg.stop_rule;
  t.delta = cfg.delta;
  t.noise = cfg.noise;
  t.n_test = cfg.n_test;
  t.test_sampling = cfg.test_sampling;
  return t;
}

SweepResult execute(const SweepConfig& cfg, std::vector<SweepCell> cells) {
  SweepResult r;
  r.config = cfg;
  r.cells = std::move(cells);
  const std::size_t per_cell = static_cast<std::size_t>(cfg.trials);
  r.outcomes.resize(r.cells.size() * per_cell);
  parallel_for(r.outcomes.size(), cfg.threads, [&](std::size_t k) {
    const SweepCell& cell = r.cells[k / per_cell];
    const int trial = static_cast<int>(k % per_cell);
    const std::uint64_t seed = trial_seed(cfg.seed, cell.spec, trial);
    if (!cell.ok()) {
      r.outcomes[k].seed = seed;
      r.outcomes[k].diverged = true;
      r.outcomes[k].message = cell.flag;
      return;
    }
    r.outcomes[k] = run_trial(cell.spec, seed);
  });
  r.aggregates.reserve(r.cells.size());
  for (std::size_t c = 0; c < r.cells.size(); ++c) {
    std::vector<TrialOutcome> slice(r.outcomes.begin() + c * per_cell, r.outcomes.begin() + (c + 1) * per_cell);
    r.aggregates.push_back(aggregate_trials(r.cells[c].spec.epsilon, slice));
  }
  return r;
}

}  // namespace

std::vector<SweepCell> plan_cells(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<SweepCell> cells;
  const TrialSpec base = base_spec(cfg);
  for (LossKind loss : cfg.losses) {
    for (double gamma : cfg.gammas) {
      for (Eigen::Index n : cfg.Ns) {
        for (double eps : cfg.eps_grid) {
          SweepCell c;
          c.spec = base;
          c.spec.loss.kind = loss;
          c.spec.data.gamma = gamma;
          c.spec.data.n = n;
          c.spec.epsilon = eps;
          cells.push_back(std::move(c));
        }
      }
    }
  }
  return cells;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  if (cfg.noise == NoiseKind::Uncertain) return run_uncertain_sweep(cfg);
  return execute(cfg, plan_cells(cfg));
}

SweepResult run_uncertain_sweep(const SweepConfig& cfg) {
  if (cfg.noise != NoiseKind::Uncertain) throw ConfigError("run_uncertain_sweep: noise must be uncertain");
  std::vector<SweepCell> cells = plan_cells(cfg);
  for (double gamma : cfg.gammas) {
    const double t0 = t_zero(gamma, cfg.d);
    if (!(t0 > std::cos(cfg.phi))) {
      std::ostringstream os;
      os << "uncertain labels require t0 > cos(phi): gamma = " << gamma << ", d = " << cfg.d << " gives t0 = " << t0
         << " <= cos(phi) = " << std::cos(cfg.phi);
      throw PreconditionError(os.str());
    }
  }

  // One probe per gamma; omega depends only on (d, gamma, phi, target).
  std::map<std::pair<double, double>, OmegaCalibration> solved;
  std::map<std::pair<double, double>, std::string> failed;
  for (double gamma : cfg.gammas) {
    PreferencePairConfig pc;
    pc.d = cfg.d;
    pc.gamma = gamma;
    pc.phi = cfg.phi;
    pc.n = cfg.calibration.n_probe;
    RandomStream rng = RandomStream::derive(
        cfg.seed, {0xca11b7a7e, static_cast<std::uint64_t>(cfg.d), std::bit_cast<std::uint64_t>(gamma),
                   std::bit_cast<std::uint64_t>(cfg.phi), static_cast<std::uint64_t>(cfg.calibration.reference)});
    const Vec probe = calibration_probe(pc, std::nullopt, cfg.calibration.reference, cfg.calibration.n_probe, rng);
    for (double target : cfg.eps_grid) {
      try {
        solved[{gamma, target}] = calibrate_omega_on_probe(target, probe, cfg.calibration);
      } catch (const CalibrationError& e) {
        failed[{gamma, target}] = e.what();
      }
    }
  }
  for (SweepCell& c : cells) {
    const std::pair<double, double> key{c.spec.data.gamma, c.spec.epsilon};
    if (auto it = solved.find(key); it != solved.end()) {
      c.calibration = it->second;
      c.spec.omega = it->second.omega;
    } else {
      c.flag = failed.at(key);
    }
  }
  return execute(cfg, std::move(cells));
}

void write_per_trial_csv(const std::filesystem::path& path, const SweepResult& r) {
  const bool uncertain = r.config.noise == NoiseKind::Uncertain;
  auto out = open_out(path);
  out << kPerTrialHeader << (uncertain ? ",omega" : "") << '\n';
  for (std::size_t c = 0; c < r.cells.size(); ++c) {
    const TrialSpec& s = r.cells[c].spec;
    for (int t = 0; t < r.config.trials; ++t) {
      const TrialOutcome& o = r.outcome(c, t);
      out << num(s.epsilon) << ',' << num(s.data.gamma) << ',' << num(s.data.phi) << ',' << s.data.n << ','
          << s.data.d << ',' << to_string(s.loss.kind) << ',' << num(s.loss.beta) << ','
          << (o.diverged && o.learning_rate == 0.0 ? std::string("nan") : num(o.learning_rate)) << ',' << s.epochs
          << ',' << t << ',' << (o.diverged ? std::string("nan") : num(o.test.accuracy)) << ',' << o.seed;
      if (uncertain) out << ',' << (r.cells[c].ok() ? num(s.omega) : std::string("nan"));
      out << '\n';
    }
  }
  finish(out, path);
}

void write_aggregate_csv(const std::filesystem::path& path, const SweepResult& r) {
  const bool uncertain = r.config.noise == NoiseKind::Uncertain;
  auto out = open_out(path);
  out << kPerTrialHeader << ",stderr,excluded" << (uncertain ? ",omega" : "") << '\n';
  for (std::size_t c = 0; c < r.cells.size(); ++c) {
    const TrialSpec& s = r.cells[c].spec;
    const CurvePoint& p = r.aggregates[c];
    out << num(s.epsilon) << ',' << num(s.data.gamma) << ',' << num(s.data.phi) << ',' << s.data.n << ','
        << s.data.d << ',' << to_string(s.loss.kind) << ',' << num(s.loss.beta) << ','
        << (s.learning_rate ? num(*s.learning_rate) : std::string("auto")) << ',' << s.epochs << ',' << p.trials
        << ',' << num(p.mean_accuracy) << ',' << r.config.seed << ',' << num(p.std_error) << ',' << p.excluded;
    if (uncertain) out << ',' << (r.cells[c].ok() ? num(s.omega) : std::string("nan"));
    out << '\n';
  }
  finish(out, path);
}

std::vector<std::filesystem::path> write_sweep_outputs(const SweepResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> files{dir / "per_trial.csv", dir / "aggregate.csv"};
  write_per_trial_csv(files[0], r);
  write_aggregate_csv(files[1], r);
  for (auto& p : emit_plotdata(files[1], dir)) files.push_back(std::move(p));
  return files;
}

std::vector<PlotPoint> read_aggregate_points(const std::filesystem::path& aggregate_csv) {
  std::ifstream in(aggregate_csv);
  if (!in) throw IoError("cannot open aggregate file: " + aggregate_csv.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty aggregate file: " + aggregate_csv.string());
  const auto header = split(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IoError("aggregate file lacks column '" + name + "': " + aggregate_csv.string());
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ce = column("epsilon"), cg = column("gamma"), cn = column("N"), cl = column("loss"),
                    ca = column("test_accuracy");

  struct Row {
    std::string loss;
    double gamma;
    long long n;
    double eps;
    double acc;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw IoError("malformed aggregate row: " + line);
    rows.push_back({f[cl], to_double(f[cg]), std::stoll(f[cn]), to_double(f[ce]), to_double(f[ca])});
  }

  std::map<std::string, std::set<double>> gammas;
  std::map<std::string, std::set<long long>> ns;
  for (const Row& r : rows) {
    gammas[r.loss].insert(r.gamma);
    ns[r.loss].insert(r.n);
  }
  std::vector<PlotPoint> points;
  points.reserve(rows.size());
  for (const Row& r : rows) {
    PlotPoint p{r.loss, "", r.eps, r.acc};
    if (gammas[r.loss].size() > 1) {
      p.series = "gamma=" + label(r.gamma);
    } else if (ns[r.loss].size() > 1) {
      p.series = "N=" + std::to_string(r.n);
    }
    points.push_back(std::move(p));
  }
  return points;
}

namespace {

double series_value(const std::string& series) {
  const auto eq = series.find('=');
  return eq == std::string::npos ? 0.0 : std::stod(series.substr(eq + 1));
}

}  // namespace

std::vector<std::filesystem::path> emit_plotdata(const std::filesystem::path& aggregate_csv,
                                                 const std::filesystem::path& out_dir) {
  const auto points = read_aggregate_points(aggregate_csv);
  std::vector<std::string> losses;
  for (const auto& p : points) {
    if (std::find(losses.begin(), losses.end(), p.loss) == losses.end()) losses.push_back(p.loss);
  }
  std::vector<std::filesystem::path> files;
  for (const auto& loss : losses) {
    std::vector<std::string> series;
    std::vector<double> eps;
    std::map<std::pair<std::string, double>, double> value;
    for (const auto& p : points) {
      if (p.loss != loss) continue;
      if (std::find(series.begin(), series.end(), p.series) == series.end()) series.push_back(p.series);
      if (std::find(eps.begin(), eps.end(), p.epsilon) == eps.end()) eps.push_back(p.epsilon);
      value[{p.series, p.epsilon}] = p.accuracy;
    }
    std::stable_sort(series.begin(), series.end(),
                     [](const std::string& a, const std::string& b) { return series_value(a) < series_value(b); });
    std::sort(eps.begin(), eps.end());

    const auto path = out_dir / ("plotdata_" + loss + ".csv");
    auto out = open_out(path);
    out << "epsilon";
    if (series.size() == 1 && series[0].empty()) {
      out << ",accuracy";
    } else {
      for (const auto& s : series) out << ',' << s;
    }
    out << '\n';
    for (double e : eps) {
      out << num(e);
      for (const auto& s : series) {
        const auto it = value.find({s, e});
        out << ',' << (it == value.end() ? std::string("") : num(it->second));
      }
      out << '\n';
    }
    finish(out, path);
    files.push_back(path);
  }
  return files;
}

std::vector<PlotPoint> unpivot_plotdata(const std::filesystem::path& plotdata_csv, const std::string& loss) {
  std::ifstream in(plotdata_csv);
  if (!in) throw IoError("cannot open plot data: " + plotdata_csv.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty plot data: " + plotdata_csv.string());
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "epsilon") throw IoError("plot data lacks the epsilon column");
  const bool single = header.size() == 2 && header[1] == "accuracy";
  std::vector<PlotPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw IoError("malformed plot data row: " + line);
    const double e = to_double(f[0]);
    for (std::size_t k = 1; k < f.size(); ++k) {
      if (f[k].empty()) continue;
      points.push_back({loss, single ? std::string() : header[k], e, to_double(f[k])});
    }
  }
  return points;
}

}  // namespace gpolab

// gpo-noise-lab: command-line front end for the preference-noise simulator.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gpolab/bounds.hpp"
#include "gpolab/config.hpp"
#include "gpolab/embedding_io.hpp"
#include "gpolab/error.hpp"
#include "gpolab/geometry.hpp"
#include "gpolab/prefdata.hpp"
#include "gpolab/risk.hpp"
#include "gpolab/sweep.hpp"
#include "gpolab/trainer.hpp"

namespace fs = std::filesystem;
using namespace gpolab;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kPrecondition = 3, kIo = 4 };

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Global {
  std::string config;
  std::string preset;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  std::vector<std::string> overrides;
};

SweepConfig load(const Global& g) {
  SweepConfig cfg = g.preset.empty() ? SweepConfig{} : preset(g.preset);
  if (!g.config.empty()) apply_config_file(cfg, g.config);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed_set) cfg.seed = g.seed;
  cfg.threads = g.threads;
  if (const char* env = std::getenv("GPO_NOISE_LAB_THREADS")) {
    try {
      cfg.threads = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("GPO_NOISE_LAB_THREADS must be an integer, got '") + env + "'");
    }
  }
  cfg.validate();
  return cfg;
}

PreferencePairConfig pair_config(const SweepConfig& cfg) {
  PreferencePairConfig pc;
  pc.d = cfg.d;
  pc.gamma = cfg.gammas.front();
  pc.phi = cfg.phi;
  pc.n = cfg.Ns.front();
  return pc;
}

fs::path out_dir(const Global& g) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw IoError("cannot create output directory " + g.out + ": " + ec.message());
  return g.out;
}

void print_report(const std::string& prefix, const BoundReport& r) {
  std::cout << prefix << ".value = " << (r.value ? num(*r.value) : std::string("unsatisfied")) << '\n'
            << prefix << ".status = " << (r.satisfied() ? "satisfied" : "unsatisfied") << '\n';
  if (!r.satisfied()) std::cout << prefix << ".reason = " << r.reason << '\n';
  std::cout << prefix << ".vacuous = " << (r.vacuous ? "true" : "false") << '\n';
  for (const auto& p : r.preconditions) {
    std::cout << prefix << ".precondition[" << p.name << "] = " << (p.holds ? "holds" : "violated")
              << " margin=" << num(p.margin) << '\n';
  }
  for (const auto& c : r.unspecified_constants) std::cout << prefix << ".unspecified_constant = " << c << '\n';
}

int cmd_sample(const Global& g, double gamma, int d, long long n, const std::string& format) {
  RandomStream rng(g.seed);
  Vec mu = Vec::Zero(d);
  mu[0] = 1.0;
  const EmbeddingMatrix x = sample_vmf(VmfParams::from_gamma(mu, gamma), n, rng);
  const fs::path dir = out_dir(g);
  const fs::path path = dir / (format == "csv" ? "samples.csv" : "samples.emb");
  if (format == "csv") {
    io::write_embedding_csv(path, x);
  } else {
    io::write_emb1(path, x);
  }
  const Vec t = x * mu;
  std::cout << "file = " << path.string() << '\n'
            << "rows = " << n << "\nd = " << d << "\ngamma = " << num(gamma) << "\nkappa = " << num(gamma * d / 2)
            << "\nmean_radial = " << num(t.mean()) << "\nt_gamma = " << num(t_gamma(gamma))
            << "\nt_zero = " << num(t_zero(gamma, d)) << '\n';
  return kOk;
}

int cmd_gen_data(const Global& g) {
  const SweepConfig cfg = load(g);
  const PreferencePairConfig pc = pair_config(cfg);
  RandomStream data_rng = RandomStream::derive(cfg.seed, {1});
  RandomStream noise_rng = RandomStream::derive(cfg.seed, {2});
  PreferenceDataset ds = generate_clean(pc, data_rng);
  const double eps = cfg.eps_grid.front();
  double omega = 0.0;
  if (cfg.noise == NoiseKind::Uncertain) {
    RandomStream cal_rng = RandomStream::derive(cfg.seed, {4});
    omega = calibrate_omega(eps, pc, std::nullopt, cal_rng, cfg.calibration).omega;
    ds = apply_uncertain(std::move(ds), omega, noise_rng);
  } else {
    ds = apply_mislabel(std::move(ds), eps, noise_rng);
  }
  const fs::path prefix = out_dir(g) / "dataset";
  save_dataset(prefix, ds);
  std::cout << "prefix = " << prefix.string() << "\nrows = " << ds.size() << "\nd = " << ds.dim()
            << "\nnoise = " << to_string(cfg.noise) << "\nepsilon = " << num(eps);
  if (cfg.noise == NoiseKind::Uncertain) std::cout << "\nomega = " << num(omega);
  std::cout << "\nflipped = " << ds.flip_count() << '\n';
  return kOk;
}

int cmd_train(const Global& g, const std::string& data) {
  const SweepConfig cfg = load(g);
  PreferenceDataset ds;
  if (!data.empty()) {
    ds = load_dataset(data);
  } else {
    RandomStream data_rng = RandomStream::derive(cfg.seed, {1});
    RandomStream noise_rng = RandomStream::derive(cfg.seed, {2});
    ds = apply_mislabel(generate_clean(pair_config(cfg), data_rng), cfg.eps_grid.front(), noise_rng);
  }
  TrainConfig tc;
  tc.loss = GpoLoss{cfg.losses.front(), cfg.beta};
  tc.learning_rate = cfg.learning_rate ? *cfg.learning_rate : stable_learning_rate(ds, tc.loss);
  tc.epochs = cfg.epochs;
  tc.stop_rule = cfg.stop_rule;
  tc.delta = cfg.delta;
  const TrainResult res = train(ds, tc);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';

  const fs::path dir = out_dir(g);
  write_trace_csv(dir / "trace.csv", res.trace);
  EmbeddingMatrix w(1, res.model.dim());
  w.row(0) = res.model.w.transpose();
  io::write_embedding_csv(dir / "weights.csv", w);

  const RiskEstimate train_risk = zero_one_risk(res.model, ds, true);
  std::cout << "loss = " << to_string(tc.loss.kind) << "\nbeta = " << num(tc.loss.beta)
            << "\nlr = " << num(tc.learning_rate) << "\nsteps = " << res.trace.steps()
            << "\nfinal_loss = " << num(res.trace.loss.back())
            << "\ntrain_accuracy_clean = " << num(train_risk.accuracy) << '\n';
  if (ds.generator) {
    RandomStream test_rng = RandomStream::derive(cfg.seed, {3});
    const RiskEstimate test = zero_one_risk_fresh(res.model, *ds.generator, cfg.n_test, test_rng, cfg.test_sampling);
    std::cout << "test_accuracy = " << num(test.accuracy) << "\ntest_stderr = " << num(test.std_error) << '\n';
  }
  std::cout << "trace = " << (dir / "trace.csv").string() << '\n';
  return kOk;
}

int cmd_sweep(const Global& g) {
  const SweepConfig cfg = load(g);
  const SweepResult r = run_sweep(cfg);
  const auto files = write_sweep_outputs(r, out_dir(g));
  int flagged = 0;
  for (const auto& c : r.cells) {
    if (!c.ok()) {
      ++flagged;
      std::cerr << "cell flagged: " << c.flag << '\n';
    }
  }
  std::cout << "cells = " << r.cells.size() << "\ntrials = " << cfg.trials << "\nflagged_cells = " << flagged << '\n';
  for (const auto& f : files) std::cout << "file = " << f.string() << '\n';
  return kOk;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

int cmd_bound(const Global&, const std::string& Ns, int d, const std::string& gamma_s, const std::string& phi_s,
              double delta, double epsilon, const std::string& form_s, const std::string& constants_s,
              const std::string& csv) {
  ThresholdForm form = ThresholdForm::Statement;
  if (form_s == "proof") {
    form = ThresholdForm::Proof;
  } else if (form_s != "statement") {
    throw ConfigError("--form expects statement|proof");
  }
  BoundConstants constants;
  if (!constants_s.empty()) {
    std::stringstream ss(constants_s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("--constants expects c=..,C=..");
      const std::string k = item.substr(0, eq);
      const double v = parse_real(item.substr(eq + 1));
      if (k == "c") {
        constants.c = v;
      } else if (k == "C") {
        constants.C = v;
      } else {
        throw ConfigError("unknown constant '" + k + "'; valid: c, C");
      }
    }
  }
  const double gamma = parse_real(gamma_s);
  const double phi = parse_real(phi_s);
  const std::vector<double> n_list = parse_list(Ns);

  auto inputs_for = [&](double n) {
    BoundInputs in;
    in.N = n;
    in.d = d;
    in.gamma = gamma;
    in.phi = phi;
    in.delta = delta;
    in.epsilon = epsilon;
    return in;
  };

  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw IoError("cannot open for writing: " + csv);
    out << "N,d,gamma,phi,delta,epsilon,noise_threshold,status,vacuous,probability_floor\n";
    for (double n : n_list) {
      const BoundReport r = noise_threshold(inputs_for(n), form);
      out << num(n) << ',' << d << ',' << num(gamma) << ',' << num(phi) << ',' << num(delta) << ',' << num(epsilon)
          << ',' << (r.value ? num(*r.value) : std::string("nan")) << ','
          << (r.satisfied() ? "satisfied" : "unsatisfied") << ',' << (r.vacuous ? 1 : 0) << ','
          << num(r.probability_floor) << '\n';
    }
    if (!out) throw IoError("write failed: " + csv);
  }

  const BoundInputs in = inputs_for(n_list.front());
  const BoundReport thr = noise_threshold(in, form);
  std::cout << "N = " << num(in.N) << "\nd = " << d << "\ngamma = " << num(gamma) << "\nphi = " << num(phi)
            << "\ndelta = " << num(delta) << "\nepsilon = " << num(epsilon)
            << "\nform = " << form_s << "\nprobability_floor = " << num(thr.probability_floor) << '\n';
  print_report("noise_threshold", thr);
  if (thr.value && thr.vacuous) {
    const auto n_min = minimal_sample_size(in, form);
    std::cout << "noise_threshold.minimal_N = " << (n_min ? num(*n_min) : std::string("none")) << '\n';
  }
  if (d >= 64) {
    std::cout << "risk_bound = " << num(risk_bound(d, gamma, constants.c)) << "\nrisk_bound.unspecified_constant = c="
              << num(constants.c) << '\n';
  }
  if (in.N >= 25) {
    print_report("concentration_bound", concentration_bound_report(in.N, d, gamma, epsilon, phi));
  }
  if (t_zero(gamma, d) > std::cos(phi)) {
    print_report("eps_omega_threshold", eps_omega_threshold(in, constants, form));
  } else {
    std::cout << "eps_omega_threshold.value = unsatisfied\neps_omega_threshold.reason = t0(gamma, d) > cos(phi)\n";
  }
  std::cout << "t_gamma = " << num(t_gamma(gamma)) << "\nt_zero = " << num(t_zero(gamma, d)) << '\n';
  return kOk;
}

int cmd_calibrate(const Global& g) {
  const SweepConfig cfg = load(g);
  const PreferencePairConfig pc = pair_config(cfg);
  RandomStream rng = RandomStream::derive(cfg.seed, {4});
  const Vec probe = calibration_probe(pc, std::nullopt, cfg.calibration.reference, cfg.calibration.n_probe, rng);
  const bool closed_form = t_zero(pc.gamma, pc.d) > std::cos(pc.phi);
  std::cout << "target,omega,realized,iterations,eps_omega_closed_form\n";
  for (double target : cfg.eps_grid) {
    const OmegaCalibration cal = calibrate_omega_on_probe(target, probe, cfg.calibration);
    std::string closed = "nan";
    if (closed_form && cal.omega > 0.0) closed = num(eps_omega(cal.omega, pc.gamma, pc.d, pc.phi));
    std::cout << num(target) << ',' << num(cal.omega) << ',' << num(cal.realized) << ',' << cal.iterations << ','
              << closed << '\n';
  }
  return kOk;
}

int cmd_profile(const std::string& emb, const std::string& lbl, double N, double delta) {
  const EmbeddingMatrix x = io::read_embeddings(emb);
  const SignVector labels = io::read_labels(lbl);
  const GeometryProfile p = profile(x, labels);
  const RobustnessVerdict v = robustness_verdict(p, N, delta);
  std::cout << "rows = " << x.rows() << "\nd = " << p.d << "\nn_pos = " << p.n_pos << "\nn_neg = " << p.n_neg
            << "\navg_norm = " << num(p.avg_norm) << "\nnorm_std = " << num(p.norm_std)
            << "\nnorm_variance = " << num(p.norm_variance)
            << "\navg_cosine_to_class_mean = " << num(p.avg_cosine_to_class_mean)
            << "\ncosine_variance = " << num(p.cosine_variance) << "\nkappa_hat = " << num(p.kappa_hat)
            << "\ngamma_hat = " << num(p.gamma_hat) << "\nphi_hat = " << num(p.phi_hat) << '\n';
  print_report("noise_threshold", v.threshold);
  std::cout << "verdict = " << v.verdict << '\n';
  const auto& ref = kLlamaPersonaReference;
  std::cout << "reference.source = " << ref.source << "\nreference.avg_norm = " << num(ref.avg_norm)
            << "\nreference.norm_variance_as_printed = " << num(ref.norm_variance_as_printed)
            << "\nreference.avg_cosine = " << num(ref.avg_cosine)
            << "\nreference.cosine_variance = " << num(ref.cosine_variance) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference optimization under noisy labels: data, training, sweeps and bounds"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--config", g.config, "key = value config file");
  app.add_option("--out", g.out, "output directory");
  auto* seed_opt = app.add_option("--seed", g.seed, "base 64-bit seed");
  app.add_option("--preset", g.preset, "fig4-gamma | fig4-N | fig5-uncertain | fig5-uncertain-N");
  app.add_option("--threads", g.threads, "worker threads (GPO_NOISE_LAB_THREADS overrides)");
  app.add_option("--set", g.overrides, "config override key=value (repeatable)");

  auto* sample = app.add_subcommand("sample", "draw vMF samples around e1");
  double s_gamma = 1.0;
  int s_d = 512;
  long long s_n = 1000;
  std::string s_format = "emb";
  sample->add_option("--gamma", s_gamma);
  sample->add_option("--d", s_d);
  sample->add_option("--n", s_n);
  sample->add_option("--format", s_format)->check(CLI::IsMember({"emb", "csv"}));

  app.add_subcommand("gen-data", "generate one noisy preference dataset");

  auto* trn = app.add_subcommand("train", "train one linear head and export its trace");
  std::string t_data;
  trn->add_option("--data", t_data, "dataset prefix written by gen-data");

  app.add_subcommand("sweep", "run an epsilon sweep and write CSVs");

  auto* bnd = app.add_subcommand("bound", "evaluate the closed-form bounds");
  std::string b_N = "2000", b_gamma = "1", b_phi = "pi/2", b_form = "statement", b_constants, b_csv;
  int b_d = 512;
  double b_delta = 1e-4, b_eps = 0.0;
  bnd->add_option("--N", b_N, "sample size, or a comma list for --csv");
  bnd->add_option("--d", b_d);
  bnd->add_option("--gamma", b_gamma);
  bnd->add_option("--phi", b_phi);
  bnd->add_option("--delta", b_delta);
  bnd->add_option("--epsilon", b_eps);
  bnd->add_option("--form", b_form)->check(CLI::IsMember({"statement", "proof"}));
  bnd->add_option("--constants", b_constants, "c=..,C=..");
  bnd->add_option("--csv", b_csv, "write the threshold over the N list to this CSV");

  app.add_subcommand("calibrate-omega", "calibrate label temperatures to target flip rates");

  auto* prof = app.add_subcommand("profile", "embedding geometry diagnostic");
  std::string p_emb, p_lbl;
  double p_N = 2000, p_delta = 1e-4;
  prof->add_option("--embeddings", p_emb)->required();
  prof->add_option("--labels", p_lbl)->required();
  prof->add_option("--N", p_N);
  prof->add_option("--delta", p_delta);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  g.seed_set = seed_opt->count() > 0;

  try {
    if (*sample) return cmd_sample(g, s_gamma, s_d, s_n, s_format);
    if (app.got_subcommand("gen-data")) return cmd_gen_data(g);
    if (*trn) return cmd_train(g, t_data);
    if (app.got_subcommand("sweep")) return cmd_sweep(g);
    if (*bnd) return cmd_bound(g, b_N, b_d, b_gamma, b_phi, b_delta, b_eps, b_form, b_constants, b_csv);
    if (app.got_subcommand("calibrate-omega")) return cmd_calibrate(g);
    if (*prof) return cmd_profile(p_emb, p_lbl, p_N, p_delta);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return kPrecondition;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return kPrecondition;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return kPrecondition;
  }
  return kConfig;
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gpolab/gpoloss.hpp"
#include "gpolab/prefdata.hpp"
#include "gpolab/risk.hpp"
#include "gpolab/trainer.hpp"

namespace gpolab {

/// One experiment grid: losses x gammas x Ns x epsilons, each cell run
/// for `trials` independent trials.
struct SweepConfig {
  int d = 512;
  double phi = 1.0471975511965976;  // pi/3
  std::vector<double> gammas{1.0};
  std::vector<Eigen::Index> Ns{2000};
  std::vector<LossKind> losses{LossKind::Dpo};
  std::vector<double> eps_grid{0.0};  // flip rates, or calibration targets under uncertain noise
  int trials = 100;
  std::uint64_t seed = 0;
  double beta = 0.1;
  std::optional<double> learning_rate;  // empty: stable rule
  int epochs = 10;
  StopRule stop_rule = StopRule::FixedEpochs;
  double delta = 0.1;
  Eigen::Index n_test = 2000;
  NoiseKind noise = NoiseKind::Mislabel;
  TestSampling test_sampling = TestSampling::Projected;
  CalibrationOptions calibration;
  int threads = 1;

  void validate() const;
};

/// Parses reals such as "0.25", "1/8", "pi/3", "2*pi/3" or "inf".
double parse_real(const std::string& text);

/// Evenly spaced grid start, start + step, ..., stop (inclusive).
std::vector<double> linear_grid(double start, double stop, double step);

std::vector<std::string> valid_config_keys();
void apply_config_key(SweepConfig& cfg, const std::string& key, const std::string& value);

/// `key = value` lines, `#` comments, comma-separated lists.
void apply_config_stream(SweepConfig& cfg, std::istream& in);
void apply_config_file(SweepConfig& cfg, const std::filesystem::path& path);

std::vector<std::string> preset_names();
SweepConfig preset(const std::string& name);

/// The config rendered back into `key = value` lines.
std::string describe(const SweepConfig& cfg);

}  // namespace gpolab

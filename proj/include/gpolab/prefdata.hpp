#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "gpolab/linalg.hpp"
#include "gpolab/random.hpp"
#include "gpolab/vmf.hpp"

namespace gpolab {

/// Two vMF clusters of n/2 points each whose mean directions are 2 phi apart.
struct PreferencePairConfig {
  int d = 512;
  double gamma = 1.0;
  double phi = 1.0471975511965976;  // pi/3
  Eigen::Index n = 2000;

  double kappa() const { return gamma * d / 2.0; }
  void validate() const;
};

/// mu_+ = e1 cos(phi) + e2 sin(phi), mu_- = e1 cos(phi) - e2 sin(phi).
struct ClassMeans {
  Vec pos;
  Vec neg;
};
ClassMeans class_means(int d, double phi);

/// Parameters of the process that produced a generated dataset.
struct GeneratorMeta {
  Vec mu_pos;
  Vec mu_neg;
  double kappa = 0.0;
  double gamma = 0.0;
  double phi = 0.0;

  /// kappa (mu_+ - mu_-): the true reward direction.
  Vec reward_direction() const { return kappa * (mu_pos - mu_neg); }
};

enum class NoiseKind { None, Mislabel, Uncertain };

/// Sign inside the eps_omega sigmoid argument for the sin(2 phi) term.
enum class SignConvention { Additive, Subtractive };

struct NoiseMeta {
  NoiseKind kind = NoiseKind::None;
  double value = 0.0;  // epsilon or omega
  std::uint64_t seed = 0;
};

std::string to_string(NoiseKind kind);

/// Embeddings with clean and noisy orientation signs. Orientation +1 means
/// the clean label prefers y_+ over y_-.
struct PreferenceDataset {
  EmbeddingMatrix x;
  SignVector clean;
  SignVector noisy;
  NoiseMeta noise;
  std::optional<GeneratorMeta> generator;

  Eigen::Index size() const { return x.rows(); }
  int dim() const { return static_cast<int>(x.cols()); }
  Eigen::Index flip_count() const { return (clean.array() != noisy.array()).count(); }
};

PreferenceDataset generate_clean(const PreferencePairConfig& config, RandomStream& rng);

/// Flips each current noisy orientation with probability epsilon. One
/// uniform u per row; the flip event is u < eps for eps <= 1/2 and
/// u >= 1 - eps above, so eps and 1 - eps give exact complements on a
/// shared stream.
PreferenceDataset apply_mislabel(PreferenceDataset ds, double epsilon, RandomStream& rng);

/// Resamples orientations with P(+1) = sigmoid(r^T x / omega), where r is
/// kappa (mu_+ - mu_-) for generated data or the supplied reward direction.
/// omega = 0 gives sign(r^T x); omega = +inf gives a fair coin.
PreferenceDataset apply_uncertain(PreferenceDataset ds, double omega, RandomStream& rng,
                                  const std::optional<Vec>& reward_direction = std::nullopt);

/// Closed-form approximate flip rate induced by temperature omega.
double eps_omega(double omega, double gamma, int d, double phi,
                 SignConvention convention = SignConvention::Subtractive);
double eps_omega(double omega, const VmfParams& params, double phi,
                 SignConvention convention = SignConvention::Subtractive);

/// What a calibrated flip is measured against: the deterministic
/// (omega = 0) label of the reward model, or the generating cluster.
enum class FlipReference { RewardSign, ClusterLabel };

struct CalibrationOptions {
  Eigen::Index n_probe = 100000;
  double tolerance = 1e-3;
  int max_iterations = 200;
  FlipReference reference = FlipReference::RewardSign;
};

struct OmegaCalibration {
  double target = 0.0;
  double omega = 0.0;     // +inf encodes the fair-coin limit
  double realized = 0.0;  // mean flip probability over the probe at omega
  int iterations = 0;
};

/// Signed reward margins c_i of the probe; a probe point flips at
/// temperature omega with probability sigmoid(-c_i / omega).
Vec calibration_probe(const PreferencePairConfig& config, const std::optional<Vec>& reward_direction,
                      FlipReference reference, Eigen::Index n_probe, RandomStream& rng);

double mean_flip_probability(const Vec& probe, double omega);

OmegaCalibration calibrate_omega_on_probe(double target_eps, const Vec& probe,
                                          const CalibrationOptions& options = {});

OmegaCalibration calibrate_omega(double target_eps, const PreferencePairConfig& config,
                                 const std::optional<Vec>& reward_direction, RandomStream& rng,
                                 const CalibrationOptions& options = {});

/// Mean of rows with orientation +1 minus mean of rows with orientation -1.
Vec class_mean_difference(const PreferenceDataset& ds, bool use_noisy);

/// Writes <prefix>.emb (EMB1), <prefix>.lbl (LBL1) and <prefix>.meta (key=value).
void save_dataset(const std::filesystem::path& prefix, const PreferenceDataset& ds);
PreferenceDataset load_dataset(const std::filesystem::path& prefix);

}  // namespace gpolab

#pragma once

#include <string>

#include "gpolab/bounds.hpp"
#include "gpolab/linalg.hpp"

namespace gpolab {

/// Norm uniformity and directional concentration of a labelled embedding
/// matrix. Norms are taken on the raw rows; everything directional is
/// computed after normalizing each row.
struct GeometryProfile {
  double avg_norm = 0.0;
  double norm_std = 0.0;
  double norm_variance = 0.0;
  double avg_cosine_to_class_mean = 0.0;
  double cosine_variance = 0.0;
  double resultant_pos = 0.0;  // mean resultant length per class
  double resultant_neg = 0.0;
  double kappa_hat = 0.0;      // +inf when a class is a single direction
  double gamma_hat = 0.0;
  double phi_hat = 0.0;
  Eigen::Index n_pos = 0;
  Eigen::Index n_neg = 0;
  int d = 0;
};

/// kappa ~ R (d - R^2) / (1 - R^2).
double estimate_kappa(double resultant_length, int d);

GeometryProfile profile(const EmbeddingMatrix& embeddings, const SignVector& labels);

struct RobustnessVerdict {
  BoundReport threshold;
  std::string verdict;
};

RobustnessVerdict robustness_verdict(const GeometryProfile& p, double N, double delta);

/// Published statistics of post-norm LLM embeddings, kept for display
/// next to user profiles. The variance row is ambiguous in the source
/// (it may be a standard deviation) and is stored under its printed name.
struct ReferenceProfile {
  const char* source;
  double avg_norm;
  double norm_variance_as_printed;
  double avg_cosine;
  double cosine_variance;
};

inline constexpr ReferenceProfile kLlamaPersonaReference{"Llama-3.1-8B, Anthropic persona suite", 139.6, 0.9635, 0.9557,
                                                         8.963e-5};

}  // namespace gpolab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pot/augment.hpp"
#include "pot/autodiff.hpp"
#include "pot/certify.hpp"
#include "pot/encoder.hpp"
#include "pot/graph.hpp"

namespace pot {

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 5e-4;
  double tau = 0.5;
  double kappa = 0.0;  // weight of the compactness regularizer
  AugmentConfig augment;
  int pot_batch = -1;  // nodes per step in the regularizer; <=0 means all
  std::uint64_t seed = 0;
  int hidden_dim = 64;
  int output_dim = 32;
  int projector_dim = 32;
  double gamma = 0.25;
  BoundMode bound_mode = BoundMode::kPropagated;
};

struct TrainLogRow {
  int epoch = 0;
  double infonce = 0, pot = 0, total = 0;
  double mean_f_g1 = 0, mean_f_g2 = 0;  // mean certified compactness
};

struct TrainLog {
  std::vector<TrainLogRow> rows;
  void write_csv(const std::string& path) const;
};

struct TrainResult {
  EncoderParams encoder;
  ProjectorParams projector;
  TrainLog log;
};

// First-moment/second-moment adaptive optimizer (decay 0.9/0.999, eps 1e-8)
// over a fixed parameter list; absent gradients act as zeros.
class Adam {
 public:
  Adam(std::vector<Tensor> params, double lr);
  void step();
  void zero_grad();

 private:
  std::vector<Tensor> params_;
  std::vector<Matrix> m_, v_;
  double lr_;
  long t_ = 0;
};

// Two-view contrastive training with the optional certified-compactness
// regularizer; deterministic per (config, seed).
TrainResult train(const Graph& g, const TrainConfig& cfg);

struct StudyResult {
  Vector per_node_mean;  // mean per-node contrastive term over the samples
  double q25 = 0, q50 = 0, q75 = 0;
};

// Distribution of per-node contrastive terms under resampled augmentation
// pairs with the model frozen.
StudyResult imbalance_study(const EncoderParams& p, const ProjectorParams& pp,
                            const Graph& g, const TrainConfig& cfg,
                            int n_samples = 500);

struct DegreeBucket {
  int degree = 0;
  int count = 0;
  double mean_compactness = 0;
};

// Certified compactness (mean of both directions for one seeded view pair)
// grouped by raw node degree, ascending.
std::vector<DegreeBucket> compactness_by_degree(const EncoderParams& p,
                                                const Graph& g,
                                                const TrainConfig& cfg);

struct ShiftStudyResult {
  StudyResult baseline;     // trained with kappa = 0
  StudyResult regularized;  // trained with the config's kappa
};

// Paired-train comparison of the per-node contrastive distribution.
ShiftStudyResult infonce_shift_study(const Graph& g, const TrainConfig& cfg,
                                     int n_samples = 500);

// Linear-interpolation quantile of an unsorted sample (p in [0,1]).
double quantile(Vector values, double p);

}  // namespace pot

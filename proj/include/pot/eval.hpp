#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pot/graph.hpp"
#include "pot/util.hpp"

namespace pot {

struct ClassifierParams {
  Matrix w;             // d×C
  Eigen::RowVectorXd b;  // C
};

struct FitResult {
  ClassifierParams params;
  std::vector<double> loss_history;  // objective before each step
  std::vector<std::string> warnings;
};

// Multinomial logistic regression on frozen embeddings: full-batch gradient
// descent on cross-entropy plus an l2 penalty on the weights (not the bias).
// Deterministic per seed.
FitResult fit_logreg(const Matrix& z, const Eigen::VectorXi& labels,
                     const std::vector<std::uint8_t>& train_mask,
                     int class_count, int epochs = 1000, double lr = 0.01,
                     double l2 = 1e-4, std::uint64_t seed = 0);

// Argmax of the logits; ties go to the lowest class index.
Eigen::VectorXi predict(const ClassifierParams& c, const Matrix& z);

struct F1Scores {
  double micro = 0, macro = 0;
};

// Micro: pooled TP / (TP + (FP+FN)/2). Macro: unweighted mean of per-class
// F1; a class with no support and no predictions contributes 0.
F1Scores f1_scores(const Eigen::VectorXi& predicted,
                   const Eigen::VectorXi& truth, int class_count);

struct EvalSummary {
  double micro_mean = 0, micro_std = 0;
  double macro_mean = 0, macro_std = 0;
  int n_fits = 0;
};

// Averages test-split F1 over several seeded classifier fits (sample std).
EvalSummary evaluate_embedding(const Matrix& z, const Eigen::VectorXi& labels,
                               const SplitMasks& masks, int class_count,
                               int n_fits = 5, int epochs = 1000,
                               double lr = 0.01, double l2 = 1e-4,
                               std::uint64_t seed = 0);

}  // namespace pot

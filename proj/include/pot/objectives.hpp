#pragma once

#include "pot/autodiff.hpp"
#include "pot/encoder.hpp"
#include "pot/util.hpp"

namespace pot {

struct InfoNceResult {
  Tensor loss;      // 1×1, differentiable
  Vector per_node;  // symmetrized per-node terms; mean equals loss
};

// Contrastive loss over two views: cosine similarities of projected rows at
// temperature tau; for each anchor the positive is its counterpart row, the
// negatives are every other row of both views. Symmetrized over views.
InfoNceResult infonce_loss(const Tensor& z1, const Tensor& z2,
                           const ProjectorParams& pp, double tau);

// Binary cross-entropy toward the all-ones target on two compactness score
// vectors, averaged over the two directions; each side sums
// softplus(-score_i) over nodes.
Tensor pot_loss(const Tensor& scores_view1, const Tensor& scores_view2);

// (1-kappa) * contrastive + kappa * regularizer, kappa in [0, 1].
Tensor total_loss(const Tensor& infonce, const Tensor& pot, double kappa);

}  // namespace pot

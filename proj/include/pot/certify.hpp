#pragma once

#include "pot/augment.hpp"
#include "pot/autodiff.hpp"
#include "pot/encoder.hpp"
#include "pot/graph.hpp"
#include "pot/util.hpp"

namespace pot {

// Per-node contrast direction: own normalized embedding minus the mean of
// all other rows. Treated as a gradient-blocked constant everywhere.
struct ContrastWeight {
  Matrix w;  // N×d2
};

ContrastWeight contrast_weight(const Matrix& z_fixed);

// How the layer-2 pre-activation box treats the layer-1 output:
//   kRealized   — use the activations of one realized augmented view
//                 (algorithm-literal order; fast, but the box does not cover
//                 every feasible augmentation),
//   kPropagated — push the layer-1 box through the monotone activation and
//                 bound the bilinear product over both boxes (sound).
enum class BoundMode { kRealized, kPropagated };

BoundMode bound_mode_from_string(const std::string& s);
std::string to_string(BoundMode m);

struct PreActivationBounds {
  Matrix p1_lower, p1_upper;  // N×d1
  Matrix p2_lower, p2_upper;  // N×d2
};

// Entrywise pre-activation boxes of both layers over the message-passing box
// [L, U]. a_realized supplies the layer-1 output in kRealized mode.
PreActivationBounds preactivation_bounds(const EncoderParams& p,
                                         const Matrix& x,
                                         const MessagePassingBounds& mb,
                                         const Matrix& a_realized,
                                         BoundMode mode = BoundMode::kRealized);

// Linear relaxation of the leaky activation on each pre-activation box:
// lower line alpha_lower*(p + beta_lower) <= act(p) <= alpha_upper*(p +
// beta_upper) on the box. Boxes narrower than 1e-9 are treated as fixed
// inputs (slope by the sign of the upper end, offset zero).
struct LayerRelaxation {
  Matrix alpha_lower, alpha_upper, beta_lower, beta_upper;
};

struct RelaxationParams {
  LayerRelaxation layer1;  // N×d1
  LayerRelaxation layer2;  // N×d2
};

RelaxationParams relaxation_params(const PreActivationBounds& pb,
                                   double gamma);

// Certified lower bound on each node's contrast score over every
// message-passing matrix in the box: linearizes both activation layers with
// the relaxation (selection by coefficient signs, per the node whose
// activation is relaxed) and minimizes the resulting bilinear form over the
// box entrywise. Differentiable in the encoder weights; relaxation
// parameters, selections, and the contrast direction are constants.
Tensor node_compactness(const EncoderParams& p, const Graph& g,
                        const MessagePassingBounds& mb,
                        const RelaxationParams& rp, const ContrastWeight& w);

// Exact minimum by enumerating every budget-feasible edge-dropped subgraph.
// Refuses graphs with more than 20 edges.
Vector brute_force_compactness(const EncoderParams& p, const Graph& g,
                               const BudgetSpec& b, const ContrastWeight& w);

// Both certification directions for one sampled view pair. f_g2 bounds the
// view-1 scores against the view-2 contrast direction and vice versa.
struct CompactnessPair {
  Tensor f_g1, f_g2;
  Vector realized_g1, realized_g2;  // scores of the realized views
};

CompactnessPair compactness_pair(const EncoderParams& p, const Graph& g,
                                 const MessagePassingBounds& mb,
                                 const Matrix& a1, const Matrix& a2,
                                 const Matrix& z1, const Matrix& z2,
                                 BoundMode mode);

}  // namespace pot

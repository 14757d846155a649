#pragma once

#include <cstdint>
#include <string>

#include "pot/autodiff.hpp"
#include "pot/util.hpp"

namespace pot {

// Two-layer graph convolution: Z = act(A act(A X W1 + b1) W2 + b2) with a
// fixed-slope leaky activation. Weight tensors carry gradients.
struct EncoderParams {
  Tensor w1, b1;  // F×d1, 1×d1
  Tensor w2, b2;  // d1×d2, 1×d2
  double gamma = 0.25;

  int input_dim() const { return w1.rows(); }
  int hidden_dim() const { return w1.cols(); }
  int output_dim() const { return w2.cols(); }
};

// Two-layer projector (affine -> ELU -> affine) for the contrastive head.
struct ProjectorParams {
  Tensor w1, b1;  // d2×dp, 1×dp
  Tensor w2, b2;  // dp×do, 1×do
};

EncoderParams init_encoder(int input_dim, int hidden_dim, int output_dim,
                           double gamma, std::uint64_t seed);
ProjectorParams init_projector(int input_dim, int hidden_dim, int output_dim,
                               std::uint64_t seed);

// A_hat must be the dense symmetric nonnegative message-passing matrix.
Tensor gcn_forward(const EncoderParams& p, const Matrix& x,
                   const Matrix& a_hat);

Tensor project(const ProjectorParams& pp, const Tensor& z);

// Convenience: all trainable tensors in a stable order.
std::vector<Tensor> trainable(const EncoderParams& p,
                              const ProjectorParams& pp);

void save_checkpoint(const EncoderParams& p, const ProjectorParams& pp,
                     const std::string& path);
void load_checkpoint(const std::string& path, EncoderParams& p,
                     ProjectorParams& pp);

}  // namespace pot

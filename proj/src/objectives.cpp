#include "pot/objectives.hpp"

#include "pot/errors.hpp"

namespace pot {

InfoNceResult infonce_loss(const Tensor& z1, const Tensor& z2,
                           const ProjectorParams& pp, double tau) {
  if (tau <= 0.0)
    fail(ErrorKind::kValidation, "temperature must be positive");
  if (z1.rows() != z2.rows() || z1.cols() != z2.cols())
    fail(ErrorKind::kDimension, "infonce_loss: view shapes differ");

  const Tensor p1 = rowwise_l2_normalize(project(pp, z1));
  const Tensor p2 = rowwise_l2_normalize(project(pp, z2));

  const double inv_tau = 1.0 / tau;
  const Tensor s12 = scale(matmul(p1, transpose(p2)), inv_tau);
  const Tensor s11 = scale(matmul(p1, transpose(p1)), inv_tau);
  const Tensor s22 = scale(matmul(p2, transpose(p2)), inv_tau);

  const Tensor e12 = exp(s12);
  const Tensor e11 = exp(s11);
  const Tensor e22 = exp(s22);
  const Tensor e21 = transpose(e12);

  // denominator: all cross-view pairs (positive included) plus same-view
  // pairs excluding the anchor itself
  const Tensor denom1 =
      add(row_sum(e12), sub(row_sum(e11), take_diagonal(e11)));
  const Tensor denom2 =
      add(row_sum(e21), sub(row_sum(e22), take_diagonal(e22)));

  const Tensor pos = take_diagonal(s12);  // equal for both directions
  const Tensor l1 = sub(log(denom1), pos);
  const Tensor l2 = sub(log(denom2), pos);

  const Tensor per_node = scale(add(l1, l2), 0.5);

  InfoNceResult r;
  r.loss = mean_all(per_node);
  r.per_node = per_node.value().col(0);
  return r;
}

Tensor pot_loss(const Tensor& scores_view1, const Tensor& scores_view2) {
  if (scores_view1.cols() != 1 || scores_view2.cols() != 1)
    fail(ErrorKind::kDimension, "pot_loss: score vectors must be N x 1");
  if (scores_view1.rows() != scores_view2.rows())
    fail(ErrorKind::kDimension, "pot_loss: score vector lengths differ");
  const Tensor bce1 = sum_all(softplus(neg(scores_view1)));
  const Tensor bce2 = sum_all(softplus(neg(scores_view2)));
  return scale(add(bce1, bce2), 0.5);
}

Tensor total_loss(const Tensor& infonce, const Tensor& pot, double kappa) {
  if (kappa < 0.0 || kappa > 1.0)
    fail(ErrorKind::kValidation, "kappa must lie in [0, 1]");
  return add(scale(infonce, 1.0 - kappa), scale(pot, kappa));
}

}  // namespace pot

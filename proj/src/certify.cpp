#include "pot/certify.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "pot/errors.hpp"

namespace pot {

namespace {

Matrix leaky(const Matrix& m, double gamma) {
  return m.unaryExpr([gamma](double v) { return v >= 0 ? v : gamma * v; });
}

Matrix positive_part(const Matrix& m) { return m.cwiseMax(0.0); }
Matrix negative_part(const Matrix& m) { return m.cwiseMin(0.0); }

}  // namespace

ContrastWeight contrast_weight(const Matrix& z) {
  const int n = static_cast<int>(z.rows());
  if (n < 2)
    fail(ErrorKind::kValidation,
         "contrast_weight needs at least two nodes");
  Matrix zbar(z.rows(), z.cols());
  for (int i = 0; i < n; ++i) {
    const double norm = z.row(i).norm();
    if (norm < 1e-12)
      fail(ErrorKind::kDegenerate,
           "contrast_weight: embedding row " + std::to_string(i) +
               " has norm < 1e-12");
    zbar.row(i) = z.row(i) / norm;
  }
  const Eigen::RowVectorXd total = zbar.colwise().sum();
  const double inv = 1.0 / (n - 1);
  ContrastWeight w;
  w.w = (1.0 + inv) * zbar;
  w.w.rowwise() -= inv * total;
  return w;
}

BoundMode bound_mode_from_string(const std::string& s) {
  if (s == "realized") return BoundMode::kRealized;
  if (s == "propagated") return BoundMode::kPropagated;
  fail(ErrorKind::kValidation,
       "unknown bound mode '" + s + "' (realized | propagated)");
}

std::string to_string(BoundMode m) {
  return m == BoundMode::kRealized ? "realized" : "propagated";
}

PreActivationBounds preactivation_bounds(const EncoderParams& p,
                                         const Matrix& x,
                                         const MessagePassingBounds& mb,
                                         const Matrix& a_realized,
                                         BoundMode mode) {
  const int n = static_cast<int>(x.rows());
  if (mb.lower.rows() != n || mb.lower.cols() != n ||
      mb.upper.rows() != n || mb.upper.cols() != n)
    fail(ErrorKind::kDimension,
         "preactivation_bounds: bound matrices must be NxN");
  if (a_realized.rows() != n || a_realized.cols() != n)
    fail(ErrorKind::kDimension,
         "preactivation_bounds: realized matrix must be NxN");
  if (x.cols() != p.w1.rows())
    fail(ErrorKind::kDimension,
         "preactivation_bounds: feature dim != encoder input dim");

  const Matrix& w1 = p.w1.value();
  const Matrix& w2 = p.w2.value();
  const Eigen::RowVectorXd b1 = p.b1.value().row(0);
  const Eigen::RowVectorXd b2 = p.b2.value().row(0);

  PreActivationBounds pb;
  const Matrix xw = x * w1;
  const Matrix xw_pos = positive_part(xw);
  const Matrix xw_neg = negative_part(xw);
  pb.p1_lower = mb.lower * xw_pos + mb.upper * xw_neg;
  pb.p1_lower.rowwise() += b1;
  pb.p1_upper = mb.upper * xw_pos + mb.lower * xw_neg;
  pb.p1_upper.rowwise() += b1;

  // Row-box of the layer-2 affine input: each row j contributes a value in
  // [c_lower, c_upper]_j before being mixed by a box-bounded nonnegative
  // message-passing row.
  Matrix c_lower, c_upper;
  if (mode == BoundMode::kRealized) {
    Matrix h = a_realized * xw;
    h.rowwise() += b1;
    h = leaky(h, p.gamma);
    c_lower = h * w2;
    c_upper = c_lower;
  } else {
    const Matrix h_lower = leaky(pb.p1_lower, p.gamma);  // act is monotone
    const Matrix h_upper = leaky(pb.p1_upper, p.gamma);
    const Matrix w2_pos = positive_part(w2);
    const Matrix w2_neg = negative_part(w2);
    c_lower = h_lower * w2_pos + h_upper * w2_neg;
    c_upper = h_upper * w2_pos + h_lower * w2_neg;
  }
  pb.p2_lower = mb.lower * positive_part(c_lower) +
                mb.upper * negative_part(c_lower);
  pb.p2_lower.rowwise() += b2;
  pb.p2_upper = mb.upper * positive_part(c_upper) +
                mb.lower * negative_part(c_upper);
  pb.p2_upper.rowwise() += b2;
  return pb;
}

namespace {

LayerRelaxation relax_layer(const Matrix& lower, const Matrix& upper,
                            double gamma) {
  LayerRelaxation r;
  const int rows = static_cast<int>(lower.rows());
  const int cols = static_cast<int>(lower.cols());
  r.alpha_lower.resize(rows, cols);
  r.alpha_upper.resize(rows, cols);
  r.beta_lower = Matrix::Zero(rows, cols);
  r.beta_upper = Matrix::Zero(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double l = lower(i, j);
      const double u = upper(i, j);
      if (u < l)
        fail(ErrorKind::kContract,
             "relaxation_params: inverted pre-activation box");
      if (u - l < 1e-9) {
        // effectively a fixed input: exact slope, no offset
        const double a = u >= 0 ? 1.0 : gamma;
        r.alpha_lower(i, j) = a;
        r.alpha_upper(i, j) = a;
      } else if (l >= 0) {
        r.alpha_lower(i, j) = 1.0;
        r.alpha_upper(i, j) = 1.0;
      } else if (u <= 0) {
        r.alpha_lower(i, j) = gamma;
        r.alpha_upper(i, j) = gamma;
      } else {
        const double slope = (u - gamma * l) / (u - l);
        r.alpha_lower(i, j) = slope;
        r.alpha_upper(i, j) = slope;
        r.beta_upper(i, j) = (gamma - 1.0) * u * l / (u - gamma * l);
      }
    }
  }
  return r;
}

}  // namespace

RelaxationParams relaxation_params(const PreActivationBounds& pb,
                                   double gamma) {
  if (gamma < 0.0 || gamma >= 1.0)
    fail(ErrorKind::kValidation, "activation slope must lie in [0, 1)");
  RelaxationParams rp;
  rp.layer1 = relax_layer(pb.p1_lower, pb.p1_upper, gamma);
  rp.layer2 = relax_layer(pb.p2_lower, pb.p2_upper, gamma);
  return rp;
}

namespace {

// Everything the bound's backward pass needs, captured once per forward.
struct CompactnessCache {
  Matrix x;                 // N×F
  Matrix g_mat;             // X·W1
  Matrix wt2;               // N×d1: effective layer-2 weight rows
  Matrix lam2;              // N×d2: contrast ⊙ selected layer-2 slope
  Vector b1;                // d1
  Matrix alpha1_lower, alpha1_upper;  // layer-1 slope tables
  Matrix beta1_lower, beta1_upper;    // layer-1 offset tables
  Matrix box_lower, box_upper;        // message-passing box
  std::vector<std::vector<int>> nbr;  // self-inclusive neighbor lists
  // Box-corner selections resolved during the forward pass:
  // sel_outer[i][k1] multiplies the k1-th neighbor term of node i,
  // sel_inner[i][k1][k2] the k2-th inner coefficient of that term.
  std::vector<std::vector<double>> sel_outer;
  std::vector<std::vector<std::vector<double>>> sel_inner;
};

// Layer-1 slope/offset for relaxed node j, selected entrywise by the sign of
// the effective layer-2 weight row s.
void select_layer1(const CompactnessCache& c, const Eigen::RowVectorXd& s,
                   int j, Vector& lam1, Vector& del1) {
  const int d1 = static_cast<int>(s.size());
  for (int l = 0; l < d1; ++l) {
    if (s(l) >= 0) {
      lam1(l) = c.alpha1_lower(j, l);
      del1(l) = c.beta1_lower(j, l);
    } else {
      lam1(l) = c.alpha1_upper(j, l);
      del1(l) = c.beta1_upper(j, l);
    }
  }
}

}  // namespace

Tensor node_compactness(const EncoderParams& p, const Graph& g,
                        const MessagePassingBounds& mb,
                        const RelaxationParams& rp, const ContrastWeight& w) {
  const int n = g.num_nodes;
  const int d1 = p.hidden_dim();
  const int d2 = p.output_dim();
  if (w.w.rows() != n || w.w.cols() != d2)
    fail(ErrorKind::kDimension,
         "node_compactness: contrast weight must be N x output dim");
  if (mb.lower.rows() != n || mb.lower.cols() != n)
    fail(ErrorKind::kDimension, "node_compactness: box must be NxN");
  if (rp.layer1.alpha_lower.rows() != n ||
      rp.layer1.alpha_lower.cols() != d1 ||
      rp.layer2.alpha_lower.rows() != n || rp.layer2.alpha_lower.cols() != d2)
    fail(ErrorKind::kDimension,
         "node_compactness: relaxation tables do not match encoder dims");
  if (g.feature_dim() != p.input_dim())
    fail(ErrorKind::kDimension,
         "node_compactness: feature dim != encoder input dim");

  auto cache = std::make_shared<CompactnessCache>();
  cache->x = g.x();
  cache->b1 = p.b1.value().row(0).transpose();
  cache->alpha1_lower = rp.layer1.alpha_lower;
  cache->alpha1_upper = rp.layer1.alpha_upper;
  cache->beta1_lower = rp.layer1.beta_lower;
  cache->beta1_upper = rp.layer1.beta_upper;
  cache->box_lower = mb.lower;
  cache->box_upper = mb.upper;
  cache->nbr = neighbor_lists(g);

  // Layer-2 linearization, selected entrywise by the contrast sign: a
  // nonnegative contrast entry takes the lower relaxation line, a negative
  // one the upper. Slopes/offsets are constants by contract.
  Matrix sel_lam2(n, d2), sel_del2(n, d2);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < d2; ++m) {
      if (w.w(i, m) >= 0) {
        sel_lam2(i, m) = rp.layer2.alpha_lower(i, m);
        sel_del2(i, m) = rp.layer2.beta_lower(i, m);
      } else {
        sel_lam2(i, m) = rp.layer2.alpha_upper(i, m);
        sel_del2(i, m) = rp.layer2.beta_upper(i, m);
      }
    }
  }
  cache->lam2 = w.w.cwiseProduct(sel_lam2);

  const Matrix& w2 = p.w2.value();
  const Vector b2 = p.b2.value().row(0).transpose();
  cache->wt2 = cache->lam2 * w2.transpose();                    // N×d1
  const Vector bt2 = cache->lam2 * b2 +
                     cache->lam2.cwiseProduct(sel_del2).rowwise().sum();
  cache->g_mat = cache->x * p.w1.value();                       // N×d1

  cache->sel_outer.resize(n);
  cache->sel_inner.resize(n);
  Vector f(n);

  const CompactnessCache& c = *cache;
  parallel_for(n, [&](int i) {
    const Eigen::RowVectorXd s = c.wt2.row(i);
    Vector lam1(d1), del1(d1);
    const auto& nbr_i = c.nbr[i];
    auto& outer_i = cache->sel_outer[i];
    auto& inner_i = cache->sel_inner[i];
    outer_i.resize(nbr_i.size());
    inner_i.resize(nbr_i.size());
    double fi = bt2(i);
    for (std::size_t k1 = 0; k1 < nbr_i.size(); ++k1) {
      const int j1 = nbr_i[k1];
      select_layer1(c, s, j1, lam1, del1);
      const Vector lam_eff = s.transpose().cwiseProduct(lam1);
      double b_inner = lam_eff.dot(c.b1 + del1);
      const auto& nbr_j1 = c.nbr[j1];
      auto& inner_k1 = inner_i[k1];
      inner_k1.resize(nbr_j1.size());
      for (std::size_t k2 = 0; k2 < nbr_j1.size(); ++k2) {
        const int j2 = nbr_j1[k2];
        const double coeff = c.g_mat.row(j2).dot(lam_eff);
        const double a_in = coeff > 0 ? c.box_lower(j2, j1)
                                      : c.box_upper(j2, j1);
        inner_k1[k2] = a_in;
        b_inner += a_in * coeff;
      }
      const double a_out =
          b_inner >= 0 ? c.box_lower(j1, i) : c.box_upper(j1, i);
      outer_i[k1] = a_out;
      fi += a_out * b_inner;
    }
    f(i) = fi;
  });

  Matrix out = f;

  const int nw1 = node_handle(p.w1);
  const int nb1 = node_handle(p.b1);
  const int nw2 = node_handle(p.w2);
  const int nb2 = node_handle(p.b2);
  if (nw1 < 0 && nb1 < 0 && nw2 < 0 && nb2 < 0)
    return Tensor(std::move(out));

  Tape* tp = Tape::active();
  const int node = tp->record([tp, cache, nw1, nb1, nw2, nb2,
                               n, d1, d2](const Matrix& grad_out) {
    const CompactnessCache& cc = *cache;
    Matrix ghat = Matrix::Zero(n, d1);        // adjoint of X·W1
    Matrix w2_grad = Matrix::Zero(d1, d2);
    Eigen::RowVectorXd b1_grad = Eigen::RowVectorXd::Zero(d1);
    Eigen::RowVectorXd b2_grad = Eigen::RowVectorXd::Zero(d2);
    Vector lam1(d1), del1(d1);
    for (int i = 0; i < n; ++i) {
      const double gi = grad_out(i, 0);
      if (gi == 0.0) continue;
      b2_grad += gi * cc.lam2.row(i);
      const Eigen::RowVectorXd s = cc.wt2.row(i);
      Vector wt2_grad = Vector::Zero(d1);
      const auto& nbr_i = cc.nbr[i];
      for (std::size_t k1 = 0; k1 < nbr_i.size(); ++k1) {
        const int j1 = nbr_i[k1];
        const double upstream = gi * cc.sel_outer[i][k1];
        if (upstream == 0.0) continue;
        select_layer1(cc, s, j1, lam1, del1);
        const Vector lam_eff = s.transpose().cwiseProduct(lam1);
        Vector d_lam_eff = cc.b1 + del1;  // d(inner)/d(lam_eff)
        const auto& nbr_j1 = cc.nbr[j1];
        for (std::size_t k2 = 0; k2 < nbr_j1.size(); ++k2) {
          const int j2 = nbr_j1[k2];
          const double a_in = cc.sel_inner[i][k1][k2];
          d_lam_eff += a_in * cc.g_mat.row(j2).transpose();
          ghat.row(j2) += (upstream * a_in) * lam_eff.transpose();
        }
        b1_grad += upstream * lam_eff.transpose();
        wt2_grad += upstream * d_lam_eff.cwiseProduct(lam1);
      }
      w2_grad += wt2_grad * cc.lam2.row(i);
    }
    if (nw1 >= 0) tp->accumulate(nw1, cc.x.transpose() * ghat);
    if (nb1 >= 0) tp->accumulate(nb1, b1_grad);
    if (nw2 >= 0) tp->accumulate(nw2, w2_grad);
    if (nb2 >= 0) tp->accumulate(nb2, b2_grad);
  });
  return from_op(std::move(out), node);
}

Vector brute_force_compactness(const EncoderParams& p, const Graph& g,
                               const BudgetSpec& b, const ContrastWeight& w) {
  const int n = g.num_nodes;
  const int num_edges = g.num_edges();
  if (num_edges > 20)
    fail(ErrorKind::kGuard,
         "brute_force_compactness refuses graphs with more than 20 edges "
         "(got " +
             std::to_string(num_edges) + ")");
  if (b.per_node.size() != n)
    fail(ErrorKind::kDimension, "per-node budget length != node count");
  if (w.w.rows() != n || w.w.cols() != p.output_dim())
    fail(ErrorKind::kDimension,
         "brute_force_compactness: contrast weight shape mismatch");

  const Matrix xw1 = g.x() * p.w1.value();  // N×d1
  const Matrix& w2 = p.w2.value();
  const Eigen::RowVectorXd b1 = p.b1.value().row(0);
  const Eigen::RowVectorXd b2 = p.b2.value().row(0);
  const double gamma = p.gamma;
  const DegreeInfo base_deg = degree_info(g);

  Vector best = Vector::Constant(n, std::numeric_limits<double>::infinity());
  std::vector<int> dropped_at(n);

  const std::uint32_t mask_end = 1u << num_edges;
  for (std::uint32_t mask = 0; mask < mask_end; ++mask) {
    if (static_cast<int>(__builtin_popcount(mask)) > b.global) continue;
    std::fill(dropped_at.begin(), dropped_at.end(), 0);
    bool feasible = true;
    for (int e = 0; e < num_edges && feasible; ++e) {
      if (mask & (1u << e)) {
        const auto& [u, v] = g.edges[e];
        if (++dropped_at[u] > b.per_node(u)) feasible = false;
        if (++dropped_at[v] > b.per_node(v)) feasible = false;
      }
    }
    if (!feasible) continue;

    Vector eff_deg(n);
    for (int i = 0; i < n; ++i)
      eff_deg(i) = static_cast<double>(base_deg.with_self_loop(i)) -
                   static_cast<double>(dropped_at[i]);

    // Message passing over the kept edges without materializing the matrix.
    // Entry formulas match normalized_message_passing bit for bit so that a
    // zero-drop mask reproduces the unaugmented propagation exactly.
    auto propagate = [&](const Matrix& rows) {
      Matrix out(n, rows.cols());
      for (int i = 0; i < n; ++i) out.row(i) = (1.0 / eff_deg(i)) * rows.row(i);
      for (int e = 0; e < num_edges; ++e) {
        if (mask & (1u << e)) continue;
        const auto& [u, v] = g.edges[e];
        const double a_uv = 1.0 / std::sqrt(eff_deg(u) * eff_deg(v));
        out.row(u) += a_uv * rows.row(v);
        out.row(v) += a_uv * rows.row(u);
      }
      return out;
    };

    Matrix h = propagate(xw1);
    h.rowwise() += b1;
    h = leaky(h, gamma);
    Matrix z = propagate(h * w2);
    z.rowwise() += b2;
    z = leaky(z, gamma);

    for (int i = 0; i < n; ++i)
      best(i) = std::min(best(i), z.row(i).dot(w.w.row(i)));
  }
  return best;
}

CompactnessPair compactness_pair(const EncoderParams& p, const Graph& g,
                                 const MessagePassingBounds& mb,
                                 const Matrix& a1, const Matrix& a2,
                                 const Matrix& z1, const Matrix& z2,
                                 BoundMode mode) {
  CompactnessPair pair;
  const Matrix& x = g.x();

  // Direction "view-2 anchored": contrast from the view-2 embeddings, bound
  // over augmentations of view 1 (whose realized matrix is a1).
  const ContrastWeight w2 = contrast_weight(z2);
  const RelaxationParams rp2 =
      relaxation_params(preactivation_bounds(p, x, mb, a1, mode), p.gamma);
  pair.f_g2 = node_compactness(p, g, mb, rp2, w2);
  pair.realized_g2 = (z1.cwiseProduct(w2.w)).rowwise().sum();

  const ContrastWeight w1 = contrast_weight(z1);
  const RelaxationParams rp1 =
      relaxation_params(preactivation_bounds(p, x, mb, a2, mode), p.gamma);
  pair.f_g1 = node_compactness(p, g, mb, rp1, w1);
  pair.realized_g1 = (z2.cwiseProduct(w1.w)).rowwise().sum();
  return pair;
}

}  // namespace pot

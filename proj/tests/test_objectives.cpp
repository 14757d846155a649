#include <cmath>
#include <random>

#include "doctest.h"
#include "pot/errors.hpp"
#include "pot/objectives.hpp"
#include "support/helpers.hpp"

using namespace pot;

namespace {

ProjectorParams identity_projector(int d) {
  ProjectorParams pp;
  pp.w1 = Tensor(Matrix::Identity(d, d), true);
  pp.b1 = Tensor(Matrix::Zero(1, d), true);
  pp.w2 = Tensor(Matrix::Identity(d, d), true);
  pp.b2 = Tensor(Matrix::Zero(1, d), true);
  return pp;
}

Matrix random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace

TEST_CASE("contrastive loss has a closed form for orthonormal views") {
  // With both views equal to the identity the projected rows are orthonormal:
  // the positive similarity is 1, all negatives are 0, so every anchor
  // contributes log(1 + 2 exp(-1/tau)).
  const double tau = 0.5;
  ProjectorParams pp = identity_projector(2);
  NoGrad off;
  Tensor z(Matrix::Identity(2, 2));
  InfoNceResult r = infonce_loss(z, z, pp, tau);
  const double want = std::log(1.0 + 2.0 * std::exp(-1.0 / tau));
  CHECK(r.loss.scalar_value() == doctest::Approx(want).epsilon(1e-12));
  CHECK(r.per_node(0) == doctest::Approx(want).epsilon(1e-12));
  CHECK(r.per_node(1) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("contrastive loss matches the double-loop oracle") {
  for (int n : {2, 5, 16}) {
    ProjectorParams pp = init_projector(3, 5, 4, 50 + n);
    Matrix z1 = random_matrix(n, 3, 60 + n);
    Matrix z2 = random_matrix(n, 3, 70 + n);
    const double tau = 0.4;
    NoGrad off;
    InfoNceResult r = infonce_loss(Tensor(z1), Tensor(z2), pp, tau);
    const double want = pot::testing::naive_infonce(z1, z2, pp, tau);
    CAPTURE(n);
    CHECK(std::abs(r.loss.scalar_value() - want) < 1e-12);
  }
}

TEST_CASE("per-node terms average to the loss and are symmetric in views") {
  ProjectorParams pp = init_projector(3, 4, 3, 5);
  Matrix z1 = random_matrix(6, 3, 1);
  Matrix z2 = random_matrix(6, 3, 2);
  NoGrad off;
  InfoNceResult a = infonce_loss(Tensor(z1), Tensor(z2), pp, 0.5);
  CHECK(a.per_node.mean() == doctest::Approx(a.loss.scalar_value()));

  InfoNceResult b = infonce_loss(Tensor(z2), Tensor(z1), pp, 0.5);
  CHECK(a.loss.scalar_value() == doctest::Approx(b.loss.scalar_value()));
}

TEST_CASE("contrastive loss is differentiable") {
  ProjectorParams pp = init_projector(3, 4, 3, 9);
  Tensor z1(random_matrix(4, 3, 3), true);
  Tensor z2(random_matrix(4, 3, 4), true);

  auto value_of = [&] {
    NoGrad off;
    return infonce_loss(z1, z2, pp, 0.5).loss.scalar_value();
  };

  Tape tape;
  InfoNceResult r = infonce_loss(z1, z2, pp, 0.5);
  tape.backward(r.loss);

  const double h = 1e-6;
  for (Tensor* t : {&z1, &z2, &pp.w1, &pp.b2}) {
    const Matrix base = t->value();
    const Matrix an = t->grad();
    for (int i = 0; i < base.rows(); ++i)
      for (int j = 0; j < base.cols(); ++j) {
        Matrix pert = base;
        pert(i, j) = base(i, j) + h;
        t->set_value(pert);
        const double up = value_of();
        pert(i, j) = base(i, j) - h;
        t->set_value(pert);
        const double dn = value_of();
        t->set_value(base);
        CHECK(std::abs((up - dn) / (2 * h) - an(i, j)) < 1e-5);
      }
  }
}

TEST_CASE("temperature must be positive") {
  ProjectorParams pp = identity_projector(2);
  NoGrad off;
  Tensor z(Matrix::Identity(2, 2));
  CHECK_THROWS_AS(infonce_loss(z, z, pp, 0.0), Error);
  CHECK_THROWS_AS(infonce_loss(z, z, pp, -1.0), Error);
}

TEST_CASE("compactness regularizer at zero scores is N log 2") {
  const int n = 7;
  NoGrad off;
  Tensor s1(Matrix::Zero(n, 1)), s2(Matrix::Zero(n, 1));
  Tensor loss = pot_loss(s1, s2);
  CHECK(loss.scalar_value() == doctest::Approx(n * std::log(2.0)));
}

TEST_CASE("compactness regularizer sums softplus of negated scores") {
  Matrix s1(2, 1), s2(2, 1);
  s1 << 3.0, -1.0;
  s2 << 0.5, 2.0;
  auto sp = [](double x) { return std::log1p(std::exp(-std::abs(x))) +
                                  std::max(-x, 0.0); };
  const double want = 0.5 * ((sp(3.0) + sp(-1.0)) + (sp(0.5) + sp(2.0)));
  NoGrad off;
  CHECK(pot_loss(Tensor(s1), Tensor(s2)).scalar_value() ==
        doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("regularizer gradient is minus the sigmoid of the score, halved") {
  Tensor s1(random_matrix(5, 1, 8), true);
  Tensor s2(random_matrix(5, 1, 9), true);
  Tape tape;
  tape.backward(pot_loss(s1, s2));
  for (int i = 0; i < 5; ++i) {
    const double x1 = s1.value()(i, 0);
    CHECK(s1.grad()(i, 0) ==
          doctest::Approx(-0.5 / (1.0 + std::exp(x1))).epsilon(1e-12));
  }
}

TEST_CASE("regularizer rejects non-column inputs") {
  NoGrad off;
  Tensor bad(Matrix::Zero(3, 2)), ok(Matrix::Zero(3, 1));
  CHECK_THROWS_AS(pot_loss(bad, ok), Error);
  CHECK_THROWS_AS(pot_loss(ok, Tensor(Matrix::Zero(4, 1))), Error);
}

TEST_CASE("total loss blends the two objectives") {
  NoGrad off;
  Tensor a = Tensor::scalar(2.0), b = Tensor::scalar(10.0);
  CHECK(total_loss(a, b, 0.25).scalar_value() ==
        doctest::Approx(0.75 * 2.0 + 0.25 * 10.0));
  CHECK(total_loss(a, b, 0.0).scalar_value() == doctest::Approx(2.0));
  CHECK(total_loss(a, b, 1.0).scalar_value() == doctest::Approx(10.0));
  CHECK_THROWS_AS(total_loss(a, b, -0.1), Error);
  CHECK_THROWS_AS(total_loss(a, b, 1.1), Error);
}

#pragma once

// Shared fixtures and independent oracles for the test suites. Everything
// here is written from first principles (no calls back into the code under
// test beyond basic graph construction) so expected values stay independent.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "pot/encoder.hpp"
#include "pot/graph.hpp"
#include "pot/util.hpp"

namespace pot::testing {

// Planted-partition graph: `blocks` equal blocks of `per_block` nodes,
// independent edges with probability p_intra inside a block and p_inter
// across. Features are a block one-hot (first `blocks` columns) plus
// N(0, noise) on all `dim` columns; labels are the block ids.
inline Graph planted_partition(int per_block, int blocks, double p_intra,
                               double p_inter, int dim, double noise,
                               std::uint64_t seed) {
  const int n = per_block * blocks;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, noise);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      const bool same = (u / per_block) == (v / per_block);
      if (coin(rng) < (same ? p_intra : p_inter)) edges.emplace_back(u, v);
    }
  Matrix x = Matrix::Zero(n, dim);
  Eigen::VectorXi labels(n);
  for (int i = 0; i < n; ++i) {
    const int block = i / per_block;
    labels(i) = block;
    x(i, block % dim) = 1.0;
    for (int j = 0; j < dim; ++j) x(i, j) += gauss(rng);
  }
  return make_graph(n, std::move(edges), std::move(x), labels);
}

// Connected-ish random instance for oracle sweeps: n in [2, max_n], between
// 1 and max_e distinct edges, standard-normal features.
inline Graph random_small_graph(std::mt19937_64& rng, int max_n, int max_e,
                                int feature_dim) {
  std::uniform_int_distribution<int> nd(2, max_n);
  const int n = nd(rng);
  std::vector<std::pair<int, int>> all;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) all.emplace_back(u, v);
  std::shuffle(all.begin(), all.end(), rng);
  std::uniform_int_distribution<int> ed(
      1, std::min<int>(max_e, static_cast<int>(all.size())));
  all.resize(ed(rng));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x(n, feature_dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < feature_dim; ++j) x(i, j) = gauss(rng);
  return make_graph(n, std::move(all), std::move(x));
}

// Double-loop contrastive-loss oracle: projects both views with plain Eigen
// code, then sums -log(positive / (positive + negatives)) anchor by anchor.
inline double naive_infonce(const Matrix& z1, const Matrix& z2,
                            const ProjectorParams& pp, double tau) {
  auto project_rows = [&](const Matrix& z) {
    Matrix h = z * pp.w1.value();
    h.rowwise() += Eigen::RowVectorXd(pp.b1.value().row(0));
    h = h.unaryExpr([](double v) { return v > 0 ? v : std::expm1(v); });
    Matrix o = h * pp.w2.value();
    o.rowwise() += Eigen::RowVectorXd(pp.b2.value().row(0));
    for (int i = 0; i < o.rows(); ++i) o.row(i) /= o.row(i).norm();
    return o;
  };
  const Matrix p1 = project_rows(z1), p2 = project_rows(z2);
  auto theta = [&](const Matrix& a, int i, const Matrix& b, int j) {
    return std::exp(a.row(i).dot(b.row(j)) / tau);
  };
  const int n = static_cast<int>(z1.rows());
  double total = 0;
  for (int i = 0; i < n; ++i) {
    double den1 = 0, den2 = 0;
    for (int j = 0; j < n; ++j) {
      den1 += theta(p1, i, p2, j);
      den2 += theta(p2, i, p1, j);
      if (j != i) {
        den1 += theta(p1, i, p1, j);
        den2 += theta(p2, i, p2, j);
      }
    }
    total += 0.5 * (-std::log(theta(p1, i, p2, i) / den1) -
                    std::log(theta(p2, i, p1, i) / den2));
  }
  return total / n;
}

// Plain-Eigen two-layer forward for a fixed message-passing matrix.
inline Matrix naive_gcn(const EncoderParams& p, const Matrix& x,
                        const Matrix& a_hat) {
  auto leaky = [&](const Matrix& m) {
    const double gamma = p.gamma;
    return m.unaryExpr([gamma](double v) { return v >= 0 ? v : gamma * v; })
        .eval();
  };
  Matrix h = a_hat * (x * p.w1.value());
  h.rowwise() += Eigen::RowVectorXd(p.b1.value().row(0));
  h = leaky(h);
  Matrix z = a_hat * (h * p.w2.value());
  z.rowwise() += Eigen::RowVectorXd(p.b2.value().row(0));
  return leaky(z);
}

// Scratch file that cleans up after itself.
class TempFile {
 public:
  explicit TempFile(const std::string& tag) {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("pot_test_" + tag + "_" + std::to_string(++counter) + ".tmp"))
                .string();
  }
  ~TempFile() { std::remove(path_.c_str()); }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::string& path() const { return path_; }
  void write(const std::string& content) const {
    std::ofstream out(path_);
    out << content;
  }
  std::string read() const {
    std::ifstream in(path_);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

 private:
  std::string path_;
};

}  // namespace pot::testing

#include "pot/encoder.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "pot/errors.hpp"

namespace pot {

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (int i = 0; i < m.rows(); ++i)
    for (int c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  j["data"] = std::move(data);  // row-major
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& name) {
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    fail(ErrorKind::kMalformedInput,
         "checkpoint matrix '" + name + "' missing rows/cols/data");
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const auto& data = j.at("data");
  if (rows <= 0 || cols <= 0 ||
      static_cast<int>(data.size()) != rows * cols)
    fail(ErrorKind::kDimension,
         "checkpoint matrix '" + name + "' has inconsistent shape header");
  Matrix m(rows, cols);
  int k = 0;
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = data[k++].get<double>();
  return m;
}

}  // namespace

EncoderParams init_encoder(int input_dim, int hidden_dim, int output_dim,
                           double gamma, std::uint64_t seed) {
  if (input_dim <= 0 || hidden_dim <= 0 || output_dim <= 0)
    fail(ErrorKind::kValidation, "encoder dimensions must be positive");
  if (gamma < 0.0 || gamma >= 1.0)
    fail(ErrorKind::kValidation, "activation slope must lie in [0, 1)");
  EncoderParams p;
  p.w1 = Tensor(glorot_uniform(input_dim, hidden_dim,
                               derive_seed(seed, stream::kInit, 1)),
                true);
  p.b1 = Tensor(Matrix::Zero(1, hidden_dim), true);
  p.w2 = Tensor(glorot_uniform(hidden_dim, output_dim,
                               derive_seed(seed, stream::kInit, 2)),
                true);
  p.b2 = Tensor(Matrix::Zero(1, output_dim), true);
  p.gamma = gamma;
  return p;
}

ProjectorParams init_projector(int input_dim, int hidden_dim, int output_dim,
                               std::uint64_t seed) {
  if (input_dim <= 0 || hidden_dim <= 0 || output_dim <= 0)
    fail(ErrorKind::kValidation, "projector dimensions must be positive");
  ProjectorParams pp;
  pp.w1 = Tensor(glorot_uniform(input_dim, hidden_dim,
                                derive_seed(seed, stream::kInit, 3)),
                 true);
  pp.b1 = Tensor(Matrix::Zero(1, hidden_dim), true);
  pp.w2 = Tensor(glorot_uniform(hidden_dim, output_dim,
                                derive_seed(seed, stream::kInit, 4)),
                 true);
  pp.b2 = Tensor(Matrix::Zero(1, output_dim), true);
  return pp;
}

Tensor gcn_forward(const EncoderParams& p, const Matrix& x,
                   const Matrix& a_hat) {
  if (x.cols() != p.w1.rows())
    fail(ErrorKind::kDimension,
         "gcn_forward: feature dim " + std::to_string(x.cols()) +
             " != encoder input dim " + std::to_string(p.w1.rows()));
  if (a_hat.rows() != a_hat.cols() || a_hat.rows() != x.rows())
    fail(ErrorKind::kDimension,
         "gcn_forward: message-passing matrix must be NxN matching features");
  const Tensor a(a_hat);
  const Tensor xt(x);
  Tensor h = prelu(
      add_row_vector(matmul(a, matmul(xt, p.w1)), p.b1), p.gamma);
  return prelu(add_row_vector(matmul(a, matmul(h, p.w2)), p.b2), p.gamma);
}

Tensor project(const ProjectorParams& pp, const Tensor& z) {
  if (z.cols() != pp.w1.rows())
    fail(ErrorKind::kDimension,
         "project: embedding dim " + std::to_string(z.cols()) +
             " != projector input dim " + std::to_string(pp.w1.rows()));
  Tensor h = elu(add_row_vector(matmul(z, pp.w1), pp.b1));
  return add_row_vector(matmul(h, pp.w2), pp.b2);
}

std::vector<Tensor> trainable(const EncoderParams& p,
                              const ProjectorParams& pp) {
  return {p.w1, p.b1, p.w2, p.b2, pp.w1, pp.b1, pp.w2, pp.b2};
}

void save_checkpoint(const EncoderParams& p, const ProjectorParams& pp,
                     const std::string& path) {
  nlohmann::json j;
  j["format"] = "pot-checkpoint-v1";
  j["encoder"] = {{"W1", matrix_to_json(p.w1.value())},
                  {"b1", matrix_to_json(p.b1.value())},
                  {"W2", matrix_to_json(p.w2.value())},
                  {"b2", matrix_to_json(p.b2.value())},
                  {"gamma", p.gamma}};
  j["projector"] = {{"W1", matrix_to_json(pp.w1.value())},
                    {"b1", matrix_to_json(pp.b1.value())},
                    {"W2", matrix_to_json(pp.w2.value())},
                    {"b2", matrix_to_json(pp.b2.value())}};
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kMalformedInput, "cannot write " + path);
  out << j.dump(2) << "\n";
}

void load_checkpoint(const std::string& path, EncoderParams& p,
                     ProjectorParams& pp) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kMalformedInput, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorKind::kMalformedInput, path + ": " + e.what());
  }
  if (!j.contains("encoder") || !j.contains("projector"))
    fail(ErrorKind::kMalformedInput,
         path + ": missing encoder/projector sections");
  const auto& je = j.at("encoder");
  const auto& jp = j.at("projector");
  p.w1 = Tensor(matrix_from_json(je.at("W1"), "encoder.W1"), true);
  p.b1 = Tensor(matrix_from_json(je.at("b1"), "encoder.b1"), true);
  p.w2 = Tensor(matrix_from_json(je.at("W2"), "encoder.W2"), true);
  p.b2 = Tensor(matrix_from_json(je.at("b2"), "encoder.b2"), true);
  p.gamma = je.at("gamma").get<double>();
  pp.w1 = Tensor(matrix_from_json(jp.at("W1"), "projector.W1"), true);
  pp.b1 = Tensor(matrix_from_json(jp.at("b1"), "projector.b1"), true);
  pp.w2 = Tensor(matrix_from_json(jp.at("W2"), "projector.W2"), true);
  pp.b2 = Tensor(matrix_from_json(jp.at("b2"), "projector.b2"), true);
}

}  // namespace pot

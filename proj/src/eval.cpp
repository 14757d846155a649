#include "pot/eval.hpp"

#include <cmath>

#include "pot/errors.hpp"

namespace pot {

FitResult fit_logreg(const Matrix& z, const Eigen::VectorXi& labels,
                     const std::vector<std::uint8_t>& train_mask,
                     int class_count, int epochs, double lr, double l2,
                     std::uint64_t seed) {
  const int n = static_cast<int>(z.rows());
  const int d = static_cast<int>(z.cols());
  if (labels.size() != n)
    fail(ErrorKind::kDimension, "fit_logreg: label count != embedding rows");
  if (static_cast<int>(train_mask.size()) != n)
    fail(ErrorKind::kDimension, "fit_logreg: mask length != embedding rows");
  if (class_count < 1)
    fail(ErrorKind::kValidation, "fit_logreg: class count must be >= 1");
  if (epochs < 1 || lr <= 0 || l2 < 0)
    fail(ErrorKind::kValidation, "fit_logreg: bad optimization settings");

  std::vector<int> train_ids = mask_to_ids(train_mask);
  if (train_ids.empty())
    fail(ErrorKind::kValidation, "fit_logreg: empty training mask");
  const int nt = static_cast<int>(train_ids.size());

  FitResult result;
  std::vector<int> support(class_count, 0);
  Matrix zt(nt, d);
  Eigen::VectorXi yt(nt);
  for (int k = 0; k < nt; ++k) {
    zt.row(k) = z.row(train_ids[k]);
    const int y = labels(train_ids[k]);
    if (y < 0 || y >= class_count)
      fail(ErrorKind::kValidation,
           "fit_logreg: label " + std::to_string(y) + " outside [0," +
               std::to_string(class_count) + ")");
    yt(k) = y;
    ++support[y];
  }
  for (int c = 0; c < class_count; ++c)
    if (support[c] == 0)
      result.warnings.push_back("class " + std::to_string(c) +
                                " absent from the training mask");

  ClassifierParams p;
  p.w = glorot_uniform(d, class_count,
                       derive_seed(seed, stream::kClassifier, 100));
  p.b = Eigen::RowVectorXd::Zero(class_count);

  result.loss_history.reserve(epochs);
  for (int step = 0; step < epochs; ++step) {
    Matrix logits = zt * p.w;
    logits.rowwise() += p.b;
    // row-wise softmax with max shift
    Matrix prob(nt, class_count);
    double ce = 0;
    for (int k = 0; k < nt; ++k) {
      const double mx = logits.row(k).maxCoeff();
      Eigen::RowVectorXd e = (logits.row(k).array() - mx).exp();
      const double s = e.sum();
      prob.row(k) = e / s;
      ce -= std::log(prob(k, yt(k)));
    }
    ce /= nt;
    const double loss = ce + l2 * p.w.squaredNorm();
    result.loss_history.push_back(loss);

    for (int k = 0; k < nt; ++k) prob(k, yt(k)) -= 1.0;  // softmax - onehot
    const Matrix wg = zt.transpose() * prob / nt + 2.0 * l2 * p.w;
    const Eigen::RowVectorXd bg = prob.colwise().sum() / nt;
    p.w -= lr * wg;
    p.b -= lr * bg;
  }
  result.params = std::move(p);
  return result;
}

Eigen::VectorXi predict(const ClassifierParams& c, const Matrix& z) {
  if (z.cols() != c.w.rows())
    fail(ErrorKind::kDimension, "predict: embedding dim != classifier dim");
  Matrix logits = z * c.w;
  logits.rowwise() += c.b;
  Eigen::VectorXi out(z.rows());
  for (int i = 0; i < z.rows(); ++i) {
    int best = 0;
    for (int k = 1; k < logits.cols(); ++k)
      if (logits(i, k) > logits(i, best)) best = k;  // ties keep lowest index
    out(i) = best;
  }
  return out;
}

F1Scores f1_scores(const Eigen::VectorXi& predicted,
                   const Eigen::VectorXi& truth, int class_count) {
  if (predicted.size() != truth.size())
    fail(ErrorKind::kDimension, "f1_scores: length mismatch");
  if (predicted.size() == 0)
    fail(ErrorKind::kValidation, "f1_scores: empty prediction vector");
  std::vector<long> tp(class_count, 0), fp(class_count, 0),
      fn(class_count, 0);
  for (int i = 0; i < predicted.size(); ++i) {
    const int p = predicted(i), t = truth(i);
    if (p < 0 || p >= class_count || t < 0 || t >= class_count)
      fail(ErrorKind::kValidation, "f1_scores: label outside class range");
    if (p == t)
      ++tp[p];
    else {
      ++fp[p];
      ++fn[t];
    }
  }
  long tp_sum = 0, fp_sum = 0, fn_sum = 0;
  double macro = 0;
  for (int c = 0; c < class_count; ++c) {
    tp_sum += tp[c];
    fp_sum += fp[c];
    fn_sum += fn[c];
    const long denom = 2 * tp[c] + fp[c] + fn[c];
    macro += denom == 0 ? 0.0 : 2.0 * tp[c] / static_cast<double>(denom);
  }
  F1Scores s;
  const double micro_denom =
      tp_sum + 0.5 * (static_cast<double>(fp_sum) + fn_sum);
  s.micro = micro_denom == 0 ? 0.0 : tp_sum / micro_denom;
  s.macro = macro / class_count;
  return s;
}

EvalSummary evaluate_embedding(const Matrix& z, const Eigen::VectorXi& labels,
                               const SplitMasks& masks, int class_count,
                               int n_fits, int epochs, double lr, double l2,
                               std::uint64_t seed) {
  if (n_fits < 1)
    fail(ErrorKind::kValidation, "evaluate_embedding: n_fits must be >= 1");
  const std::vector<int> test_ids = mask_to_ids(masks.test);
  if (test_ids.empty())
    fail(ErrorKind::kValidation, "evaluate_embedding: empty test split");
  Eigen::VectorXi truth(test_ids.size());
  Matrix zt(test_ids.size(), z.cols());
  for (std::size_t k = 0; k < test_ids.size(); ++k) {
    truth(static_cast<int>(k)) = labels(test_ids[k]);
    zt.row(static_cast<int>(k)) = z.row(test_ids[k]);
  }

  std::vector<double> micro, macro;
  for (int k = 0; k < n_fits; ++k) {
    const FitResult fit =
        fit_logreg(z, labels, masks.train, class_count, epochs, lr, l2,
                   derive_seed(seed, stream::kClassifier, k));
    const F1Scores f1 = f1_scores(predict(fit.params, zt), truth, class_count);
    micro.push_back(f1.micro);
    macro.push_back(f1.macro);
  }

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
  };
  auto std_of = [&](const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / (v.size() - 1));
  };

  EvalSummary summary;
  summary.n_fits = n_fits;
  summary.micro_mean = mean_of(micro);
  summary.micro_std = std_of(micro, summary.micro_mean);
  summary.macro_mean = mean_of(macro);
  summary.macro_std = std_of(macro, summary.macro_mean);
  return summary;
}

}  // namespace pot

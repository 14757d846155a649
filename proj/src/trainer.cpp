#include "pot/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "pot/errors.hpp"
#include "pot/objectives.hpp"

namespace pot {

void TrainLog::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kMalformedInput, "cannot write " + path);
  out << "epoch,infonce,pot,total,mean_f_g1,mean_f_g2\n";
  for (const auto& r : rows)
    out << r.epoch << "," << format_double(r.infonce) << ","
        << format_double(r.pot) << "," << format_double(r.total) << ","
        << format_double(r.mean_f_g1) << "," << format_double(r.mean_f_g2)
        << "\n";
}

Adam::Adam(std::vector<Tensor> params, double lr)
    : params_(std::move(params)), lr_(lr) {
  if (lr_ <= 0) fail(ErrorKind::kValidation, "learning rate must be positive");
  for (const auto& p : params_) {
    m_.push_back(Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void Adam::step() {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = params_[k];
    const Matrix g = p.has_grad()
                         ? p.grad()
                         : Matrix::Zero(p.rows(), p.cols()).eval();
    m_[k] = kBeta1 * m_[k] + (1.0 - kBeta1) * g;
    v_[k] = kBeta2 * v_[k] + (1.0 - kBeta2) * g.cwiseProduct(g);
    const Matrix m_hat = m_[k] / bc1;
    const Matrix v_hat = v_[k] / bc2;
    p.set_value(p.value() -
                lr_ * (m_hat.array() / (v_hat.array().sqrt() + kEps))
                          .matrix());
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

namespace {

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1) fail(ErrorKind::kValidation, "epochs must be >= 1");
  if (cfg.learning_rate <= 0)
    fail(ErrorKind::kValidation, "learning rate must be positive");
  if (cfg.tau <= 0) fail(ErrorKind::kValidation, "tau must be positive");
  if (cfg.kappa < 0 || cfg.kappa > 1)
    fail(ErrorKind::kValidation, "kappa must lie in [0, 1]");
  if (cfg.hidden_dim <= 0 || cfg.output_dim <= 0 || cfg.projector_dim <= 0)
    fail(ErrorKind::kValidation, "model dimensions must be positive");
}

std::vector<int> sample_node_subset(int n, int k, std::uint64_t seed) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(k);
  std::sort(ids.begin(), ids.end());  // fixed summation order
  return ids;
}

void check_finite(double v, const char* name, int epoch) {
  if (!std::isfinite(v))
    fail(ErrorKind::kContract,
         std::string("non-finite ") + name + " at epoch " +
             std::to_string(epoch) + "; aborting training");
}

}  // namespace

TrainResult train(const Graph& g, const TrainConfig& cfg) {
  validate_train_config(cfg);
  const int n = g.num_nodes;
  const Matrix& x = g.x();

  TrainResult result;
  result.encoder = init_encoder(g.feature_dim(), cfg.hidden_dim,
                                cfg.output_dim, cfg.gamma, cfg.seed);
  result.projector = init_projector(cfg.output_dim, cfg.projector_dim,
                                    cfg.projector_dim, cfg.seed);
  EncoderParams& enc = result.encoder;
  ProjectorParams& proj = result.projector;

  const double max_rate = std::max(cfg.augment.drop_rate_view1,
                                   cfg.augment.drop_rate_view2);
  const BudgetSpec budgets = budgets_from_rate(g, max_rate);
  const MessagePassingBounds mb = message_passing_bounds(g, budgets);

  Adam opt(trainable(enc, proj), cfg.learning_rate);

  const bool use_pot = cfg.kappa > 0.0;
  const bool subset_pot = cfg.pot_batch > 0 && cfg.pot_batch < n;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Graph g1 = sample_edge_drop(
        g, cfg.augment.drop_rate_view1, cfg.augment.strategy,
        derive_seed(cfg.seed, stream::kAugmentView1, epoch));
    const Graph g2 = sample_edge_drop(
        g, cfg.augment.drop_rate_view2, cfg.augment.strategy,
        derive_seed(cfg.seed, stream::kAugmentView2, epoch));
    const Matrix a1 = normalized_message_passing(g1);
    const Matrix a2 = normalized_message_passing(g2);

    TrainLogRow row;
    row.epoch = epoch;

    if (!use_pot) {
      // The regularizer is a pure add-on: with kappa = 0 the optimizer path
      // never touches it; the certified columns are computed value-only for
      // the log.
      NoGrad off;
      const Matrix z1v = gcn_forward(enc, x, a1).value();
      const Matrix z2v = gcn_forward(enc, x, a2).value();
      const CompactnessPair pair =
          compactness_pair(enc, g, mb, a1, a2, z1v, z2v, cfg.bound_mode);
      row.mean_f_g1 = pair.f_g1.value().mean();
      row.mean_f_g2 = pair.f_g2.value().mean();
    }

    {
      Tape tape;
      const Tensor z1 = gcn_forward(enc, x, a1);
      const Tensor z2 = gcn_forward(enc, x, a2);
      const InfoNceResult inf = infonce_loss(z1, z2, proj, cfg.tau);
      Tensor total = inf.loss;
      if (use_pot) {
        const CompactnessPair pair = compactness_pair(
            enc, g, mb, a1, a2, z1.value(), z2.value(), cfg.bound_mode);
        Tensor pot;
        if (subset_pot) {
          const auto ids = sample_node_subset(
              n, cfg.pot_batch,
              derive_seed(cfg.seed, stream::kPotBatch, epoch));
          pot = scale(pot_loss(select_rows(pair.f_g1, ids),
                               select_rows(pair.f_g2, ids)),
                      static_cast<double>(n) / static_cast<double>(ids.size()));
        } else {
          pot = pot_loss(pair.f_g1, pair.f_g2);
        }
        total = total_loss(inf.loss, pot, cfg.kappa);
        row.pot = pot.scalar_value();
        row.mean_f_g1 = pair.f_g1.value().mean();
        row.mean_f_g2 = pair.f_g2.value().mean();
      }
      row.infonce = inf.loss.scalar_value();
      row.total = total.scalar_value();
      check_finite(row.infonce, "contrastive loss", epoch);
      check_finite(row.pot, "regularizer loss", epoch);
      check_finite(row.total, "total loss", epoch);

      backward(total);
      opt.step();
      opt.zero_grad();
    }

    result.log.rows.push_back(row);
  }
  return result;
}

double quantile(Vector values, double p) {
  if (values.size() == 0)
    fail(ErrorKind::kValidation, "quantile of empty sample");
  if (p < 0 || p > 1) fail(ErrorKind::kValidation, "quantile p not in [0,1]");
  std::sort(values.data(), values.data() + values.size());
  const int n = static_cast<int>(values.size());
  if (n == 1) return values(0);
  const double h = p * (n - 1);
  const int lo = static_cast<int>(std::floor(h));
  const int hi = std::min(lo + 1, n - 1);
  const double frac = h - lo;
  return values(lo) + frac * (values(hi) - values(lo));
}

StudyResult imbalance_study(const EncoderParams& p, const ProjectorParams& pp,
                            const Graph& g, const TrainConfig& cfg,
                            int n_samples) {
  if (n_samples < 1)
    fail(ErrorKind::kValidation, "imbalance_study needs n_samples >= 1");
  const Matrix& x = g.x();
  std::vector<Vector> samples(n_samples);
  parallel_for(n_samples, [&](int k) {
    NoGrad off;  // frozen model: evaluation only
    const Graph g1 = sample_edge_drop(
        g, cfg.augment.drop_rate_view1, cfg.augment.strategy,
        derive_seed(cfg.seed, stream::kStudy, k, 1));
    const Graph g2 = sample_edge_drop(
        g, cfg.augment.drop_rate_view2, cfg.augment.strategy,
        derive_seed(cfg.seed, stream::kStudy, k, 2));
    const Tensor z1 = gcn_forward(p, x, normalized_message_passing(g1));
    const Tensor z2 = gcn_forward(p, x, normalized_message_passing(g2));
    samples[k] = infonce_loss(z1, z2, pp, cfg.tau).per_node;
  });
  StudyResult r;
  r.per_node_mean = Vector::Zero(g.num_nodes);
  for (const auto& s : samples) r.per_node_mean += s;  // fixed order
  r.per_node_mean /= static_cast<double>(n_samples);
  r.q25 = quantile(r.per_node_mean, 0.25);
  r.q50 = quantile(r.per_node_mean, 0.50);
  r.q75 = quantile(r.per_node_mean, 0.75);
  return r;
}

std::vector<DegreeBucket> compactness_by_degree(const EncoderParams& p,
                                                const Graph& g,
                                                const TrainConfig& cfg) {
  NoGrad off;
  const double max_rate = std::max(cfg.augment.drop_rate_view1,
                                   cfg.augment.drop_rate_view2);
  const MessagePassingBounds mb =
      message_passing_bounds(g, budgets_from_rate(g, max_rate));
  const Graph g1 = sample_edge_drop(
      g, cfg.augment.drop_rate_view1, cfg.augment.strategy,
      derive_seed(cfg.seed, stream::kStudy, 0, 1));
  const Graph g2 = sample_edge_drop(
      g, cfg.augment.drop_rate_view2, cfg.augment.strategy,
      derive_seed(cfg.seed, stream::kStudy, 0, 2));
  const Matrix a1 = normalized_message_passing(g1);
  const Matrix a2 = normalized_message_passing(g2);
  const Matrix z1 = gcn_forward(p, g.x(), a1).value();
  const Matrix z2 = gcn_forward(p, g.x(), a2).value();
  const CompactnessPair pair =
      compactness_pair(p, g, mb, a1, a2, z1, z2, cfg.bound_mode);

  const DegreeInfo deg = degree_info(g);
  std::map<int, std::pair<int, double>> groups;  // degree -> (count, sum)
  for (int i = 0; i < g.num_nodes; ++i) {
    const double score =
        0.5 * (pair.f_g1.value()(i, 0) + pair.f_g2.value()(i, 0));
    auto& [count, sum] = groups[deg.raw(i)];
    ++count;
    sum += score;
  }
  std::vector<DegreeBucket> buckets;
  for (const auto& [degree, cs] : groups)
    buckets.push_back({degree, cs.first, cs.second / cs.first});
  return buckets;
}

ShiftStudyResult infonce_shift_study(const Graph& g, const TrainConfig& cfg,
                                     int n_samples) {
  TrainConfig base_cfg = cfg;
  base_cfg.kappa = 0.0;
  const TrainResult base = train(g, base_cfg);
  const TrainResult reg = train(g, cfg);
  ShiftStudyResult r;
  r.baseline =
      imbalance_study(base.encoder, base.projector, g, cfg, n_samples);
  r.regularized =
      imbalance_study(reg.encoder, reg.projector, g, cfg, n_samples);
  return r;
}

}  // namespace pot

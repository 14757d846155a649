// Command-line front end: config-driven train / certify / analyze / eval.
//
// Config is a JSON file; command-line flags override file values (flag wins).
// Exit codes: 0 success, 1 runtime failure, 2 usage or config problem,
// 3 guard refusal (an input exceeded a hard safety limit).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pot/augment.hpp"
#include "pot/autodiff.hpp"
#include "pot/certify.hpp"
#include "pot/encoder.hpp"
#include "pot/errors.hpp"
#include "pot/eval.hpp"
#include "pot/graph.hpp"
#include "pot/trainer.hpp"
#include "pot/util.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using namespace pot;

constexpr const char* kVersion = "0.1.0";

// ---- experiment configuration -------------------------------------------

struct ExperimentConfig {
  std::string edges;
  std::string features;
  std::optional<std::string> labels;
  std::optional<std::string> split;
  std::string output_dir = "out";
  TrainConfig train;
  // Evaluation protocol.
  double train_frac = 0.1;
  double valid_frac = 0.1;
  int n_fits = 5;
  int classifier_epochs = 1000;
  double classifier_lr = 0.01;
  double classifier_l2 = 1e-4;
  // Distribution studies.
  int n_samples = 500;
};

void require_file(const std::string& path, const std::string& what) {
  if (!std::filesystem::is_regular_file(path))
    fail(ErrorKind::kConfig, what + " does not exist: " + path);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kConfig, "cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorKind::kConfig, path + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::kConfig, path + ": not a JSON object");

  static const std::set<std::string> known = {
      "edges",          "features",       "labels",
      "split",          "output_dir",     "epochs",
      "learning_rate",  "tau",            "kappa",
      "drop_rate_view1", "drop_rate_view2", "strategy",
      "pot_batch",      "seed",           "hidden_dim",
      "output_dim",     "projector_dim",  "gamma",
      "bound_mode",     "train_frac",     "valid_frac",
      "n_fits",         "classifier_epochs", "classifier_lr",
      "classifier_l2",  "n_samples"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      fail(ErrorKind::kConfig, path + ": unknown key \"" + key + "\"");

  ExperimentConfig c;
  try {
    j.at("edges").get_to(c.edges);
    j.at("features").get_to(c.features);
    if (j.contains("labels")) c.labels = j.at("labels").get<std::string>();
    if (j.contains("split")) c.split = j.at("split").get<std::string>();
    if (j.contains("output_dir")) j.at("output_dir").get_to(c.output_dir);
    TrainConfig& t = c.train;
    if (j.contains("epochs")) j.at("epochs").get_to(t.epochs);
    if (j.contains("learning_rate"))
      j.at("learning_rate").get_to(t.learning_rate);
    if (j.contains("tau")) j.at("tau").get_to(t.tau);
    if (j.contains("kappa")) j.at("kappa").get_to(t.kappa);
    if (j.contains("drop_rate_view1"))
      j.at("drop_rate_view1").get_to(t.augment.drop_rate_view1);
    if (j.contains("drop_rate_view2"))
      j.at("drop_rate_view2").get_to(t.augment.drop_rate_view2);
    if (j.contains("strategy"))
      t.augment.strategy =
          drop_strategy_from_string(j.at("strategy").get<std::string>());
    if (j.contains("pot_batch")) j.at("pot_batch").get_to(t.pot_batch);
    if (j.contains("seed")) t.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("hidden_dim")) j.at("hidden_dim").get_to(t.hidden_dim);
    if (j.contains("output_dim")) j.at("output_dim").get_to(t.output_dim);
    if (j.contains("projector_dim"))
      j.at("projector_dim").get_to(t.projector_dim);
    if (j.contains("gamma")) j.at("gamma").get_to(t.gamma);
    if (j.contains("bound_mode"))
      t.bound_mode =
          bound_mode_from_string(j.at("bound_mode").get<std::string>());
    if (j.contains("train_frac")) j.at("train_frac").get_to(c.train_frac);
    if (j.contains("valid_frac")) j.at("valid_frac").get_to(c.valid_frac);
    if (j.contains("n_fits")) j.at("n_fits").get_to(c.n_fits);
    if (j.contains("classifier_epochs"))
      j.at("classifier_epochs").get_to(c.classifier_epochs);
    if (j.contains("classifier_lr"))
      j.at("classifier_lr").get_to(c.classifier_lr);
    if (j.contains("classifier_l2"))
      j.at("classifier_l2").get_to(c.classifier_l2);
    if (j.contains("n_samples")) j.at("n_samples").get_to(c.n_samples);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::kConfig, path + ": " + e.what());
  }
  return c;
}

// Flag values; only flags the user actually passed override the file.
struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<int> epochs;
  std::optional<double> learning_rate, tau, kappa, gamma;
  std::optional<double> rate1, rate2;
  std::optional<std::string> strategy, bound_mode;
  std::optional<int> pot_batch, hidden_dim, output_dim, projector_dim;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_fits, n_samples;
};

void apply(const Overrides& o, ExperimentConfig& c) {
  if (o.output_dir) c.output_dir = *o.output_dir;
  TrainConfig& t = c.train;
  if (o.epochs) t.epochs = *o.epochs;
  if (o.learning_rate) t.learning_rate = *o.learning_rate;
  if (o.tau) t.tau = *o.tau;
  if (o.kappa) t.kappa = *o.kappa;
  if (o.gamma) t.gamma = *o.gamma;
  if (o.rate1) t.augment.drop_rate_view1 = *o.rate1;
  if (o.rate2) t.augment.drop_rate_view2 = *o.rate2;
  if (o.strategy) t.augment.strategy = drop_strategy_from_string(*o.strategy);
  if (o.bound_mode) t.bound_mode = bound_mode_from_string(*o.bound_mode);
  if (o.pot_batch) t.pot_batch = *o.pot_batch;
  if (o.hidden_dim) t.hidden_dim = *o.hidden_dim;
  if (o.output_dim) t.output_dim = *o.output_dim;
  if (o.projector_dim) t.projector_dim = *o.projector_dim;
  if (o.seed) t.seed = *o.seed;
  if (o.n_fits) c.n_fits = *o.n_fits;
  if (o.n_samples) c.n_samples = *o.n_samples;
}

void add_common_options(CLI::App* cmd, std::string& config_path,
                        Overrides& o) {
  cmd->add_option("-c,--config", config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--output-dir", o.output_dir, "output directory");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--lr", o.learning_rate, "learning rate");
  cmd->add_option("--tau", o.tau, "contrastive temperature");
  cmd->add_option("--kappa", o.kappa, "compactness regularizer weight");
  cmd->add_option("--gamma", o.gamma, "leaky activation slope");
  cmd->add_option("--rate1", o.rate1, "edge-drop rate, view 1");
  cmd->add_option("--rate2", o.rate2, "edge-drop rate, view 2");
  cmd->add_option("--strategy", o.strategy,
                  "edge-drop strategy: uniform|degree_weighted");
  cmd->add_option("--bound-mode", o.bound_mode,
                  "layer-2 box mode: propagated|realized");
  cmd->add_option("--pot-batch", o.pot_batch,
                  "nodes per regularizer step (<=0: all)");
  cmd->add_option("--hidden-dim", o.hidden_dim, "encoder hidden width");
  cmd->add_option("--output-dim", o.output_dim, "embedding width");
  cmd->add_option("--projector-dim", o.projector_dim, "projector width");
  cmd->add_option("--seed", o.seed, "master seed");
}

// ---- shared pipeline pieces ----------------------------------------------

ExperimentConfig resolve(const std::string& config_path, const Overrides& o) {
  ExperimentConfig c = load_config(config_path);
  apply(o, c);
  require_file(c.edges, "edge file");
  require_file(c.features, "feature file");
  if (c.labels) require_file(*c.labels, "label file");
  if (c.split) require_file(*c.split, "split file");
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec)
    fail(ErrorKind::kConfig,
         "cannot create output directory " + c.output_dir + ": " +
             ec.message());
  return c;
}

Graph load_dataset(const ExperimentConfig& c) {
  return load_graph(c.edges, c.features, c.labels);
}

ordered_json config_echo(const ExperimentConfig& c) {
  ordered_json j;
  j["edges"] = c.edges;
  j["features"] = c.features;
  if (c.labels) j["labels"] = *c.labels;
  if (c.split) j["split"] = *c.split;
  j["output_dir"] = c.output_dir;
  const TrainConfig& t = c.train;
  j["epochs"] = t.epochs;
  j["learning_rate"] = t.learning_rate;
  j["tau"] = t.tau;
  j["kappa"] = t.kappa;
  j["drop_rate_view1"] = t.augment.drop_rate_view1;
  j["drop_rate_view2"] = t.augment.drop_rate_view2;
  j["strategy"] = to_string(t.augment.strategy);
  j["pot_batch"] = t.pot_batch;
  j["seed"] = t.seed;
  j["hidden_dim"] = t.hidden_dim;
  j["output_dim"] = t.output_dim;
  j["projector_dim"] = t.projector_dim;
  j["gamma"] = t.gamma;
  j["bound_mode"] = to_string(t.bound_mode);
  j["train_frac"] = c.train_frac;
  j["valid_frac"] = c.valid_frac;
  j["n_fits"] = c.n_fits;
  j["classifier_epochs"] = c.classifier_epochs;
  j["classifier_lr"] = c.classifier_lr;
  j["classifier_l2"] = c.classifier_l2;
  j["n_samples"] = c.n_samples;
  return j;
}

void write_json(const ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kConfig, "cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_manifest(const ExperimentConfig& c, const std::string& command) {
  ordered_json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = config_echo(c);
  write_json(j, c.output_dir + "/run_manifest.json");
}

SplitMasks resolve_split(const ExperimentConfig& c, const Graph& g) {
  if (c.split) return load_split_json(*c.split, g.num_nodes);
  return random_split(g, c.train_frac, c.valid_frac,
                      derive_seed(c.train.seed, stream::kSplit, 0));
}

// The certification inputs the trainer would see at epoch 0: one sampled
// view pair, the shared message-passing box, and both realized embeddings.
struct CertifyInputs {
  Matrix a1, a2, z1, z2;
  MessagePassingBounds mb;
  BudgetSpec budgets;
};

CertifyInputs certify_inputs(const Graph& g, const TrainConfig& t) {
  CertifyInputs in;
  const AugmentConfig& ac = t.augment;
  Graph v1 = sample_edge_drop(g, ac.drop_rate_view1, ac.strategy,
                              derive_seed(t.seed, stream::kAugmentView1, 0));
  Graph v2 = sample_edge_drop(g, ac.drop_rate_view2, ac.strategy,
                              derive_seed(t.seed, stream::kAugmentView2, 0));
  in.a1 = normalized_message_passing(v1);
  in.a2 = normalized_message_passing(v2);
  in.budgets = budgets_from_rate(
      g, std::max(ac.drop_rate_view1, ac.drop_rate_view2));
  in.mb = message_passing_bounds(g, in.budgets);
  return in;
}

// ---- subcommands ----------------------------------------------------------

int cmd_train(const std::string& config_path, const Overrides& o) {
  ExperimentConfig c = resolve(config_path, o);
  Graph g = load_dataset(c);
  TrainResult r = train(g, c.train);
  save_checkpoint(r.encoder, r.projector, c.output_dir + "/checkpoint.json");
  r.log.write_csv(c.output_dir + "/trainlog.csv");
  write_manifest(c, "train");
  std::printf("trained %d epochs on %d nodes / %d edges; outputs in %s\n",
              c.train.epochs, g.num_nodes, g.num_edges(),
              c.output_dir.c_str());
  return 0;
}

int cmd_certify(const std::string& config_path, const Overrides& o,
                const std::string& checkpoint_path, bool with_oracle,
                bool export_bounds) {
  ExperimentConfig c = resolve(config_path, o);
  require_file(checkpoint_path, "checkpoint");
  Graph g = load_dataset(c);
  EncoderParams p;
  ProjectorParams pp;
  load_checkpoint(checkpoint_path, p, pp);

  CertifyInputs in = certify_inputs(g, c.train);
  NoGrad off;
  in.z1 = gcn_forward(p, g.x(), in.a1).value();
  in.z2 = gcn_forward(p, g.x(), in.a2).value();
  CompactnessPair pair = compactness_pair(p, g, in.mb, in.a1, in.a2, in.z1,
                                          in.z2, c.train.bound_mode);

  std::optional<Vector> oracle1, oracle2;
  if (with_oracle) {
    oracle1 = brute_force_compactness(p, g, in.budgets,
                                      contrast_weight(in.z1));
    oracle2 = brute_force_compactness(p, g, in.budgets,
                                      contrast_weight(in.z2));
  }

  const std::string csv_path = c.output_dir + "/compactness.csv";
  std::ofstream out(csv_path);
  if (!out) fail(ErrorKind::kConfig, "cannot write " + csv_path);
  out << "node_id,f_G1,f_G2,realized_value";
  if (with_oracle) out << ",oracle_min";
  out << "\n";
  for (int i = 0; i < g.num_nodes; ++i) {
    out << i << ',' << format_double(pair.f_g1.value()(i, 0)) << ','
        << format_double(pair.f_g2.value()(i, 0)) << ','
        << format_double(pair.realized_g2(i));
    if (with_oracle) out << ',' << format_double((*oracle2)(i));
    out << "\n";
  }
  out.close();

  if (export_bounds) export_bounds_csv(in.mb, c.output_dir + "/bounds.csv");

  if (with_oracle) {
    int violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.num_nodes; ++i) {
      const double m1 = (*oracle1)(i)-pair.f_g1.value()(i, 0);
      const double m2 = (*oracle2)(i)-pair.f_g2.value()(i, 0);
      const double m = std::min(m1, m2);
      if (m < -1e-9) ++violations;
      worst = std::min(worst, m);
    }
    if (violations == 0) {
      std::printf("verdict: SOUND (worst margin %s)\n",
                  format_double(worst).c_str());
    } else {
      std::printf("verdict: VIOLATION (%d nodes, worst margin %s)\n",
                  violations, format_double(worst).c_str());
    }
  }
  std::printf("wrote %s\n", csv_path.c_str());
  return 0;
}

int cmd_analyze(const std::string& config_path, const Overrides& o,
                const std::string& checkpoint_path, const std::string& study) {
  ExperimentConfig c = resolve(config_path, o);
  Graph g = load_dataset(c);

  auto load_params = [&](EncoderParams& p, ProjectorParams& pp) {
    if (checkpoint_path.empty())
      fail(ErrorKind::kConfig,
           "study \"" + study + "\" needs --checkpoint");
    require_file(checkpoint_path, "checkpoint");
    load_checkpoint(checkpoint_path, p, pp);
  };

  if (study == "imbalance") {
    EncoderParams p;
    ProjectorParams pp;
    load_params(p, pp);
    StudyResult r = imbalance_study(p, pp, g, c.train, c.n_samples);
    const std::string csv = c.output_dir + "/imbalance.csv";
    std::ofstream out(csv);
    if (!out) fail(ErrorKind::kConfig, "cannot write " + csv);
    out << "node_id,per_node_mean\n";
    for (int i = 0; i < r.per_node_mean.size(); ++i)
      out << i << ',' << format_double(r.per_node_mean(i)) << "\n";
    ordered_json j;
    j["n_samples"] = c.n_samples;
    j["q25"] = r.q25;
    j["q50"] = r.q50;
    j["q75"] = r.q75;
    j["upper_spread"] = r.q75 - r.q50;
    j["lower_spread"] = r.q50 - r.q25;
    write_json(j, c.output_dir + "/imbalance_summary.json");
  } else if (study == "degree") {
    EncoderParams p;
    ProjectorParams pp;
    load_params(p, pp);
    std::vector<DegreeBucket> buckets = compactness_by_degree(p, g, c.train);
    const std::string csv = c.output_dir + "/degree.csv";
    std::ofstream out(csv);
    if (!out) fail(ErrorKind::kConfig, "cannot write " + csv);
    out << "degree,count,mean_compactness\n";
    for (const DegreeBucket& b : buckets)
      out << b.degree << ',' << b.count << ','
          << format_double(b.mean_compactness) << "\n";
    ordered_json j;
    j["n_buckets"] = buckets.size();
    if (!buckets.empty()) {
      j["min_degree"] = buckets.front().degree;
      j["max_degree"] = buckets.back().degree;
    }
    write_json(j, c.output_dir + "/degree_summary.json");
  } else if (study == "trajectory") {
    TrainResult r = train(g, c.train);
    r.log.write_csv(c.output_dir + "/trajectory.csv");
    const auto& rows = r.log.rows;
    const int e = static_cast<int>(rows.size());
    // Least-squares slope of the certified-compactness means over the last
    // quarter of training (index as abscissa).
    auto tail_slope = [&](auto field) {
      const int k = std::max(2, (e + 3) / 4);
      const int start = e - k;
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (int i = 0; i < k; ++i) {
        const double x = i, y = rows[start + i].*field;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      return (k * sxy - sx * sy) / (k * sxx - sx * sx);
    };
    ordered_json j;
    j["epochs"] = e;
    j["mean_f_g1_first"] = rows.front().mean_f_g1;
    j["mean_f_g1_last"] = rows.back().mean_f_g1;
    j["mean_f_g2_first"] = rows.front().mean_f_g2;
    j["mean_f_g2_last"] = rows.back().mean_f_g2;
    j["last_quarter_slope_f_g1"] = tail_slope(&TrainLogRow::mean_f_g1);
    j["last_quarter_slope_f_g2"] = tail_slope(&TrainLogRow::mean_f_g2);
    write_json(j, c.output_dir + "/trajectory_summary.json");
  } else if (study == "shift") {
    ShiftStudyResult r = infonce_shift_study(g, c.train, c.n_samples);
    auto write_dist = [&](const StudyResult& s, const std::string& name) {
      const std::string csv = c.output_dir + "/" + name;
      std::ofstream out(csv);
      if (!out) fail(ErrorKind::kConfig, "cannot write " + csv);
      out << "node_id,per_node_mean\n";
      for (int i = 0; i < s.per_node_mean.size(); ++i)
        out << i << ',' << format_double(s.per_node_mean(i)) << "\n";
    };
    write_dist(r.baseline, "shift_baseline.csv");
    write_dist(r.regularized, "shift_pot.csv");
    ordered_json j;
    j["n_samples"] = c.n_samples;
    j["baseline"] = {{"q25", r.baseline.q25},
                     {"q50", r.baseline.q50},
                     {"q75", r.baseline.q75}};
    j["regularized"] = {{"q25", r.regularized.q25},
                        {"q50", r.regularized.q50},
                        {"q75", r.regularized.q75}};
    j["delta_q50"] = r.regularized.q50 - r.baseline.q50;
    write_json(j, c.output_dir + "/shift_summary.json");
  } else {
    fail(ErrorKind::kConfig,
         "unknown study \"" + study +
             "\" (expected imbalance|degree|trajectory|shift)");
  }
  std::printf("study %s written to %s\n", study.c_str(),
              c.output_dir.c_str());
  return 0;
}

int cmd_eval(const std::string& config_path, const Overrides& o,
             const std::string& checkpoint_path) {
  ExperimentConfig c = resolve(config_path, o);
  if (!c.labels)
    fail(ErrorKind::kConfig, "eval needs a label file in the config");
  require_file(checkpoint_path, "checkpoint");
  Graph g = load_dataset(c);
  EncoderParams p;
  ProjectorParams pp;
  load_checkpoint(checkpoint_path, p, pp);

  NoGrad off;
  const Matrix z = gcn_forward(p, g.x(), normalized_message_passing(g)).value();
  SplitMasks masks = resolve_split(c, g);
  EvalSummary s = evaluate_embedding(z, *g.labels, masks, g.class_count,
                                     c.n_fits, c.classifier_epochs,
                                     c.classifier_lr, c.classifier_l2,
                                     c.train.seed);
  ordered_json j;
  j["micro_mean"] = s.micro_mean;
  j["micro_std"] = s.micro_std;
  j["macro_mean"] = s.macro_mean;
  j["macro_std"] = s.macro_std;
  j["n_fits"] = s.n_fits;
  write_json(j, c.output_dir + "/eval_results.json");
  std::printf("micro %s +- %s | macro %s +- %s (%d fits)\n",
              format_double(s.micro_mean).c_str(),
              format_double(s.micro_std).c_str(),
              format_double(s.macro_mean).c_str(),
              format_double(s.macro_std).c_str(), s.n_fits);
  return 0;
}

int run_mapped(const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case ErrorKind::kConfig:
        return 2;
      case ErrorKind::kGuard:
        return 3;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Graph contrastive training with certified per-node compactness "
      "bounds.\nPOT_NUM_THREADS caps internal parallelism (default: all "
      "cores)."};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path, checkpoint_path, study;
  bool with_oracle = false, export_bounds = false;
  Overrides o;

  CLI::App* train_cmd = app.add_subcommand(
      "train", "fit the encoder; writes checkpoint, train log, manifest");
  add_common_options(train_cmd, config_path, o);

  CLI::App* certify_cmd = app.add_subcommand(
      "certify",
      "certified compactness lower bounds for the epoch-0 view pair");
  add_common_options(certify_cmd, config_path, o);
  certify_cmd->add_option("--checkpoint", checkpoint_path, "trained weights")
      ->required();
  certify_cmd->add_flag("--oracle", with_oracle,
                        "compare against exhaustive enumeration (small "
                        "graphs only) and print a verdict");
  certify_cmd->add_flag("--export-bounds", export_bounds,
                        "also write the message-passing box as CSV");

  CLI::App* analyze_cmd = app.add_subcommand(
      "analyze", "distribution studies over the trained model");
  add_common_options(analyze_cmd, config_path, o);
  analyze_cmd
      ->add_option("--study", study,
                   "imbalance|degree|trajectory|shift (trajectory and shift "
                   "retrain and ignore --checkpoint)")
      ->required();
  analyze_cmd->add_option("--checkpoint", checkpoint_path,
                          "trained weights (imbalance and degree)");
  analyze_cmd->add_option("--n-samples", o.n_samples,
                          "augmentation pairs per distribution study");

  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "frozen-embedding classification quality on the test split");
  add_common_options(eval_cmd, config_path, o);
  eval_cmd->add_option("--checkpoint", checkpoint_path, "trained weights")
      ->required();
  eval_cmd->add_option("--n-fits", o.n_fits, "classifier fits to average");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (train_cmd->parsed())
    return run_mapped([&] { return cmd_train(config_path, o); });
  if (certify_cmd->parsed())
    return run_mapped([&] {
      return cmd_certify(config_path, o, checkpoint_path, with_oracle,
                         export_bounds);
    });
  if (analyze_cmd->parsed())
    return run_mapped(
        [&] { return cmd_analyze(config_path, o, checkpoint_path, study); });
  return run_mapped([&] { return cmd_eval(config_path, o, checkpoint_path); });
}

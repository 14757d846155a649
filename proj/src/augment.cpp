#include "pot/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "pot/errors.hpp"

namespace pot {

DropStrategy drop_strategy_from_string(const std::string& s) {
  if (s == "uniform") return DropStrategy::kUniform;
  if (s == "degree_weighted") return DropStrategy::kDegreeWeighted;
  fail(ErrorKind::kValidation,
       "unknown drop strategy '" + s + "' (uniform | degree_weighted)");
}

std::string to_string(DropStrategy s) {
  return s == DropStrategy::kUniform ? "uniform" : "degree_weighted";
}

Graph sample_edge_drop(const Graph& g, double rate, DropStrategy strategy,
                       std::uint64_t seed) {
  if (rate < 0.0 || rate >= 1.0)
    fail(ErrorKind::kValidation, "drop rate must lie in [0, 1)");

  std::vector<double> drop_prob(g.edges.size(), rate);
  if (strategy == DropStrategy::kDegreeWeighted && !g.edges.empty()) {
    const DegreeInfo deg = degree_info(g);
    double max_mean = 0.0;
    std::vector<double> mean_deg(g.edges.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      mean_deg[e] = 0.5 * (deg.raw(g.edges[e].first) +
                           deg.raw(g.edges[e].second));
      max_mean = std::max(max_mean, mean_deg[e]);
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const double w = max_mean > 0 ? mean_deg[e] / max_mean : 0.0;
      drop_prob[e] = std::clamp(rate * w, 0.0, std::nextafter(1.0, 0.0));
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<int, int>> kept;
  kept.reserve(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const double u = unit(rng);  // one draw per edge, canonical order
    if (u >= drop_prob[e]) kept.push_back(g.edges[e]);
  }

  Graph view;
  view.num_nodes = g.num_nodes;
  view.edges = std::move(kept);
  view.features = g.features;  // shared, not copied
  view.labels = g.labels;
  view.class_count = g.class_count;
  return view;
}

BudgetSpec budgets_from_rate(const Graph& g, double rate) {
  if (rate < 0.0 || rate >= 1.0)
    fail(ErrorKind::kValidation, "budget rate must lie in [0, 1)");
  const DegreeInfo deg = degree_info(g);
  BudgetSpec b;
  b.per_node = Eigen::VectorXi::Zero(g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i) {
    const int q = static_cast<int>(std::ceil(rate * deg.raw(i)));
    b.per_node(i) = std::min(q, deg.raw(i));
  }
  b.global = static_cast<int>(std::ceil(rate * g.num_edges()));
  return b;
}

MessagePassingBounds message_passing_bounds(const Graph& g,
                                            const BudgetSpec& b) {
  const int n = g.num_nodes;
  if (b.per_node.size() != n)
    fail(ErrorKind::kDimension, "per-node budget length != node count");
  if (b.global < 0 || b.global > g.num_edges())
    fail(ErrorKind::kValidation,
         "global budget must lie in [0, |edges|]");
  const DegreeInfo deg = degree_info(g);
  for (int i = 0; i < n; ++i) {
    if (b.per_node(i) < 0)
      fail(ErrorKind::kValidation, "negative per-node budget");
    if (deg.with_self_loop(i) - b.per_node(i) < 1)
      fail(ErrorKind::kInfeasibleBudget,
           "node " + std::to_string(i) + ": budget " +
               std::to_string(b.per_node(i)) + " exceeds raw degree " +
               std::to_string(deg.raw(i)));
  }

  MessagePassingBounds mb;
  mb.lower = Matrix::Zero(n, n);
  mb.upper = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double dh = deg.with_self_loop(i);
    mb.lower(i, i) = 1.0 / dh;
    mb.upper(i, i) = 1.0 / (dh - b.per_node(i));
  }
  for (const auto& [u, v] : g.edges) {
    const double du = deg.with_self_loop(u) - b.per_node(u);
    const double dv = deg.with_self_loop(v) - b.per_node(v);
    const double hi = 1.0 / std::sqrt(du * dv);
    mb.upper(u, v) = hi;
    mb.upper(v, u) = hi;
    // Dropping this edge costs one unit at u, one at v, and one globally.
    // If any budget forbids that, the edge survives every feasible
    // augmentation and its smallest value is the full-degree one (drops
    // elsewhere only shrink degrees, which raises the entry). Otherwise the
    // entry can reach 0 by dropping the edge itself.
    const bool droppable =
        b.per_node(u) >= 1 && b.per_node(v) >= 1 && b.global >= 1;
    if (!droppable) {
      const double lo =
          1.0 / std::sqrt(static_cast<double>(deg.with_self_loop(u)) *
                          static_cast<double>(deg.with_self_loop(v)));
      mb.lower(u, v) = lo;
      mb.lower(v, u) = lo;
    }
  }
  return mb;
}

void export_bounds_csv(const MessagePassingBounds& mb,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kMalformedInput, "cannot write " + path);
  out << "i,j,lower,upper\n";
  for (int i = 0; i < mb.lower.rows(); ++i)
    for (int j = 0; j < mb.lower.cols(); ++j)
      if (mb.lower(i, j) != 0.0 || mb.upper(i, j) != 0.0)
        out << i << "," << j << "," << format_double(mb.lower(i, j)) << ","
            << format_double(mb.upper(i, j)) << "\n";
}

}  // namespace pot

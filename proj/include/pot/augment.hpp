#pragma once

#include <cstdint>
#include <string>

#include "pot/graph.hpp"
#include "pot/util.hpp"

namespace pot {

enum class DropStrategy { kUniform, kDegreeWeighted };

DropStrategy drop_strategy_from_string(const std::string& s);
std::string to_string(DropStrategy s);

struct AugmentConfig {
  double drop_rate_view1 = 0.2;
  double drop_rate_view2 = 0.2;
  DropStrategy strategy = DropStrategy::kUniform;
};

// Edge-drop budgets: at most `global` edges dropped in total, at most
// per_node(i) incident to node i. Feasible when per_node(i) <= raw degree.
struct BudgetSpec {
  int global = 0;
  Eigen::VectorXi per_node;
};

// Entrywise box [lower, upper] containing the normalized message-passing
// matrix of every budget-feasible edge-dropped subgraph.
struct MessagePassingBounds {
  Matrix lower, upper;
};

// Drops each edge independently; uniform: with probability `rate`;
// degree-weighted: with probability rate * mean(d_u,d_v)/max_edge_mean,
// clipped to [0,1). The view shares the feature matrix.
Graph sample_edge_drop(const Graph& g, double rate, DropStrategy strategy,
                       std::uint64_t seed);

// q_i = min(ceil(rate*d_i), d_i), Q = ceil(rate*|E|).
BudgetSpec budgets_from_rate(const Graph& g, double rate);

MessagePassingBounds message_passing_bounds(const Graph& g,
                                            const BudgetSpec& b);

void export_bounds_csv(const MessagePassingBounds& mb,
                       const std::string& path);

}  // namespace pot

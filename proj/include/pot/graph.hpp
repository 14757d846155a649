#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pot/util.hpp"

namespace pot {

// Undirected attributed graph. Edges are canonical (u < v, sorted, unique);
// features are shared so augmented views alias the same matrix.
struct Graph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  std::shared_ptr<const Matrix> features;
  std::optional<Eigen::VectorXi> labels;
  int class_count = 0;

  const Matrix& x() const { return *features; }
  int feature_dim() const {
    return features ? static_cast<int>(features->cols()) : 0;
  }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

struct DegreeInfo {
  Eigen::VectorXi raw;             // d_i: incident edge count
  Eigen::VectorXi with_self_loop;  // d_i + 1, the normalization degree
};

struct SplitMasks {
  std::vector<std::uint8_t> train, valid, test;  // one flag per node
};

// Validates ids, drops duplicate/reversed duplicates, canonicalizes.
// Self-loops are a validation error.
Graph make_graph(int num_nodes, std::vector<std::pair<int, int>> edges,
                 Matrix features,
                 std::optional<Eigen::VectorXi> labels = std::nullopt);

// Files: edge list "<u> <v>" per line; headerless CSV features (row count
// defines the node count); optional labels, one integer per line.
Graph load_graph(const std::string& edge_path, const std::string& feature_path,
                 const std::optional<std::string>& label_path = std::nullopt);

DegreeInfo degree_info(const Graph& g);

// Dense symmetric Â = D̂^{-1/2} (A + I) D̂^{-1/2}; bitwise symmetric.
Matrix normalized_message_passing(const Graph& g);

// Neighbor lists including the node itself (message passing touches both).
std::vector<std::vector<int>> neighbor_lists(const Graph& g);

// |train| = round(train_frac*N), |valid| = round(valid_frac*N) (clamped to
// what remains), rest test. Deterministic per seed.
SplitMasks random_split(const Graph& g, double train_frac, double valid_frac,
                        std::uint64_t seed);

std::vector<int> mask_to_ids(const std::vector<std::uint8_t>& mask);

void save_split_json(const SplitMasks& masks, const std::string& path);
SplitMasks load_split_json(const std::string& path, int num_nodes);

}  // namespace pot

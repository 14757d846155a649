#include "pot/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pot/errors.hpp"

namespace pot {

namespace {

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kMalformedInput, "cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

Matrix load_feature_csv(const std::string& path) {
  std::vector<std::vector<double>> rows;
  const auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (blank(lines[ln])) continue;
    std::vector<double> row;
    std::stringstream ss(lines[ln]);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
        if (cell.find_first_not_of(" \t\r", pos) != std::string::npos)
          throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(ErrorKind::kMalformedInput,
             path + ":" + std::to_string(ln + 1) + ": bad feature value '" +
                 cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(ErrorKind::kDimension,
           path + ":" + std::to_string(ln + 1) + ": row has " +
               std::to_string(row.size()) + " columns, expected " +
               std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    fail(ErrorKind::kMalformedInput, path + ": no feature rows");
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace

Graph make_graph(int num_nodes, std::vector<std::pair<int, int>> edges,
                 Matrix features, std::optional<Eigen::VectorXi> labels) {
  if (num_nodes <= 0)
    fail(ErrorKind::kValidation, "graph needs at least one node");
  if (features.rows() != num_nodes)
    fail(ErrorKind::kDimension,
         "feature rows (" + std::to_string(features.rows()) +
             ") != node count (" + std::to_string(num_nodes) + ")");
  for (auto& [u, v] : edges) {
    if (u == v)
      fail(ErrorKind::kValidation,
           "self-loop on node " + std::to_string(u) + " is not allowed");
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes)
      fail(ErrorKind::kMalformedInput,
           "edge (" + std::to_string(u) + "," + std::to_string(v) +
               ") references a node outside [0," + std::to_string(num_nodes) +
               ")");
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Graph g;
  g.num_nodes = num_nodes;
  g.edges = std::move(edges);
  g.features = std::make_shared<const Matrix>(std::move(features));
  if (labels) {
    if (labels->size() != num_nodes)
      fail(ErrorKind::kDimension, "label count != node count");
    int max_label = -1;
    for (int i = 0; i < labels->size(); ++i) {
      if ((*labels)(i) < 0)
        fail(ErrorKind::kValidation,
             "negative label at node " + std::to_string(i));
      max_label = std::max(max_label, (*labels)(i));
    }
    g.labels = std::move(*labels);
    g.class_count = max_label + 1;
  }
  return g;
}

Graph load_graph(const std::string& edge_path, const std::string& feature_path,
                 const std::optional<std::string>& label_path) {
  Matrix features = load_feature_csv(feature_path);
  const int n = static_cast<int>(features.rows());

  std::vector<std::pair<int, int>> edges;
  const auto lines = read_lines(edge_path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (blank(lines[ln])) continue;
    std::istringstream ss(lines[ln]);
    long long u = -1, v = -1;
    std::string extra;
    if (!(ss >> u >> v) || (ss >> extra))
      fail(ErrorKind::kMalformedInput,
           edge_path + ":" + std::to_string(ln + 1) +
               ": expected '<u> <v>', got '" + lines[ln] + "'");
    if (u < 0 || v < 0 || u >= n || v >= n)
      fail(ErrorKind::kMalformedInput,
           edge_path + ":" + std::to_string(ln + 1) + ": node id out of [0," +
               std::to_string(n) + ")");
    if (u == v)
      fail(ErrorKind::kValidation,
           edge_path + ":" + std::to_string(ln + 1) + ": self-loop on node " +
               std::to_string(u));
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }

  std::optional<Eigen::VectorXi> labels;
  if (label_path) {
    const auto label_lines = read_lines(*label_path);
    std::vector<int> vals;
    for (std::size_t ln = 0; ln < label_lines.size(); ++ln) {
      if (blank(label_lines[ln])) continue;
      std::istringstream ss(label_lines[ln]);
      long long y = -1;
      std::string extra;
      if (!(ss >> y) || (ss >> extra))
        fail(ErrorKind::kMalformedInput,
             *label_path + ":" + std::to_string(ln + 1) +
                 ": expected one integer label");
      vals.push_back(static_cast<int>(y));
    }
    if (static_cast<int>(vals.size()) != n)
      fail(ErrorKind::kDimension,
           *label_path + ": " + std::to_string(vals.size()) +
               " labels for " + std::to_string(n) + " nodes");
    Eigen::VectorXi lv(n);
    for (int i = 0; i < n; ++i) lv(i) = vals[i];
    labels = lv;
  }

  return make_graph(n, std::move(edges), std::move(features),
                    std::move(labels));
}

DegreeInfo degree_info(const Graph& g) {
  DegreeInfo d;
  d.raw = Eigen::VectorXi::Zero(g.num_nodes);
  for (const auto& [u, v] : g.edges) {
    d.raw(u) += 1;
    d.raw(v) += 1;
  }
  d.with_self_loop = (d.raw.array() + 1).matrix();
  return d;
}

Matrix normalized_message_passing(const Graph& g) {
  const DegreeInfo deg = degree_info(g);
  Matrix a = Matrix::Zero(g.num_nodes, g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i)
    a(i, i) = 1.0 / static_cast<double>(deg.with_self_loop(i));
  for (const auto& [u, v] : g.edges) {
    const double w = 1.0 / std::sqrt(static_cast<double>(
                               deg.with_self_loop(u)) *
                           static_cast<double>(deg.with_self_loop(v)));
    a(u, v) = w;  // one value assigned to both slots: symmetric bit-for-bit
    a(v, u) = w;
  }
  return a;
}

std::vector<std::vector<int>> neighbor_lists(const Graph& g) {
  std::vector<std::vector<int>> nbr(g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i) nbr[i].push_back(i);
  for (const auto& [u, v] : g.edges) {
    nbr[u].push_back(v);
    nbr[v].push_back(u);
  }
  for (auto& list : nbr) std::sort(list.begin(), list.end());
  return nbr;
}

SplitMasks random_split(const Graph& g, double train_frac, double valid_frac,
                        std::uint64_t seed) {
  if (train_frac < 0 || valid_frac < 0 || train_frac + valid_frac > 1.0)
    fail(ErrorKind::kValidation,
         "split fractions must be nonnegative and sum to at most 1");
  const int n = g.num_nodes;
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  int train_n = static_cast<int>(std::lround(train_frac * n));
  int valid_n = static_cast<int>(std::lround(valid_frac * n));
  valid_n = std::min(valid_n, n - train_n);  // rounding may overshoot by one

  SplitMasks m;
  m.train.assign(n, 0);
  m.valid.assign(n, 0);
  m.test.assign(n, 0);
  for (int k = 0; k < n; ++k) {
    if (k < train_n)
      m.train[ids[k]] = 1;
    else if (k < train_n + valid_n)
      m.valid[ids[k]] = 1;
    else
      m.test[ids[k]] = 1;
  }
  return m;
}

std::vector<int> mask_to_ids(const std::vector<std::uint8_t>& mask) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) ids.push_back(static_cast<int>(i));
  return ids;
}

void save_split_json(const SplitMasks& masks, const std::string& path) {
  nlohmann::json j;
  j["train"] = mask_to_ids(masks.train);
  j["valid"] = mask_to_ids(masks.valid);
  j["test"] = mask_to_ids(masks.test);
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kMalformedInput, "cannot write " + path);
  out << j.dump(2) << "\n";
}

SplitMasks load_split_json(const std::string& path, int num_nodes) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kMalformedInput, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorKind::kMalformedInput, path + ": " + e.what());
  }
  SplitMasks m;
  m.train.assign(num_nodes, 0);
  m.valid.assign(num_nodes, 0);
  m.test.assign(num_nodes, 0);
  auto fill = [&](const char* key, std::vector<std::uint8_t>& mask) {
    if (!j.contains(key))
      fail(ErrorKind::kMalformedInput, path + ": missing key '" + key + "'");
    for (const auto& v : j.at(key)) {
      const int id = v.get<int>();
      if (id < 0 || id >= num_nodes)
        fail(ErrorKind::kMalformedInput,
             path + ": node id " + std::to_string(id) + " out of range");
      mask[id] = 1;
    }
  };
  fill("train", m.train);
  fill("valid", m.valid);
  fill("test", m.test);
  return m;
}

}  // namespace pot

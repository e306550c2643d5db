#include "dartskill/manifold.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "dartskill/errors.hpp"

namespace dartskill {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Duplicate points still need a usable (positive) edge length.
constexpr double kZeroEdgeLength = 1e-12;

void check_cloud(const PointCloud& cloud) {
  if (cloud.count() < 2) {
    throw ParameterDomainError("PointCloud: need at least 2 points");
  }
  if (!cloud.points.allFinite()) {
    throw NumericDomainError("PointCloud: non-finite coordinates");
  }
  if (!cloud.labels.empty() &&
      cloud.labels.size() != static_cast<std::size_t>(cloud.count())) {
    throw ParameterDomainError("PointCloud: label count mismatch");
  }
}

// Each point's k nearest neighbors as (index, length) pairs, nearest first.
// Ties resolve by (distance, index) so every run orders them the same way.
std::vector<std::vector<std::pair<int, double>>> directed_knn(
    const PointCloud& cloud, int k) {
  const int m = cloud.count();
  std::vector<std::pair<double, int>> order(static_cast<std::size_t>(m - 1));
  std::vector<std::vector<std::pair<int, double>>> directed(
      static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    order.clear();
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      order.emplace_back((cloud.points.row(i) - cloud.points.row(j)).norm(),
                         j);
    }
    std::partial_sort(order.begin(), order.begin() + k, order.end());
    for (int n = 0; n < k; ++n) {
      const double length = std::max(order[static_cast<std::size_t>(n)].first,
                                     kZeroEdgeLength);
      directed[static_cast<std::size_t>(i)].emplace_back(
          order[static_cast<std::size_t>(n)].second, length);
    }
  }
  return directed;
}

std::vector<int> connected_components(const NeighborGraph& graph,
                                      int* num_components_out) {
  const int m = graph.count();
  std::vector<int> component(m, -1);
  int next_id = 0;
  std::vector<int> stack;
  for (int start = 0; start < m; ++start) {
    if (component[start] >= 0) continue;
    component[start] = next_id;
    stack.push_back(start);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [w, len] : graph.adjacency[v]) {
        if (component[w] < 0) {
          component[w] = next_id;
          stack.push_back(w);
        }
      }
    }
    ++next_id;
  }
  if (num_components_out) *num_components_out = next_id;
  return component;
}

}  // namespace

NeighborGraph knn_graph(const PointCloud& cloud, int k) {
  check_cloud(cloud);
  const int m = cloud.count();
  if (k < 1 || k >= m) {
    throw ParameterDomainError("knn_graph: need 1 <= k < point count, got k=" +
                               std::to_string(k));
  }

  NeighborGraph graph;
  graph.k = k;
  graph.adjacency.resize(static_cast<std::size_t>(m));

  const auto directed = directed_knn(cloud, k);
  for (int i = 0; i < m; ++i) {
    for (const auto& [j, length] : directed[static_cast<std::size_t>(i)]) {
      graph.adjacency[static_cast<std::size_t>(i)].emplace_back(j, length);
      graph.adjacency[static_cast<std::size_t>(j)].emplace_back(i, length);
    }
  }
  for (auto& edges : graph.adjacency) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  return graph;
}

NeighborGraph mutual_knn_graph(const PointCloud& cloud, int k) {
  check_cloud(cloud);
  const int m = cloud.count();
  if (k < 1 || k >= m) {
    throw ParameterDomainError(
        "mutual_knn_graph: need 1 <= k < point count, got k=" +
        std::to_string(k));
  }

  NeighborGraph graph;
  graph.k = k;
  graph.adjacency.resize(static_cast<std::size_t>(m));

  const auto directed = directed_knn(cloud, k);
  std::vector<std::vector<int>> neighbor_ids(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    auto& ids = neighbor_ids[static_cast<std::size_t>(i)];
    for (const auto& [j, length] : directed[static_cast<std::size_t>(i)]) {
      ids.push_back(j);
    }
    std::sort(ids.begin(), ids.end());
  }
  for (int i = 0; i < m; ++i) {
    for (const auto& [j, length] : directed[static_cast<std::size_t>(i)]) {
      if (j < i) continue;  // handle each unordered pair once
      const auto& back = neighbor_ids[static_cast<std::size_t>(j)];
      if (!std::binary_search(back.begin(), back.end(), i)) continue;
      graph.adjacency[static_cast<std::size_t>(i)].emplace_back(j, length);
      graph.adjacency[static_cast<std::size_t>(j)].emplace_back(i, length);
    }
  }
  for (auto& edges : graph.adjacency) std::sort(edges.begin(), edges.end());
  return graph;
}

GeodesicResult geodesic_distances(const NeighborGraph& graph) {
  const int m = graph.count();
  if (m < 1) throw ParameterDomainError("geodesic_distances: empty graph");

  GeodesicResult result;
  result.component_of = connected_components(graph, &result.num_components);
  result.distances.setConstant(m, m, kInf);

  // Dijkstra from every source.  The graphs here are k-NN sparse, so
  // repeated single-source runs beat the cubic all-pairs method well
  // before M reaches the thousands.
  using HeapItem = std::pair<double, int>;
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;
  for (int source = 0; source < m; ++source) {
    auto dist = result.distances.row(source);
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[v]) continue;
      for (const auto& [w, len] : graph.adjacency[static_cast<std::size_t>(v)]) {
        const double candidate = d + len;
        if (candidate < dist[w]) {
          dist[w] = candidate;
          heap.emplace(candidate, w);
        }
      }
    }
  }
  return result;
}

Embedding classical_mds(const Eigen::MatrixXd& distances, int dim) {
  const Eigen::Index m = distances.rows();
  if (m < 2 || distances.cols() != m) {
    throw ParameterDomainError("classical_mds: need a square matrix, m >= 2");
  }
  if (dim < 1) throw ParameterDomainError("classical_mds: dim >= 1");
  if (!distances.allFinite()) {
    throw NumericDomainError(
        "classical_mds: non-finite distances (multiple components?)");
  }
  if ((distances - distances.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ParameterDomainError("classical_mds: matrix not symmetric");
  }

  // Gram matrix via double centering: B = -1/2 * J D^2 J.
  const Eigen::MatrixXd squared = distances.array().square().matrix();
  const Eigen::VectorXd row_mean = squared.rowwise().mean();
  const double total_mean = squared.mean();
  Eigen::MatrixXd gram(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      gram(i, j) = -0.5 * (squared(i, j) - row_mean[i] - row_mean[j] +
                           total_mean);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw NumericDomainError("classical_mds: eigendecomposition failed");
  }
  // Eigen returns ascending order; walk from the back for the top pairs.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double scale = std::max(values.cwiseAbs().maxCoeff(), 1.0);
  const double floor = scale * 1e-12;

  int positive = 0;
  for (Eigen::Index i = m - 1; i >= 0 && values[i] > floor; --i) ++positive;

  Embedding embedding;
  embedding.requested_dim = dim;
  embedding.achieved_dim = std::min(dim, positive);
  embedding.truncated = embedding.achieved_dim < dim;
  embedding.coordinates.resize(m, embedding.achieved_dim);
  embedding.eigenvalues.resize(embedding.achieved_dim);
  for (int c = 0; c < embedding.achieved_dim; ++c) {
    const Eigen::Index source = m - 1 - c;
    embedding.eigenvalues[c] = values[source];
    embedding.coordinates.col(c) =
        solver.eigenvectors().col(source) * std::sqrt(values[source]);
  }
  return embedding;
}

std::vector<double> residual_variance(const Eigen::MatrixXd& distances,
                                      const Embedding& embedding) {
  const Eigen::Index m = distances.rows();
  if (embedding.coordinates.rows() != m) {
    throw ParameterDomainError(
        "residual_variance: embedding/distance size mismatch");
  }
  const Eigen::Index pairs = m * (m - 1) / 2;
  if (pairs < 1) {
    throw ParameterDomainError("residual_variance: need >= 2 points");
  }

  // Flatten the strict upper triangle of the input once.
  Eigen::VectorXd input(pairs);
  {
    Eigen::Index n = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) input[n++] = distances(i, j);
    }
  }
  const double input_mean = input.mean();
  const double input_var = (input.array() - input_mean).square().sum();

  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(embedding.achieved_dim));
  Eigen::VectorXd embedded(pairs);
  for (int d = 1; d <= embedding.achieved_dim; ++d) {
    const auto coords = embedding.coordinates.leftCols(d);
    Eigen::Index n = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        embedded[n++] = (coords.row(i) - coords.row(j)).norm();
      }
    }
    if (input_var <= 0.0) {
      // A constant distance matrix has nothing left to explain.
      curve.push_back(0.0);
      continue;
    }
    const double embedded_mean = embedded.mean();
    const double embedded_var =
        (embedded.array() - embedded_mean).square().sum();
    if (embedded_var <= 0.0) {
      curve.push_back(1.0);
      continue;
    }
    const double covariance = ((input.array() - input_mean) *
                               (embedded.array() - embedded_mean))
                                  .sum();
    const double rho = covariance / std::sqrt(input_var * embedded_var);
    curve.push_back(1.0 - rho * rho);
  }
  return curve;
}

int estimate_dimension(const std::vector<double>& residuals,
                       double residual_cut, double drop_cut) {
  if (residuals.empty()) {
    throw ParameterDomainError("estimate_dimension: empty residual curve");
  }
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const int d = static_cast<int>(i) + 1;
    if (residuals[i] < residual_cut) return d;
    if (i > 0 && residuals[i - 1] - residuals[i] < drop_cut) return d;
  }
  return static_cast<int>(residuals.size());
}

ChartAssignment detect_charts(const PointCloud& cloud, int k,
                              int min_chart_size) {
  check_cloud(cloud);
  if (min_chart_size < 1) {
    throw ParameterDomainError("detect_charts: min_chart_size >= 1");
  }
  const int m = cloud.count();
  // Reciprocal neighbors only: a chart with <= k points is otherwise forced
  // to borrow neighbors from the next chart over just to fill its k slots,
  // and those one-sided edges would bridge genuinely separate components.
  const NeighborGraph graph = mutual_knn_graph(cloud, k);
  int num_components = 0;
  const std::vector<int> component = connected_components(graph, &num_components);

  std::vector<int> component_size(static_cast<std::size_t>(num_components), 0);
  for (int c : component) ++component_size[static_cast<std::size_t>(c)];

  // Components in first-point order already have deterministic ids; keep
  // the big ones as charts in that order.
  std::vector<int> chart_of_component(static_cast<std::size_t>(num_components),
                                      0);
  int num_charts = 0;
  for (int c = 0; c < num_components; ++c) {
    if (component_size[static_cast<std::size_t>(c)] >= min_chart_size) {
      chart_of_component[static_cast<std::size_t>(c)] = ++num_charts;
    }
  }

  ChartAssignment assignment;
  assignment.k_used = k;
  if (num_charts == 0) {
    assignment.num_charts = 1;
    assignment.single_chart_fallback = true;
    assignment.chart_of.assign(static_cast<std::size_t>(m), 1);
    assignment.chart_sizes = {m};
    return assignment;
  }

  // Undersized components adopt the chart of the nearest kept component
  // (closest pair of points across the sets).
  for (int c = 0; c < num_components; ++c) {
    if (chart_of_component[static_cast<std::size_t>(c)] > 0) continue;
    double best = kInf;
    int best_chart = 1;
    for (int i = 0; i < m; ++i) {
      if (component[static_cast<std::size_t>(i)] != c) continue;
      for (int j = 0; j < m; ++j) {
        const int cj = component[static_cast<std::size_t>(j)];
        const int chart = chart_of_component[static_cast<std::size_t>(cj)];
        if (chart == 0) continue;
        const double d = (cloud.points.row(i) - cloud.points.row(j)).norm();
        if (d < best) {
          best = d;
          best_chart = chart;
        }
      }
    }
    chart_of_component[static_cast<std::size_t>(c)] = best_chart;
  }

  assignment.num_charts = num_charts;
  assignment.chart_of.resize(static_cast<std::size_t>(m));
  assignment.chart_sizes.assign(static_cast<std::size_t>(num_charts), 0);
  for (int i = 0; i < m; ++i) {
    const int chart =
        chart_of_component[static_cast<std::size_t>(component[static_cast<std::size_t>(i)])];
    assignment.chart_of[static_cast<std::size_t>(i)] = chart;
    ++assignment.chart_sizes[static_cast<std::size_t>(chart - 1)];
  }
  return assignment;
}

namespace {

// Greedy single-link merge of charts whose separating gap is small
// relative to their own sampling spacing; see ChartDetectConfig.
void merge_commensurate_charts(const PointCloud& cloud, double gap_ratio,
                               ChartAssignment& assignment) {
  if (gap_ratio <= 0.0) return;
  while (assignment.num_charts >= 2) {
    const int D = assignment.num_charts;
    const int m = cloud.count();

    // Largest nearest-neighbor step inside each chart.
    std::vector<double> link(static_cast<std::size_t>(D), 0.0);
    for (int i = 0; i < m; ++i) {
      const int c = assignment.chart_of[static_cast<std::size_t>(i)];
      double nearest = kInf;
      for (int j = 0; j < m; ++j) {
        if (j == i || assignment.chart_of[static_cast<std::size_t>(j)] != c) {
          continue;
        }
        nearest = std::min(
            nearest, (cloud.points.row(i) - cloud.points.row(j)).norm());
      }
      if (nearest < kInf) {
        link[static_cast<std::size_t>(c - 1)] =
            std::max(link[static_cast<std::size_t>(c - 1)], nearest);
      }
    }

    // Most commensurate pair = smallest gap-to-spacing ratio.
    double best_ratio = kInf;
    int merge_from = 0;
    int merge_into = 0;
    for (int a = 1; a <= D; ++a) {
      for (int b = a + 1; b <= D; ++b) {
        double gap = kInf;
        for (int i = 0; i < m; ++i) {
          if (assignment.chart_of[static_cast<std::size_t>(i)] != a) continue;
          for (int j = 0; j < m; ++j) {
            if (assignment.chart_of[static_cast<std::size_t>(j)] != b) {
              continue;
            }
            gap = std::min(
                gap, (cloud.points.row(i) - cloud.points.row(j)).norm());
          }
        }
        const double scale = std::max(link[static_cast<std::size_t>(a - 1)],
                                      link[static_cast<std::size_t>(b - 1)]);
        if (scale <= 0.0) continue;  // degenerate chart, keep separate
        const double ratio = gap / scale;
        if (ratio < best_ratio) {
          best_ratio = ratio;
          merge_from = b;
          merge_into = a;
        }
      }
    }
    if (best_ratio > gap_ratio) return;

    for (int i = 0; i < m; ++i) {
      int& c = assignment.chart_of[static_cast<std::size_t>(i)];
      if (c == merge_from) c = merge_into;
      if (c > merge_from) --c;  // keep ids dense
    }
    assignment.num_charts = D - 1;
    assignment.chart_sizes.assign(static_cast<std::size_t>(D - 1), 0);
    for (int c : assignment.chart_of) {
      ++assignment.chart_sizes[static_cast<std::size_t>(c - 1)];
    }
  }
}

}  // namespace

ChartAssignment detect_charts_adaptive(const PointCloud& cloud,
                                       const ChartDetectConfig& cfg) {
  check_cloud(cloud);
  const int m = cloud.count();
  if (cfg.k < 1 || cfg.k_step < 1 || cfg.k_max < cfg.k) {
    throw ParameterDomainError(
        "detect_charts_adaptive: need k >= 1, k_step >= 1, k_max >= k");
  }
  if (cfg.merge_gap_ratio < 0.0) {
    throw ParameterDomainError(
        "detect_charts_adaptive: merge_gap_ratio must be >= 0");
  }
  int k = std::min(cfg.k, m - 1);
  const int k_cap = std::min(cfg.k_max, m - 1);
  while (true) {
    const NeighborGraph graph = mutual_knn_graph(cloud, k);
    int num_components = 0;
    const std::vector<int> component =
        connected_components(graph, &num_components);
    std::vector<int> sizes(static_cast<std::size_t>(num_components), 0);
    for (int c : component) ++sizes[static_cast<std::size_t>(c)];

    int dust = 0;
    for (int s : sizes) {
      if (s < cfg.min_chart_size) dust += s;
    }
    // Escalate only while the graph is mostly dust. Raising k past the size
    // of a small chart would let its points reciprocate with the next chart
    // over and bridge genuinely separate components, so k stays low and the
    // gap test below is what consolidates honest fragments instead.
    const bool dusty = dust >= cfg.dust_fraction * m;
    if (!dusty || k >= k_cap) {
      ChartAssignment assignment = detect_charts(cloud, k, cfg.min_chart_size);
      merge_commensurate_charts(cloud, cfg.merge_gap_ratio, assignment);
      return assignment;
    }
    k = std::min(k + cfg.k_step, k_cap);
  }
}

}  // namespace dartskill

#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace dartskill {

// A set of M points in R^N (rows are points).  labels optionally carry a
// per-point scalar annotation (here: the task angle that produced the
// policy) and are passed through untouched by all geometry operations.
struct PointCloud {
  Eigen::MatrixXd points;
  std::vector<double> labels;

  int count() const { return static_cast<int>(points.rows()); }
  int dimension() const { return static_cast<int>(points.cols()); }
};

// Undirected k-nearest-neighbor graph with Euclidean edge lengths.
struct NeighborGraph {
  int k = 0;
  // adjacency[i] holds (neighbor, length) pairs, sorted by neighbor
  // index; every edge appears in both endpoint lists.
  std::vector<std::vector<std::pair<int, double>>> adjacency;

  int count() const { return static_cast<int>(adjacency.size()); }
};

// All-pairs geodesic (graph shortest-path) distances; entries across
// different connected components are +infinity.
struct GeodesicResult {
  Eigen::MatrixXd distances;
  std::vector<int> component_of;  // 0-based component id per point
  int num_components = 0;
};

// Classical MDS embedding of a distance matrix.
struct Embedding {
  Eigen::MatrixXd coordinates;  // M x achieved_dim
  Eigen::VectorXd eigenvalues;  // the achieved_dim retained eigenvalues
  int requested_dim = 0;
  int achieved_dim = 0;
  bool truncated = false;  // requested more dimensions than the data holds
};

// Partition of the cloud into charts (dense ids 1..num_charts).
struct ChartAssignment {
  int num_charts = 0;
  std::vector<int> chart_of;
  std::vector<int> chart_sizes;
  bool single_chart_fallback = false;  // all components were undersized
  int k_used = 0;                      // neighbor count that produced this
};

NeighborGraph knn_graph(const PointCloud& cloud, int k);

// Variant keeping only reciprocated edges: i-j survives iff each point is
// among the other's k nearest.  Drops the one-sided bridges that knn_graph
// creates out of any cluster with <= k members (its points must reach into
// the next cluster just to fill their k slots), so component structure
// tracks genuinely separate clusters; vertices may end up with degree < k.
NeighborGraph mutual_knn_graph(const PointCloud& cloud, int k);

GeodesicResult geodesic_distances(const NeighborGraph& graph);

// Double-centers -0.5 * J D^2 J and keeps the top `dim` nonnegative
// eigenpairs; coordinates are eigenvectors scaled by sqrt(eigenvalue).
// Requires a finite symmetric matrix (one geodesic component).
Embedding classical_mds(const Eigen::MatrixXd& distances, int dim);

// residual(d) = 1 - rho^2 between the input distances and the embedded
// Euclidean distances of the first d coordinate columns, for d = 1 ..
// embedding.achieved_dim.  rho is the linear correlation over the strict
// upper triangle; a constant distance matrix yields residual 0.
std::vector<double> residual_variance(const Eigen::MatrixXd& distances,
                                      const Embedding& embedding);

// Elbow read of a residual curve: the smallest d whose residual is below
// `residual_cut`, or whose improvement over d-1 falls below `drop_cut`;
// falls back to the full curve length.
int estimate_dimension(const std::vector<double>& residuals,
                       double residual_cut = 0.1, double drop_cut = 0.02);

// Charts = connected components of the mutual k-NN graph with at least
// min_chart_size members; undersized components merge into the closest
// (minimum inter-set Euclidean distance) kept component.  When no
// component is large enough the whole cloud becomes one chart and the
// fallback flag is set.
ChartAssignment detect_charts(const PointCloud& cloud, int k,
                              int min_chart_size);

// Retry policy around detect_charts for small, noisy clouds: starting at
// `k`, the neighbor count grows by k_step (up to k_max) while at least
// dust_fraction of the points sit in undersized components — the signature
// of a graph shattered by too small a k.  k stays low otherwise: once k
// reaches the size of a small chart its points start reciprocating with
// the next chart over, so escalation past that point would bridge
// genuinely separate components.
//
// After detection, charts whose mutual gap (minimum inter-set distance) is
// at most merge_gap_ratio times the larger of their internal single-link
// scales (each chart's largest nearest-neighbor step) merge greedily,
// smallest ratio first: a gap commensurate with internal spacing is a
// sampling artifact, while a real chart boundary sits several times the
// local spacing away.  0 disables the merge pass.
struct ChartDetectConfig {
  int k = 7;
  int k_max = 15;
  int k_step = 2;
  int min_chart_size = 3;
  double dust_fraction = 0.2;
  double merge_gap_ratio = 2.5;
};
ChartAssignment detect_charts_adaptive(const PointCloud& cloud,
                                       const ChartDetectConfig& cfg);

}  // namespace dartskill

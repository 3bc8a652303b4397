#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "frgd/temporal_graph.hpp"

namespace frgd::pool {

struct ImportanceWeights {
  double alpha1 = 0.5, alpha2 = 0.3, alpha3 = 0.2;  // S_norm, degree, clustering
  double beta1 = 0.5, beta2 = 0.5;                  // edge weight, cosine
  double theta = -1.0;  // node threshold; < 0 means median of I within window
  double delta = 0.3;   // edge importance threshold

  void validate() const;
};

// I_v = a1 * S_norm + a2 * deg/max_deg + a3 * C_v
double node_importance(double s_norm, int degree, int max_degree,
                       double clustering, const ImportanceWeights& w);

// Keep nodes with I >= theta, top max_sample by importance (ties to the
// smaller node id); falls back to the single best node if none qualify.
std::vector<int> sample_nodes(std::span<const int> window_nodes,
                              std::span<const double> importance_by_node,
                              double theta, int max_sample);

struct WindowEdge {
  int u = -1, v = -1;    // unified node ids, u < v
  double weight = 1.0;   // W_uv; multi-review pairs accumulate
};

// Events of one window collapsed to active nodes and distinct weighted pairs.
struct WindowSlice {
  int window = -1;
  std::vector<int> nodes;           // ascending unified ids
  std::vector<WindowEdge> edges;
  std::vector<double> node_time01;  // mean in-window event time of the node,
                                    // scaled by the global [min,max] span
};

WindowSlice window_slice(const graph::TemporalBipartiteGraph& g,
                         const graph::TimeWindowing& tw, int w);

std::vector<WindowEdge> induce_edges(std::span<const WindowEdge> edges,
                                     std::span<const int> sampled);

// I_e = b1 * W_uv + b2 * cos(h_u, h_v); cos with a zero vector is 0.
double edge_importance(double w_uv, const Eigen::VectorXd& h_u,
                       const Eigen::VectorXd& h_v, const ImportanceWeights& w);

struct ScoredEdge {
  int u = -1, v = -1;  // indices into PoolInput::nodes
  double importance = 0.0;
};

// One window's sampled subgraph, ready for clustering.
struct PoolInput {
  int window = -1;
  std::vector<int> nodes;  // original unified ids, ascending
  Eigen::MatrixXd features;
  std::vector<double> importance;
  std::vector<double> s_norm;
  std::vector<double> time01;
  std::vector<ScoredEdge> edges;  // I_e >= delta survivors
};

struct Supernode {
  Eigen::VectorXd h;          // Eq.-19 pooled representation
  double time01 = 0.0;        // importance-weighted member time
  double s_norm = 0.0;        // importance-weighted member score
  double importance = 0.0;    // sum of member importances
  std::vector<int> members;   // original unified node ids
  int window = -1;
};

struct Superedge {
  int a = -1, b = -1;
  double weight = 0.0;  // Eq.-20 accumulated edge importance
};

struct PooledGraph {
  std::vector<Supernode> supernodes;
  std::vector<Superedge> superedges;
};

// Label-propagation clustering (deterministic sweep order, max 20 sweeps);
// k is an upper bound on cluster count, k <= 0 means ceil(|nodes|/8).
PooledGraph cluster_pool(const PoolInput& in, int k = 0);

PooledGraph merge_windows(std::span<const PooledGraph> windows);

}  // namespace frgd::pool

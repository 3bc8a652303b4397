#pragma once

#include <span>
#include <vector>

#include "frgd/temporal_graph.hpp"

namespace frgd::metrics {

using graph::Csr;
using graph::Subgraph;
using graph::TemporalBipartiteGraph;

struct NodeStructureProfile {
  int node = -1;
  double degree_centrality = 0.0;  // C(v) in [0,1]
  double pagerank = 0.0;
  double diversity = 0.0;        // eta in [0,1]
  double self_similarity = 0.0;  // S_v
  double geometric_score = 0.0;  // S_g
  double spectral_score = 0.0;   // S_s
  double consistency = 0.5;      // M_v
  double clustering_coeff = 0.0;
  int degree = 0;  // raw degree in the full graph
};

struct PowerLawFit {
  double exponent = 0.0;
  double r_squared = 0.0;
  int sample_points = 0;

  bool valid() const { return sample_points >= 3; }
};

// Shannon entropy of a probability vector; rejects non-normalized input.
double entropy(std::span<const double> p);
// Entropy over raw nonnegative weights exactly as given (no sum check).
double entropy_raw(std::span<const double> w);

double degree_centrality(const Csr& adj, int v);

// Fixed point of PR(v) = (1-d) + d * sum_{u in N(v)} PR(u)/deg(u).
// Not probability-normalized; dangling neighbors contribute nothing.
std::vector<double> pagerank(const Csr& adj, double damping = 0.85,
                             double tol = 1e-8, int max_iter = 200);

// Quartile buckets (K=4) of node degree. With a positive type_boundary the
// quartiles are computed separately for nodes below and above the boundary
// (reviewers vs products), since the two degree populations differ by orders
// of magnitude on review graphs.
std::vector<int> degree_quartile_categories(const Csr& adj,
                                            int type_boundary = -1);

// H_pageRank(v) over category weights w_k = p_k * PR_k / sum_j PR_j.
double neighbor_diversity(const Csr& adj, int v, std::span<const int> categories,
                          std::span<const double> pr);

// Greedy geodesic box covering with radius floor(box_size/2) balls; boxes
// larger than the graph diameter collapse to one box per component (the
// exact covering there). Returns a box id per local node, ids dense from 0.
// Pass the diameter if already known to skip recomputing it.
std::vector<int> box_cover(const Subgraph& sub, int box_size,
                           int known_diameter = -1);

int graph_diameter(const Subgraph& sub);  // max finite BFS distance

PowerLawFit box_counting_dimension(const Subgraph& sub);
PowerLawFit spectral_exponent(const Subgraph& sub);
double multiscale_consistency(const Subgraph& sub, int levels = 3);

struct SelfSimilarity {
  double s_v = 0.0, s_g = 0.0, s_s = 0.0, m_v = 0.5;
};
SelfSimilarity self_similarity(const Subgraph& sub, double alpha = 0.5,
                               int levels = 3);

struct ProfileOptions {
  int hops = 2;
  double alpha = 0.5;
  double damping = 0.85;  // PageRank damping d
  int levels = 3;
  int node_cap = 512;  // dense eigen-solve budget; big ego-nets down-sampled
  bool parallel = true;
};

// Per-node profiles over the whole graph. Pure and node-independent, so the
// parallel path must match the serial reference bit for bit.
std::vector<NodeStructureProfile> profile_all(const TemporalBipartiteGraph& g,
                                              const ProfileOptions& opts = {});

// Center-preserving uniform down-sample used before the dense solvers.
Subgraph downsample(const Subgraph& sub, int cap);

}  // namespace frgd::metrics

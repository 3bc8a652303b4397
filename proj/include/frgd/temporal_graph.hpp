#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "frgd/util.hpp"

namespace frgd::graph {

struct ReviewEvent {
  std::int32_t reviewer = -1;  // index into reviewer_ids
  std::int32_t product = -1;   // index into product_ids
  std::int64_t timestamp = 0;  // epoch seconds
  double rating = 0.0;         // [1, 5]
  std::int32_t content_len = 0;
};

// Compressed sparse rows over the unified node space:
// reviewers occupy [0, M), products [M, M + N).
struct Csr {
  std::vector<int> offsets;  // size n + 1
  std::vector<int> nbrs;     // sorted within each row

  int node_count() const { return int(offsets.size()) - 1; }
  int degree(int v) const { return offsets[v + 1] - offsets[v]; }
  std::span<const int> row(int v) const {
    return {nbrs.data() + offsets[v], size_t(offsets[v + 1] - offsets[v])};
  }
  bool has_edge(int u, int v) const;
  long edge_count() const { return long(nbrs.size()) / 2; }
};

Csr build_csr(int n, std::vector<std::pair<int, int>> edges);  // undirected, dedups

class TemporalBipartiteGraph {
 public:
  std::vector<std::string> reviewer_ids;
  std::vector<std::string> product_ids;
  std::vector<ReviewEvent> events;  // sorted by (timestamp, reviewer, product, rating, len)

  // z-scored static features; filled by raw_features()
  Eigen::MatrixXd reviewer_features;  // M x 6
  Eigen::MatrixXd product_features;   // N x 4

  int center_node = -1;  // set on ego networks, else -1

  int reviewer_count() const { return int(reviewer_ids.size()); }
  int product_count() const { return int(product_ids.size()); }
  int node_count() const { return reviewer_count() + product_count(); }
  bool is_product_node(int v) const { return v >= reviewer_count(); }
  int product_node(int product_index) const { return reviewer_count() + product_index; }

  std::int64_t min_time() const;
  std::int64_t max_time() const;

  // distinct-pair undirected adjacency, built lazily and cached
  const Csr& adjacency() const;
  void invalidate_adjacency() { adj_.offsets.clear(); adj_.nbrs.clear(); }

  void sort_events();
  void finalize();  // sort + dedup exact duplicates + rebuild adjacency

 private:
  mutable Csr adj_;
};

enum class InputFormat { jsonl, csv };

struct IngestOptions {
  InputFormat format = InputFormat::jsonl;
  bool day_granularity = false;  // timestamps given in whole days
};

struct IngestResult {
  TemporalBipartiteGraph graph;
  int parsed = 0;
  int skipped = 0;     // malformed records
  int duplicates = 0;  // exact duplicate records dropped
};

// Parses review records, interns ids, drops exact duplicates, sorts events.
// Malformed rows are skipped and counted; zero valid records is fatal.
IngestResult ingest(const std::string& path, const IngestOptions& opts);
IngestResult ingest_text(const std::string& text, const IngestOptions& opts);

struct PreprocessStats {
  int reviewers_dropped = 0;
  int products_dropped = 0;
  int events_dropped = 0;
  int rounds = 0;
};

// Iteratively removes reviewers and products with fewer than min_reviews
// review events until a fixed point. Ids are re-interned; an empty result
// graph is fatal.
PreprocessStats preprocess(TemporalBipartiteGraph& g, int min_reviews = 3);

// Binary incidence over reviewers x products restricted to events with t < at.
struct Snapshot {
  std::int64_t at_time = 0;
  int reviewers = 0;
  int products = 0;
  Csr incidence;  // rows [0, M): reviewer -> product indices (not unified ids)

  bool contains(int reviewer, int product) const;
  long ones() const { return long(incidence.nbrs.size()); }
};

Snapshot snapshot(const TemporalBipartiteGraph& g, std::int64_t at_time);

// Half-open windows [b_i, b_{i+1}); the last window also includes its right
// boundary so the max-time event is always covered.
struct TimeWindowing {
  std::vector<double> boundaries;  // size count + 1, strictly increasing

  int count() const { return int(boundaries.size()) - 1; }
  int window_of(double t) const;
  double width(int w) const { return boundaries[w + 1] - boundaries[w]; }
};

// Either a fixed number of equal-width windows (count mode, tau_abs <= 0) or
// fixed-duration windows of tau_abs seconds (last one shortened).
TimeWindowing make_windows(const TemporalBipartiteGraph& g, int count, double tau_abs = 0.0);

// Undirected ego network around v within the given hop count (1 or 2),
// restricted to events whose both endpoints lie inside. v is marked as center.
TemporalBipartiteGraph ego_network(const TemporalBipartiteGraph& g, int v, int hops);

// Lean ego extraction used by the metric kernels: local adjacency only.
struct Subgraph {
  std::vector<int> orig;  // local index -> original unified node id, ascending
  int center = -1;        // local index of the center, -1 if none
  Csr adj;

  int node_count() const { return int(orig.size()); }
  long edge_count() const { return adj.edge_count(); }
};

Subgraph ego_subgraph(const Csr& adj, int v, int hops);

// Per-node static feature block, z-scored per column over the graph.
// Reviewer columns: degree, mean rating, rating stddev, mean gap (days),
// burstiness of own inter-arrival times, mean content length. Product
// columns: degree, mean rating, rating entropy over 5 integer bins,
// reviews per day over the product lifespan.
void raw_features(TemporalBipartiteGraph& g);

}  // namespace frgd::graph

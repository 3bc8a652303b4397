#include "frgd/pool_sample.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace frgd::pool {

void ImportanceWeights::validate() const {
  if (std::abs(alpha1 + alpha2 + alpha3 - 1.0) > 1e-9)
    throw InputError("alpha weights must sum to 1");
  if (std::abs(beta1 + beta2 - 1.0) > 1e-9)
    throw InputError("beta weights must sum to 1");
  if (delta < 0.0 || delta > 1.0) throw InputError("delta must be in [0,1]");
  if (theta > 1.0) throw InputError("theta must be in [0,1] or adaptive (<0)");
}

double node_importance(double s_norm, int degree, int max_degree,
                       double clustering, const ImportanceWeights& w) {
  double deg_term = max_degree > 0 ? double(degree) / double(max_degree) : 0.0;
  return w.alpha1 * s_norm + w.alpha2 * deg_term + w.alpha3 * clustering;
}

std::vector<int> sample_nodes(std::span<const int> window_nodes,
                              std::span<const double> importance_by_node,
                              double theta, int max_sample) {
  std::vector<int> kept;
  for (int v : window_nodes)
    if (importance_by_node[v] >= theta) kept.push_back(v);
  if (kept.empty() && !window_nodes.empty()) {
    // fallback: the single most important node, ties to the smaller id
    int best = window_nodes[0];
    for (int v : window_nodes)
      if (importance_by_node[v] > importance_by_node[best]) best = v;
    kept.push_back(best);
  }
  if (max_sample > 0 && int(kept.size()) > max_sample) {
    std::stable_sort(kept.begin(), kept.end(), [&](int a, int b) {
      if (importance_by_node[a] != importance_by_node[b])
        return importance_by_node[a] > importance_by_node[b];
      return a < b;
    });
    kept.resize(max_sample);
    std::sort(kept.begin(), kept.end());
  }
  return kept;
}

WindowSlice window_slice(const graph::TemporalBipartiteGraph& g,
                         const graph::TimeWindowing& tw, int w) {
  WindowSlice out;
  out.window = w;
  double t0 = double(g.min_time()), t1 = double(g.max_time());
  double span = t1 > t0 ? t1 - t0 : 1.0;

  std::map<std::pair<int, int>, double> pair_weight;
  std::map<int, std::pair<double, int>> node_time;  // sum, count
  for (const auto& e : g.events) {
    if (tw.window_of(double(e.timestamp)) != w) continue;
    int u = e.reviewer, v = g.product_node(e.product);
    pair_weight[{u, v}] += 1.0;
    double t01 = (double(e.timestamp) - t0) / span;
    for (int x : {u, v}) {
      auto& acc = node_time[x];
      acc.first += t01;
      acc.second += 1;
    }
  }
  for (auto& [node, acc] : node_time) {
    out.nodes.push_back(node);
    out.node_time01.push_back(acc.first / double(acc.second));
  }
  for (auto& [pr, wt] : pair_weight)
    out.edges.push_back({pr.first, pr.second, wt});
  return out;
}

std::vector<WindowEdge> induce_edges(std::span<const WindowEdge> edges,
                                     std::span<const int> sampled) {
  std::vector<char> in;
  int max_id = -1;
  for (const auto& e : edges) max_id = std::max({max_id, e.u, e.v});
  for (int v : sampled) max_id = std::max(max_id, v);
  in.assign(size_t(max_id + 1), 0);
  for (int v : sampled) in[v] = 1;
  std::vector<WindowEdge> out;
  for (const auto& e : edges)
    if (in[e.u] && in[e.v]) out.push_back(e);
  return out;
}

double edge_importance(double w_uv, const Eigen::VectorXd& h_u,
                       const Eigen::VectorXd& h_v, const ImportanceWeights& w) {
  double nu = h_u.norm(), nv = h_v.norm();
  double cos = (nu > 0.0 && nv > 0.0) ? h_u.dot(h_v) / (nu * nv) : 0.0;
  return w.beta1 * w_uv + w.beta2 * cos;
}

namespace {

// Weighted label propagation; returns dense cluster ids, capped at k by
// merging the smallest clusters into their strongest neighbors.
std::vector<int> propagate_labels(int n, const std::vector<ScoredEdge>& edges,
                                  int k) {
  std::vector<std::vector<std::pair<int, double>>> nbr(n);
  for (const auto& e : edges) {
    nbr[e.u].emplace_back(e.v, e.importance);
    nbr[e.v].emplace_back(e.u, e.importance);
  }
  std::vector<int> label(n);
  std::iota(label.begin(), label.end(), 0);
  for (int sweep = 0; sweep < 20; ++sweep) {
    int changes = 0;
    for (int i = 0; i < n; ++i) {
      if (nbr[i].empty()) continue;
      std::map<int, double> tally;
      for (auto [j, w] : nbr[i]) tally[label[j]] += w;
      int best = label[i];
      double best_w = -1.0;
      for (auto [lab, w] : tally)
        if (w > best_w || (w == best_w && lab < best)) {
          best = lab;
          best_w = w;
        }
      if (best != label[i]) {
        label[i] = best;
        changes++;
      }
    }
    if (changes == 0) break;
  }

  // dense ids in order of first appearance
  std::map<int, int> dense;
  for (int i = 0; i < n; ++i)
    if (!dense.count(label[i])) {
      int id = int(dense.size());
      dense[label[i]] = id;
    }
  std::vector<int> cluster(n);
  for (int i = 0; i < n; ++i) cluster[i] = dense[label[i]];
  int nc = int(dense.size());
  if (k <= 0 || nc <= k) return cluster;

  // cap: repeatedly merge the smallest cluster into the neighbor cluster
  // with the largest connecting weight; clusters without external edges stay
  std::vector<char> frozen(nc, 0);
  for (;;) {
    std::vector<int> size(nc, 0);
    for (int c : cluster) size[c]++;
    int live = 0;
    for (int c = 0; c < nc; ++c)
      if (size[c] > 0) live++;
    if (live <= k) break;
    int smallest = -1;
    for (int c = 0; c < nc; ++c) {
      if (size[c] == 0 || frozen[c]) continue;
      if (smallest < 0 || size[c] < size[smallest]) smallest = c;
    }
    if (smallest < 0) break;  // only frozen clusters left
    std::map<int, double> link;
    for (const auto& e : edges) {
      int cu = cluster[e.u], cv = cluster[e.v];
      if (cu == cv) continue;
      if (cu == smallest) link[cv] += e.importance;
      if (cv == smallest) link[cu] += e.importance;
    }
    if (link.empty()) {
      frozen[smallest] = 1;
      continue;
    }
    int target = -1;
    double best_w = -1.0;
    for (auto [c, w] : link)
      if (w > best_w || (w == best_w && c < target)) {
        target = c;
        best_w = w;
      }
    for (int& c : cluster)
      if (c == smallest) c = target;
  }
  // re-densify after merging
  std::map<int, int> dense2;
  for (int c : cluster)
    if (!dense2.count(c)) {
      int id = int(dense2.size());
      dense2[c] = id;
    }
  for (int& c : cluster) c = dense2[c];
  return cluster;
}

}  // namespace

PooledGraph cluster_pool(const PoolInput& in, int k) {
  int n = int(in.nodes.size());
  PooledGraph out;
  if (n == 0) return out;
  if (k <= 0) k = std::max(1, (n + 7) / 8);
  auto cluster = propagate_labels(n, in.edges, k);
  int nc = *std::max_element(cluster.begin(), cluster.end()) + 1;

  out.supernodes.resize(nc);
  std::vector<double> wsum(nc, 0.0);
  std::vector<int> count(nc, 0);
  for (int i = 0; i < n; ++i) {
    auto& sn = out.supernodes[cluster[i]];
    if (sn.h.size() == 0) sn.h = Eigen::VectorXd::Zero(in.features.cols());
    sn.window = in.window;
    sn.members.push_back(in.nodes[i]);
    sn.importance += in.importance[i];
    wsum[cluster[i]] += in.importance[i];
    count[cluster[i]]++;
  }
  for (int i = 0; i < n; ++i) {
    int c = cluster[i];
    auto& sn = out.supernodes[c];
    // Eq. 19; uniform fallback when all member importances are zero
    double w = wsum[c] > 0.0 ? in.importance[i] / wsum[c] : 1.0 / count[c];
    sn.h += w * in.features.row(i).transpose();
    sn.time01 += w * in.time01[i];
    sn.s_norm += w * in.s_norm[i];
  }
  for (auto& sn : out.supernodes) std::sort(sn.members.begin(), sn.members.end());

  std::map<std::pair<int, int>, double> acc;
  for (const auto& e : in.edges) {
    int a = cluster[e.u], b = cluster[e.v];
    if (a == b) continue;
    acc[{std::min(a, b), std::max(a, b)}] += e.importance;
  }
  for (auto& [pr, w] : acc) out.superedges.push_back({pr.first, pr.second, w});
  return out;
}

PooledGraph merge_windows(std::span<const PooledGraph> windows) {
  if (windows.empty()) throw InputError("merge_windows needs at least 1 window");
  PooledGraph out;
  for (const auto& pg : windows) {
    int offset = int(out.supernodes.size());
    for (const auto& sn : pg.supernodes) out.supernodes.push_back(sn);
    for (const auto& se : pg.superedges)
      out.superedges.push_back({se.a + offset, se.b + offset, se.weight});
  }
  return out;
}

}  // namespace frgd::pool

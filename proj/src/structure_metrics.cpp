#include "frgd/structure_metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace frgd::metrics {

double entropy(std::span<const double> p) {
  double sum = 0.0;
  for (double x : p) {
    if (x < 0.0) throw InputError("entropy: negative probability");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InputError("entropy: probabilities must sum to 1");
  return entropy_raw(p);
}

double entropy_raw(std::span<const double> w) {
  double h = 0.0;
  for (double x : w)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

double degree_centrality(const Csr& adj, int v) {
  int n = adj.node_count();
  if (n <= 1) return 0.0;
  return double(adj.degree(v)) / double(n - 1);
}

std::vector<double> pagerank(const Csr& adj, double damping, double tol,
                             int max_iter) {
  int n = adj.node_count();
  std::vector<double> pr(n, 1.0), next(n);
  for (int it = 0; it < max_iter; ++it) {
    double max_delta = 0.0;
    for (int v = 0; v < n; ++v) {
      double s = 0.0;
      for (int u : adj.row(v)) s += pr[u] / double(adj.degree(u));
      next[v] = (1.0 - damping) + damping * s;
      max_delta = std::max(max_delta, std::abs(next[v] - pr[v]));
    }
    pr.swap(next);
    if (max_delta < tol) break;
  }
  return pr;
}

std::vector<int> degree_quartile_categories(const Csr& adj, int type_boundary) {
  int n = adj.node_count();
  std::vector<int> degs(n);
  for (int v = 0; v < n; ++v) degs[v] = adj.degree(v);
  std::vector<int> cat(n);

  // Quartiles are taken within each population. On bipartite review graphs
  // product degrees dwarf reviewer degrees, so a single mixed ranking puts
  // every product in the top bucket and the diversity entropy collapses to
  // zero for all reviewers.
  auto bucket = [&](int lo, int hi) {
    if (hi <= lo) return;
    std::vector<int> sorted(degs.begin() + lo, degs.begin() + hi);
    std::sort(sorted.begin(), sorted.end());
    int m = hi - lo;
    auto quantile = [&](double q) {
      int idx = std::max(0, int(std::ceil(q * m)) - 1);
      return sorted[std::min(idx, m - 1)];
    };
    int q1 = quantile(0.25), q2 = quantile(0.50), q3 = quantile(0.75);
    for (int v = lo; v < hi; ++v) {
      if (degs[v] <= q1) cat[v] = 0;
      else if (degs[v] <= q2) cat[v] = 1;
      else if (degs[v] <= q3) cat[v] = 2;
      else cat[v] = 3;
    }
  };
  if (type_boundary <= 0 || type_boundary >= n) {
    bucket(0, n);
  } else {
    bucket(0, type_boundary);
    bucket(type_boundary, n);
  }
  return cat;
}

double neighbor_diversity(const Csr& adj, int v, std::span<const int> categories,
                          std::span<const double> pr) {
  auto nbrs = adj.row(v);
  if (nbrs.empty()) return 0.0;
  double cnt[4] = {0, 0, 0, 0};
  double mass[4] = {0, 0, 0, 0};
  double total_pr = 0.0;
  for (int u : nbrs) {
    int k = categories[u];
    cnt[k] += 1.0;
    mass[k] += pr[u];
    total_pr += pr[u];
  }
  if (total_pr <= 0.0) return 0.0;
  double w[4];
  int used = 0;
  double deg = double(nbrs.size());
  for (int k = 0; k < 4; ++k)
    if (cnt[k] > 0.0) w[used++] = (cnt[k] / deg) * (mass[k] / total_pr);
  return entropy_raw(std::span<const double>(w, size_t(used)));
}

namespace {

// BFS distances on the local adjacency; unreachable stays -1.
void bfs_dists(const Csr& adj, int src, std::vector<int>& dist) {
  std::fill(dist.begin(), dist.end(), -1);
  std::deque<int> q{src};
  dist[src] = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int w : adj.row(u))
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        q.push_back(w);
      }
  }
}

// Nodes within distance r of src, ascending index.
std::vector<int> ball(const Csr& adj, int src, int r) {
  std::vector<int> dist(adj.node_count(), -1);
  std::deque<int> q{src};
  dist[src] = 0;
  std::vector<int> out{src};
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    if (dist[u] == r) continue;
    for (int w : adj.row(u))
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        out.push_back(w);
        q.push_back(w);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Ols {
  double slope = 0.0, intercept = 0.0, r_squared = 0.0;
};

Ols ols_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  Ols f;
  size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy <= 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace

int graph_diameter(const Subgraph& sub) {
  int n = sub.node_count();
  if (n == 0) return 0;
  int diam = 0;
  std::vector<int> dist(n);
  for (int v = 0; v < n; ++v) {
    bfs_dists(sub.adj, v, dist);
    for (int d : dist) diam = std::max(diam, d);
  }
  return diam;
}

std::vector<int> box_cover(const Subgraph& sub, int box_size, int known_diameter) {
  int n = sub.node_count();
  int r = box_size / 2;
  std::vector<int> box(n, -1);
  if (r == 0) {
    std::iota(box.begin(), box.end(), 0);
    return box;
  }
  if (known_diameter < 0) known_diameter = graph_diameter(sub);
  if (box_size > known_diameter) {
    // every component has diameter < box_size, so one box per component is
    // the exact minimal covering; the greedy is only needed below this
    int boxes = 0;
    std::vector<int> dist(n);
    for (int v = 0; v < n; ++v) {
      if (box[v] >= 0) continue;
      bfs_dists(sub.adj, v, dist);
      for (int w = 0; w < n; ++w)
        if (dist[w] >= 0 && box[w] < 0) box[w] = boxes;
      boxes++;
    }
    return box;
  }
  std::vector<int> dist(n);
  int boxes = 0, covered = 0;
  while (covered < n) {
    // peripheral seed: the uncovered node farthest (by BFS) from the
    // smallest-index uncovered node; ties toward the smaller index
    int u0 = -1;
    for (int v = 0; v < n; ++v)
      if (box[v] < 0) { u0 = v; break; }
    bfs_dists(sub.adj, u0, dist);
    int seed = u0, best = 0;
    for (int v = 0; v < n; ++v)
      if (box[v] < 0 && dist[v] > best) {
        best = dist[v];
        seed = v;
      }
    // center: candidate within r of the seed whose radius-r ball covers the
    // most uncovered nodes; ties toward the smaller index
    int center = seed;
    long best_gain = -1;
    for (int c : ball(sub.adj, seed, r)) {
      long gain = 0;
      for (int w : ball(sub.adj, c, r))
        if (box[w] < 0) gain++;
      if (gain > best_gain) {
        best_gain = gain;
        center = c;
      }
    }
    for (int w : ball(sub.adj, center, r))
      if (box[w] < 0) {
        box[w] = boxes;
        covered++;
      }
    boxes++;
  }
  return box;
}

PowerLawFit box_counting_dimension(const Subgraph& sub) {
  PowerLawFit fit;
  int n = sub.node_count();
  if (n < 2) return fit;
  int diam = graph_diameter(sub);
  if (diam < 4) return fit;

  static const int kSizes[] = {1, 2, 4, 8, 16};
  std::vector<double> xs, ys;
  for (int ell : kSizes) {
    if (ell > diam) continue;
    auto box = box_cover(sub, ell, diam);
    int count = *std::max_element(box.begin(), box.end()) + 1;
    xs.push_back(std::log(1.0 / double(ell)));
    ys.push_back(std::log(double(count)));
  }
  if (int(xs.size()) < 3) return fit;
  Ols f = ols_fit(xs, ys);
  fit.exponent = f.slope;
  fit.r_squared = clip01(f.r_squared);
  fit.sample_points = int(xs.size());
  return fit;
}

Subgraph downsample(const Subgraph& sub, int cap) {
  int n = sub.node_count();
  if (n <= cap) return sub;
  std::vector<char> mark(n, 0);
  int kept = 0;
  if (sub.center >= 0) {
    mark[sub.center] = 1;
    kept = 1;
  }
  // uniform stride over local indices; collisions topped up in index order
  double step = double(n) / double(cap - kept);
  for (double pos = 0.0; kept < cap && pos < double(n); pos += step) {
    int v = std::min(n - 1, int(pos));
    if (!mark[v]) {
      mark[v] = 1;
      kept++;
    }
  }
  for (int v = 0; kept < cap && v < n; ++v)
    if (!mark[v]) {
      mark[v] = 1;
      kept++;
    }
  std::vector<int> keep;
  keep.reserve(kept);
  for (int v = 0; v < n; ++v)
    if (mark[v]) keep.push_back(v);

  std::vector<int> local(n, -1);
  for (int i = 0; i < int(keep.size()); ++i) local[keep[i]] = i;
  Subgraph out;
  out.orig.reserve(keep.size());
  for (int v : keep) out.orig.push_back(sub.orig[v]);
  out.center = sub.center >= 0 ? local[sub.center] : -1;
  std::vector<std::pair<int, int>> edges;
  for (int v : keep)
    for (int w : sub.adj.row(v))
      if (local[w] >= 0 && local[w] > local[v])
        edges.emplace_back(local[v], local[w]);
  out.adj = graph::build_csr(int(keep.size()), std::move(edges));
  return out;
}

PowerLawFit spectral_exponent(const Subgraph& sub_in) {
  PowerLawFit fit;
  const Subgraph sub = downsample(sub_in, 512);
  int n = sub.node_count();
  if (n < 3) return fit;

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    lap(v, v) = double(sub.adj.degree(v));
    for (int w : sub.adj.row(v)) lap(v, w) = -1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap,
                                                        Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = solver.eigenvalues();

  std::vector<double> pos;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > 1e-9) pos.push_back(ev[i]);
  if (pos.size() < 3) return fit;

  double lo = pos.front(), hi = pos.back();  // solver returns ascending order
  if (hi / lo < 1.0 + 1e-12) return fit;

  const int kBins = 8;
  double llo = std::log(lo), lhi = std::log(hi);
  std::vector<double> cnt(kBins, 0.0);
  for (double x : pos) {
    int b = int((std::log(x) - llo) / (lhi - llo) * kBins);
    cnt[std::clamp(b, 0, kBins - 1)] += 1.0;
  }
  std::vector<double> xs, ys;
  double total = double(pos.size());
  for (int b = 0; b < kBins; ++b) {
    if (cnt[b] <= 0.0) continue;
    double e0 = std::exp(llo + (lhi - llo) * b / kBins);
    double e1 = std::exp(llo + (lhi - llo) * (b + 1) / kBins);
    double density = cnt[b] / (total * (e1 - e0));
    xs.push_back(0.5 * (std::log(e0) + std::log(e1)));  // geometric bin center
    ys.push_back(std::log(density));
  }
  if (int(xs.size()) < 3) return fit;
  Ols f = ols_fit(xs, ys);
  fit.exponent = -f.slope;
  fit.r_squared = clip01(f.r_squared);
  fit.sample_points = int(xs.size());
  return fit;
}

namespace {

// Merge the boxes of a radius-1 cover (box size 2) into super-nodes.
Subgraph coarse_grain(const Subgraph& sub) {
  auto box = box_cover(sub, 2);
  int boxes = *std::max_element(box.begin(), box.end()) + 1;
  Subgraph out;
  out.orig.resize(boxes);
  std::iota(out.orig.begin(), out.orig.end(), 0);
  out.center = sub.center >= 0 ? box[sub.center] : -1;
  std::vector<std::pair<int, int>> edges;
  for (int v = 0; v < sub.node_count(); ++v)
    for (int w : sub.adj.row(v))
      if (w > v && box[v] != box[w])
        edges.emplace_back(std::min(box[v], box[w]), std::max(box[v], box[w]));
  out.adj = graph::build_csr(boxes, std::move(edges));
  return out;
}

}  // namespace

double multiscale_consistency(const Subgraph& sub, int levels) {
  std::vector<double> cfs;
  Subgraph cur = sub;
  for (int lvl = 0; lvl < levels; ++lvl) {
    PowerLawFit fit = box_counting_dimension(cur);
    if (fit.valid()) cfs.push_back(fit.exponent);
    if (lvl + 1 < levels) {
      if (cur.node_count() < 2) break;
      cur = coarse_grain(cur);
    }
  }
  if (cfs.size() < 2) return 0.5;
  return clip01(std::exp(-stddev_of(cfs)));
}

SelfSimilarity self_similarity(const Subgraph& sub, double alpha, int levels) {
  if (alpha < 0.0 || alpha > 1.0) throw InputError("alpha must be in [0,1]");
  SelfSimilarity out;
  PowerLawFit geom = box_counting_dimension(sub);
  PowerLawFit spec = spectral_exponent(sub);
  out.s_g = geom.valid() ? clip01(geom.exponent / 2.0) * geom.r_squared : 0.0;
  out.s_s = spec.valid() ? clip01(spec.exponent / 3.0) * spec.r_squared : 0.0;
  out.m_v = multiscale_consistency(sub, levels);
  out.s_v = (alpha * out.s_g + (1.0 - alpha) * out.s_s) * out.m_v;
  return out;
}

namespace {

// Bipartite clustering coefficient (pairwise overlap with distance-2
// neighbors); triangle-based cc is identically zero on bipartite graphs.
double pairwise_clustering(const Csr& adj, int v) {
  auto nbrs = adj.row(v);
  if (nbrs.empty()) return 0.0;
  std::vector<int> second;
  for (int u : nbrs)
    for (int w : adj.row(u))
      if (w != v) second.push_back(w);
  std::sort(second.begin(), second.end());
  second.erase(std::unique(second.begin(), second.end()), second.end());
  if (second.empty()) return 0.0;

  const size_t kCap = 2000;
  std::vector<int> sample;
  if (second.size() > kCap) {
    double step = double(second.size()) / double(kCap);
    double pos = 0.0;
    for (size_t i = 0; i < kCap; ++i, pos += step)
      sample.push_back(second[size_t(pos)]);
    sample.erase(std::unique(sample.begin(), sample.end()), sample.end());
  } else {
    sample = std::move(second);
  }

  double acc = 0.0;
  for (int u : sample) {
    auto theirs = adj.row(u);
    size_t inter = 0, i = 0, j = 0;
    while (i < nbrs.size() && j < theirs.size()) {
      if (nbrs[i] == theirs[j]) { inter++; i++; j++; }
      else if (nbrs[i] < theirs[j]) i++;
      else j++;
    }
    size_t uni = nbrs.size() + theirs.size() - inter;
    if (uni > 0) acc += double(inter) / double(uni);
  }
  return acc / double(sample.size());
}

}  // namespace

std::vector<NodeStructureProfile> profile_all(const TemporalBipartiteGraph& g,
                                              const ProfileOptions& opts) {
  const Csr& adj = g.adjacency();
  int n = adj.node_count();
  std::vector<double> pr = pagerank(adj, opts.damping);
  std::vector<int> cats =
      degree_quartile_categories(adj, g.reviewer_count());

  std::vector<NodeStructureProfile> out(n);

  auto compute_one = [&](int v) {
    NodeStructureProfile p;
    p.node = v;
    p.degree = adj.degree(v);
    p.degree_centrality = degree_centrality(adj, v);
    p.pagerank = pr[v];
    p.diversity = neighbor_diversity(adj, v, cats, pr);  // raw H for now
    p.clustering_coeff = pairwise_clustering(adj, v);
    Subgraph ego = graph::ego_subgraph(adj, v, opts.hops);
    Subgraph capped = downsample(ego, opts.node_cap);
    SelfSimilarity ss = self_similarity(capped, opts.alpha, opts.levels);
    p.self_similarity = ss.s_v;
    p.geometric_score = ss.s_g;
    p.spectral_score = ss.s_s;
    p.consistency = ss.m_v;
    out[v] = p;
  };

#ifdef _OPENMP
  if (opts.parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (int v = 0; v < n; ++v) compute_one(v);
  } else {
    for (int v = 0; v < n; ++v) compute_one(v);
  }
#else
  for (int v = 0; v < n; ++v) compute_one(v);
#endif

  // eta normalization over the batch (Eq. 7 style)
  double max_h = 0.0;
  for (const auto& p : out) max_h = std::max(max_h, p.diversity);
  if (max_h > 0.0)
    for (auto& p : out) p.diversity /= max_h;
  return out;
}

}  // namespace frgd::metrics

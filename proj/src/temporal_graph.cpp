#include "frgd/temporal_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_map>

namespace frgd::graph {

using json = nlohmann::json;

bool Csr::has_edge(int u, int v) const {
  auto r = row(u);
  return std::binary_search(r.begin(), r.end(), v);
}

Csr build_csr(int n, std::vector<std::pair<int, int>> edges) {
  std::vector<std::pair<int, int>> dir;
  dir.reserve(edges.size() * 2);
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw InvariantError("edge endpoint out of range");
    dir.emplace_back(a, b);
    dir.emplace_back(b, a);
  }
  std::sort(dir.begin(), dir.end());
  dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

  Csr csr;
  csr.offsets.assign(n + 1, 0);
  for (auto& [a, b] : dir) csr.offsets[a + 1]++;
  for (int i = 0; i < n; ++i) csr.offsets[i + 1] += csr.offsets[i];
  csr.nbrs.reserve(dir.size());
  for (auto& [a, b] : dir) csr.nbrs.push_back(b);
  return csr;
}

std::int64_t TemporalBipartiteGraph::min_time() const {
  if (events.empty()) throw InvariantError("empty event list");
  return events.front().timestamp;
}

std::int64_t TemporalBipartiteGraph::max_time() const {
  if (events.empty()) throw InvariantError("empty event list");
  return events.back().timestamp;
}

const Csr& TemporalBipartiteGraph::adjacency() const {
  if (adj_.offsets.empty()) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(events.size());
    for (const auto& e : events)
      pairs.emplace_back(e.reviewer, product_node(e.product));
    adj_ = build_csr(node_count(), std::move(pairs));
    // bipartiteness check: reviewers only link to products and vice versa
    int m = reviewer_count();
    for (int v = 0; v < node_count(); ++v)
      for (int u : adj_.row(v))
        if ((v < m) == (u < m))
          throw InvariantError("adjacency violates bipartiteness");
  }
  return adj_;
}

static bool event_less(const ReviewEvent& a, const ReviewEvent& b) {
  return std::tie(a.timestamp, a.reviewer, a.product, a.rating, a.content_len) <
         std::tie(b.timestamp, b.reviewer, b.product, b.rating, b.content_len);
}

static bool event_eq(const ReviewEvent& a, const ReviewEvent& b) {
  return a.timestamp == b.timestamp && a.reviewer == b.reviewer &&
         a.product == b.product && a.rating == b.rating &&
         a.content_len == b.content_len;
}

void TemporalBipartiteGraph::sort_events() {
  std::stable_sort(events.begin(), events.end(), event_less);
}

void TemporalBipartiteGraph::finalize() {
  sort_events();
  events.erase(std::unique(events.begin(), events.end(), event_eq), events.end());
  invalidate_adjacency();
  adjacency();
}

namespace {

struct RawRecord {
  std::string reviewer, product;
  std::int64_t timestamp = 0;
  double rating = 3.0;
  std::int32_t content_len = 0;
};

bool parse_jsonl_line(const std::string& line, RawRecord& out) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return false;
  if (!j.contains("reviewer_id") || !j.contains("product_id") || !j.contains("timestamp"))
    return false;
  try {
    out.reviewer = j.at("reviewer_id").get<std::string>();
    out.product = j.at("product_id").get<std::string>();
    out.timestamp = j.at("timestamp").get<std::int64_t>();
    out.rating = j.value("rating", 3.0);
    out.content_len = j.value("content_len", 0);
  } catch (const json::exception&) {
    return false;
  }
  return true;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
      else if (c == '"') quoted = false;
      else cur += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

IngestResult ingest_text(const std::string& text, const IngestOptions& opts) {
  IngestResult res;
  auto& g = res.graph;
  std::unordered_map<std::string, int> rid, pid;
  auto intern = [](std::unordered_map<std::string, int>& m,
                   std::vector<std::string>& ids, const std::string& key) {
    auto it = m.find(key);
    if (it != m.end()) return it->second;
    int idx = int(ids.size());
    ids.push_back(key);
    m.emplace(key, idx);
    return idx;
  };

  std::istringstream in(text);
  std::string line;
  std::vector<int> csv_cols;  // column index of each known field, -1 if absent
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    RawRecord rec;
    bool ok = false;
    if (opts.format == InputFormat::jsonl) {
      ok = parse_jsonl_line(line, rec);
    } else {
      auto fields = split_csv(line);
      if (!header_done) {
        static const char* names[] = {"reviewer_id", "product_id", "timestamp",
                                      "rating", "content_len"};
        csv_cols.assign(5, -1);
        for (int f = 0; f < 5; ++f)
          for (size_t c = 0; c < fields.size(); ++c)
            if (fields[c] == names[f]) csv_cols[f] = int(c);
        header_done = true;
        if (csv_cols[0] < 0 || csv_cols[1] < 0 || csv_cols[2] < 0)
          throw InputError("csv header must name reviewer_id, product_id, timestamp");
        continue;
      }
      auto get = [&](int f) -> const std::string* {
        if (csv_cols[f] < 0 || csv_cols[f] >= int(fields.size())) return nullptr;
        return &fields[csv_cols[f]];
      };
      try {
        const std::string *r = get(0), *p = get(1), *t = get(2);
        if (r && p && t && !r->empty() && !p->empty()) {
          rec.reviewer = *r;
          rec.product = *p;
          rec.timestamp = std::stoll(*t);
          if (auto* s = get(3); s && !s->empty()) rec.rating = std::stod(*s);
          if (auto* s = get(4); s && !s->empty()) rec.content_len = std::stoi(*s);
          ok = true;
        }
      } catch (const std::exception&) {
        ok = false;
      }
    }

    if (ok && (rec.reviewer.empty() || rec.product.empty() || rec.timestamp < 0 ||
               rec.rating < 1.0 || rec.rating > 5.0 || rec.content_len < 0))
      ok = false;
    if (!ok) {
      res.skipped++;
      continue;
    }

    ReviewEvent e;
    e.reviewer = intern(rid, g.reviewer_ids, rec.reviewer);
    e.product = intern(pid, g.product_ids, rec.product);
    e.timestamp = opts.day_granularity ? rec.timestamp * 86400 : rec.timestamp;
    e.rating = rec.rating;
    e.content_len = rec.content_len;
    g.events.push_back(e);
    res.parsed++;
  }

  if (g.events.empty()) throw InputError("no valid records ingested");
  size_t before = g.events.size();
  g.finalize();
  res.duplicates = int(before - g.events.size());
  return res;
}

IngestResult ingest(const std::string& path, const IngestOptions& opts) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ingest_text(ss.str(), opts);
}

PreprocessStats preprocess(TemporalBipartiteGraph& g, int min_reviews) {
  if (min_reviews < 1) throw InputError("min_reviews must be >= 1");
  PreprocessStats st;
  int m = g.reviewer_count(), n = g.product_count();
  std::vector<char> keep_r(m, 1), keep_p(n, 1);
  std::vector<ReviewEvent> ev = g.events;

  for (;;) {
    std::vector<int> rc(m, 0), pc(n, 0);
    for (const auto& e : ev) {
      rc[e.reviewer]++;
      pc[e.product]++;
    }
    bool changed = false;
    for (int i = 0; i < m; ++i)
      if (keep_r[i] && rc[i] < min_reviews) { keep_r[i] = 0; changed = true; }
    for (int j = 0; j < n; ++j)
      if (keep_p[j] && pc[j] < min_reviews) { keep_p[j] = 0; changed = true; }
    if (!changed) break;
    st.rounds++;
    std::erase_if(ev, [&](const ReviewEvent& e) {
      return !keep_r[e.reviewer] || !keep_p[e.product];
    });
  }

  st.events_dropped = int(g.events.size() - ev.size());
  if (ev.empty()) throw InputError("preprocess removed every event");

  std::vector<int> rmap(m, -1), pmap(n, -1);
  std::vector<std::string> rids, pids;
  for (int i = 0; i < m; ++i)
    if (keep_r[i]) { rmap[i] = int(rids.size()); rids.push_back(g.reviewer_ids[i]); }
    else st.reviewers_dropped++;
  for (int j = 0; j < n; ++j)
    if (keep_p[j]) { pmap[j] = int(pids.size()); pids.push_back(g.product_ids[j]); }
    else st.products_dropped++;
  for (auto& e : ev) {
    e.reviewer = rmap[e.reviewer];
    e.product = pmap[e.product];
  }
  g.reviewer_ids = std::move(rids);
  g.product_ids = std::move(pids);
  g.events = std::move(ev);
  g.reviewer_features.resize(0, 0);
  g.product_features.resize(0, 0);
  g.finalize();
  return st;
}

bool Snapshot::contains(int reviewer, int product) const {
  if (reviewer < 0 || reviewer >= reviewers) return false;
  auto r = incidence.row(reviewer);
  return std::binary_search(r.begin(), r.end(), product);
}

Snapshot snapshot(const TemporalBipartiteGraph& g, std::int64_t at_time) {
  Snapshot s;
  s.at_time = at_time;
  s.reviewers = g.reviewer_count();
  s.products = g.product_count();
  std::vector<std::pair<int, int>> pairs;
  for (const auto& e : g.events) {
    if (e.timestamp >= at_time) break;  // events sorted by time
    pairs.emplace_back(e.reviewer, e.product);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  s.incidence.offsets.assign(s.reviewers + 1, 0);
  for (auto& [r, p] : pairs) s.incidence.offsets[r + 1]++;
  for (int i = 0; i < s.reviewers; ++i)
    s.incidence.offsets[i + 1] += s.incidence.offsets[i];
  for (auto& [r, p] : pairs) s.incidence.nbrs.push_back(p);
  return s;
}

int TimeWindowing::window_of(double t) const {
  int m = count();
  if (t < boundaries.front()) return 0;
  for (int w = 0; w < m; ++w)
    if (t < boundaries[w + 1]) return w;
  return m - 1;  // right boundary of the last window is inclusive
}

TimeWindowing make_windows(const TemporalBipartiteGraph& g, int count, double tau_abs) {
  double t0 = double(g.min_time());
  double t1 = double(g.max_time());
  TimeWindowing tw;
  if (t1 <= t0) {
    tw.boundaries = {t0, t0 + 1.0};
    return tw;
  }
  if (tau_abs > 0.0) {
    int m = int(std::ceil((t1 - t0) / tau_abs));
    tw.boundaries.reserve(m + 1);
    for (int i = 0; i < m; ++i) tw.boundaries.push_back(t0 + tau_abs * i);
    tw.boundaries.push_back(t1);  // last window shortened
    return tw;
  }
  if (count < 1) throw InputError("window count must be >= 1");
  double width = (t1 - t0) / count;
  tw.boundaries.reserve(count + 1);
  for (int i = 0; i < count; ++i) tw.boundaries.push_back(t0 + width * i);
  tw.boundaries.push_back(t1);
  return tw;
}

Subgraph ego_subgraph(const Csr& adj, int v, int hops) {
  if (v < 0 || v >= adj.node_count()) throw InputError("ego center out of range");
  if (hops < 1 || hops > 2) throw InputError("hops must be 1 or 2");
  std::vector<int> dist(adj.node_count(), -1);
  std::deque<int> q{v};
  dist[v] = 0;
  std::vector<int> nodes{v};
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    if (dist[u] == hops) continue;
    for (int w : adj.row(u))
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        nodes.push_back(w);
        q.push_back(w);
      }
  }
  std::sort(nodes.begin(), nodes.end());

  Subgraph sub;
  sub.orig = std::move(nodes);
  std::unordered_map<int, int> local;
  local.reserve(sub.orig.size());
  for (int i = 0; i < int(sub.orig.size()); ++i) local[sub.orig[i]] = i;
  sub.center = local.at(v);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < int(sub.orig.size()); ++i)
    for (int w : adj.row(sub.orig[i])) {
      auto it = local.find(w);
      if (it != local.end() && it->second > i) edges.emplace_back(i, it->second);
    }
  sub.adj = build_csr(int(sub.orig.size()), std::move(edges));
  return sub;
}

TemporalBipartiteGraph ego_network(const TemporalBipartiteGraph& g, int v, int hops) {
  Subgraph sub = ego_subgraph(g.adjacency(), v, hops);
  int m = g.reviewer_count();
  std::vector<int> rmap(m, -1), pmap(g.product_count(), -1);
  TemporalBipartiteGraph out;
  for (int orig : sub.orig) {
    if (orig < m) {
      rmap[orig] = int(out.reviewer_ids.size());
      out.reviewer_ids.push_back(g.reviewer_ids[orig]);
    } else {
      pmap[orig - m] = int(out.product_ids.size());
      out.product_ids.push_back(g.product_ids[orig - m]);
    }
  }
  for (const auto& e : g.events) {
    if (rmap[e.reviewer] < 0 || pmap[e.product] < 0) continue;
    ReviewEvent c = e;
    c.reviewer = rmap[e.reviewer];
    c.product = pmap[e.product];
    out.events.push_back(c);
  }
  out.center_node = v < m ? rmap[v] : out.reviewer_count() + pmap[v - m];
  // center stays at the same unified position only within the ego id space
  out.sort_events();
  out.invalidate_adjacency();
  if (!out.events.empty()) out.adjacency();
  return out;
}

void raw_features(TemporalBipartiteGraph& g) {
  int m = g.reviewer_count(), n = g.product_count();
  const Csr& adj = g.adjacency();

  Eigen::MatrixXd rf = Eigen::MatrixXd::Zero(m, 6);
  Eigen::MatrixXd pf = Eigen::MatrixXd::Zero(n, 4);

  std::vector<std::vector<double>> r_ratings(m), p_ratings(n);
  std::vector<std::vector<double>> r_times(m);
  std::vector<double> r_content(m, 0.0);
  std::vector<int> r_cnt(m, 0), p_cnt(n, 0);
  std::vector<std::int64_t> p_first(n, 0), p_last(n, 0);

  for (const auto& e : g.events) {
    r_ratings[e.reviewer].push_back(e.rating);
    r_times[e.reviewer].push_back(double(e.timestamp));
    r_content[e.reviewer] += e.content_len;
    r_cnt[e.reviewer]++;
    if (p_cnt[e.product] == 0) p_first[e.product] = e.timestamp;
    p_last[e.product] = e.timestamp;
    p_ratings[e.product].push_back(e.rating);
    p_cnt[e.product]++;
  }

  for (int i = 0; i < m; ++i) {
    rf(i, 0) = adj.degree(i);
    rf(i, 1) = mean_of(r_ratings[i]);
    rf(i, 2) = stddev_of(r_ratings[i]);
    std::vector<double> gaps;
    for (size_t k = 1; k < r_times[i].size(); ++k)
      gaps.push_back((r_times[i][k] - r_times[i][k - 1]) / 86400.0);
    rf(i, 3) = mean_of(gaps);
    rf(i, 4) = burstiness(gaps);
    rf(i, 5) = r_cnt[i] ? r_content[i] / r_cnt[i] : 0.0;
  }

  for (int j = 0; j < n; ++j) {
    pf(j, 0) = adj.degree(g.product_node(j));
    pf(j, 1) = mean_of(p_ratings[j]);
    double bins[5] = {0, 0, 0, 0, 0};
    for (double r : p_ratings[j]) {
      int b = int(std::lround(r)) - 1;
      bins[std::clamp(b, 0, 4)] += 1.0;
    }
    double total = double(p_ratings[j].size());
    double h = 0.0;
    for (double b : bins)
      if (b > 0.0) {
        double p = b / total;
        h -= p * std::log(p);
      }
    pf(j, 2) = h;
    double days = std::max(1.0, double(p_last[j] - p_first[j]) / 86400.0);
    pf(j, 3) = p_cnt[j] / days;
  }

  auto zscore = [](Eigen::MatrixXd& x) {
    for (int c = 0; c < x.cols(); ++c) {
      double mu = x.col(c).mean();
      double sd = std::sqrt((x.col(c).array() - mu).square().mean());
      if (sd < 1e-12)
        x.col(c).setZero();
      else
        x.col(c) = (x.col(c).array() - mu) / sd;
    }
  };
  zscore(rf);
  zscore(pf);
  g.reviewer_features = std::move(rf);
  g.product_features = std::move(pf);
}

}  // namespace frgd::graph

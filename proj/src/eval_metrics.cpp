#include "frgd/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace frgd::metrics {

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1_of(double p, double r) {
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double mean_defined(const std::vector<double>& xs) {
  double sum = 0.0;
  int n = 0;
  for (double x : xs)
    if (!std::isnan(x)) {
      sum += x;
      ++n;
    }
  return n == 0 ? 0.0 : sum / n;
}

double jaccard_complement(const std::set<std::int64_t>& a,
                          const std::set<std::int64_t>& b) {
  if (a.empty() && b.empty()) return std::numeric_limits<double>::quiet_NaN();
  size_t inter = 0;
  for (auto x : a) inter += b.count(x);
  double uni = double(a.size() + b.size() - inter);
  return 1.0 - double(inter) / uni;
}

void check_binary(const std::vector<double>& scores,
                  const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw InputError("auroc: scores and labels differ in length");
  if (scores.empty()) throw InputError("auroc: empty input");
  bool pos = false, neg = false;
  for (int l : labels) {
    if (l == 1)
      pos = true;
    else if (l == 0)
      neg = true;
    else
      throw InputError("auroc: labels must be 0 or 1");
  }
  if (!pos || !neg) throw InputError("auroc: needs both classes present");
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

ConfusionCounts confusion(const std::vector<int>& labels,
                          const std::vector<int>& preds) {
  if (labels.size() != preds.size())
    throw InputError("confusion: labels and predictions differ in length");
  ConfusionCounts c;
  for (size_t i = 0; i < labels.size(); ++i) {
    if ((labels[i] != 0 && labels[i] != 1) || (preds[i] != 0 && preds[i] != 1))
      throw InputError("confusion: entries must be 0 or 1");
    if (labels[i] == 1)
      (preds[i] == 1 ? c.tp : c.fn)++;
    else
      (preds[i] == 0 ? c.tn : c.fp)++;
  }
  return c;
}

double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw InputError("accuracy: empty confusion counts");
  return double(c.tp + c.tn) / double(c.total());
}

double recall(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0)
    throw InputError("recall: no positive examples in evaluation set");
  return double(c.tp) / double(c.tp + c.fn);
}

double f1_macro(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0)
    throw InputError("f1_macro: evaluation set contains a single class");
  double p1 = safe_div(double(c.tp), double(c.tp + c.fp));
  double r1 = double(c.tp) / double(c.tp + c.fn);
  double p0 = safe_div(double(c.tn), double(c.tn + c.fn));
  double r0 = double(c.tn) / double(c.tn + c.fp);
  return 0.5 * (f1_of(p1, r1) + f1_of(p0, r0));
}

double auroc(const std::vector<double>& scores,
             const std::vector<int>& labels) {
  check_binary(scores, labels);
  int n = int(scores.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] < scores[b]; });

  std::vector<double> rank(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double mid = 0.5 * double(i + 1 + j);  // midrank of the tie run
    for (int k = i; k < j; ++k) rank[order[k]] = mid;
    i = j;
  }
  double pos_rank_sum = 0.0;
  long n_pos = 0;
  for (int k = 0; k < n; ++k)
    if (labels[k] == 1) {
      pos_rank_sum += rank[k];
      ++n_pos;
    }
  long n_neg = n - n_pos;
  return (pos_rank_sum - 0.5 * double(n_pos) * double(n_pos + 1)) /
         (double(n_pos) * double(n_neg));
}

double auroc_bruteforce(const std::vector<double>& scores,
                        const std::vector<int>& labels) {
  check_binary(scores, labels);
  double wins = 0.0;
  long pairs = 0;
  for (size_t p = 0; p < scores.size(); ++p) {
    if (labels[p] != 1) continue;
    for (size_t q = 0; q < scores.size(); ++q) {
      if (labels[q] != 0) continue;
      ++pairs;
      if (scores[p] > scores[q])
        wins += 1.0;
      else if (scores[p] == scores[q])
        wins += 0.5;
    }
  }
  return wins / double(pairs);
}

DynamicsReport dynamics(const graph::TemporalBipartiteGraph& g,
                        const graph::TimeWindowing& w) {
  if (w.count() < 2)
    throw InputError("dynamics: churn and turnover need at least two windows");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  int k = w.count();

  std::vector<long> events(k, 0);
  std::vector<std::set<std::int64_t>> active(k), edges(k);
  std::vector<std::vector<std::int64_t>> times(k);
  for (const auto& e : g.events) {
    int t = w.window_of(double(e.timestamp));
    if (t < 0 || t >= k) continue;
    events[t]++;
    active[t].insert(e.reviewer);
    edges[t].insert(std::int64_t(e.reviewer) * g.product_count() + e.product);
    times[t].push_back(e.timestamp);
  }

  DynamicsReport rep;
  rep.r.assign(k, nan);
  rep.c.assign(k, nan);
  rep.u.assign(k, nan);
  rep.B.assign(k, nan);
  for (int t = 0; t < k; ++t) {
    rep.r[t] = double(events[t]) / (w.width(t) / 86400.0);
    if (t > 0) {
      rep.c[t] = jaccard_complement(active[t], active[t - 1]);
      rep.u[t] = jaccard_complement(edges[t], edges[t - 1]);
    }
    if (times[t].size() >= 2) {
      std::sort(times[t].begin(), times[t].end());
      std::vector<double> gaps;
      for (size_t j = 1; j < times[t].size(); ++j)
        gaps.push_back(double(times[t][j] - times[t][j - 1]));
      double mu = std::accumulate(gaps.begin(), gaps.end(), 0.0) / gaps.size();
      double var = 0.0;
      for (double d : gaps) var += (d - mu) * (d - mu);
      double sigma = std::sqrt(var / gaps.size());
      rep.B[t] = sigma + mu == 0.0 ? -1.0 : (sigma - mu) / (sigma + mu);
    }
  }
  rep.r_bar = mean_defined(rep.r);
  rep.c_bar = mean_defined(rep.c);
  rep.u_bar = mean_defined(rep.u);
  rep.B_bar = mean_defined(rep.B);
  rep.D = composite_index({rep.r_norm, rep.c_norm, rep.u_norm, rep.B_norm});
  return rep;
}

void normalize_reports(std::vector<DynamicsReport>& reports) {
  if (reports.empty()) return;
  auto component = [&](auto bar, auto norm) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : reports) {
      lo = std::min(lo, r.*bar);
      hi = std::max(hi, r.*bar);
    }
    for (auto& r : reports) {
      if (hi > lo) {
        r.*norm = (r.*bar - lo) / (hi - lo);
        r.normalized_degenerate = false;
      } else {
        r.*norm = 0.5;
      }
    }
  };
  for (auto& r : reports) r.normalized_degenerate = true;
  component(&DynamicsReport::r_bar, &DynamicsReport::r_norm);
  component(&DynamicsReport::c_bar, &DynamicsReport::c_norm);
  component(&DynamicsReport::u_bar, &DynamicsReport::u_norm);
  component(&DynamicsReport::B_bar, &DynamicsReport::B_norm);
  for (auto& r : reports)
    r.D = composite_index({r.r_norm, r.c_norm, r.u_norm, r.B_norm});
}

double composite_index(const std::array<double, 4>& normalized) {
  return std::accumulate(normalized.begin(), normalized.end(), 0.0) / 4.0;
}

std::vector<Group> extract_groups(const graph::TemporalBipartiteGraph& g,
                                  const std::vector<std::uint8_t>& suspicious,
                                  const std::vector<double>& scores,
                                  double min_spam) {
  int m = g.reviewer_count();
  if (int(suspicious.size()) != m || int(scores.size()) != m)
    throw InputError("extract_groups: flag/score length must match reviewers");
  if (min_spam < 0.0 || min_spam > 1.0)
    throw InputError("extract_groups: min_spam outside [0, 1]");

  // link suspicious reviewers that share a product
  std::vector<std::vector<int>> by_product(g.product_count());
  for (const auto& e : g.events)
    if (suspicious[e.reviewer]) by_product[e.product].push_back(e.reviewer);

  DisjointSet ds(m);
  for (auto& rs : by_product) {
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
    for (size_t i = 1; i < rs.size(); ++i) ds.unite(rs[0], rs[i]);
  }

  std::vector<std::vector<int>> comp(m);
  for (int r = 0; r < m; ++r)
    if (suspicious[r]) comp[ds.find(r)].push_back(r);

  std::vector<Group> out;
  for (int root = 0; root < m; ++root) {
    if (comp[root].size() < 2) continue;
    Group grp;
    grp.members = comp[root];  // ascending by construction
    double sum = 0.0;
    for (int r : grp.members) sum += scores[r];
    grp.mean_score = sum / double(grp.members.size());
    grp.flagged = grp.mean_score >= min_spam;
    out.push_back(std::move(grp));
  }
  return out;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << "variant,split,accuracy,recall,f1_macro,auroc\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f,%.6f\n",
                  r.variant.c_str(), r.split.c_str(), r.accuracy, r.recall,
                  r.f1_macro, r.auroc);
    os << buf;
  }
  return os.str();
}

std::string report_table(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %-8s %9s %9s %9s %9s\n", "variant",
                "split", "accuracy", "recall", "f1_macro", "auroc");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-14s %-8s %9.4f %9.4f %9.4f %9.4f\n",
                  r.variant.c_str(), r.split.c_str(), r.accuracy, r.recall,
                  r.f1_macro, r.auroc);
    os << buf;
  }
  return os.str();
}

}  // namespace frgd::metrics

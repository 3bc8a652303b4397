#include "frgd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "frgd/synth_bench.hpp"

namespace frgd::pipeline {

namespace {

constexpr int kStaticDim = 12;  // [2 type | 6 reviewer | 4 product]

// Stratified holdout: returns held-out rows, ceil(fraction * class size) per
// class, both outputs sorted.
std::vector<int> stratified_holdout(const std::vector<int>& rows,
                                    const std::vector<int>& labels,
                                    double fraction, Rng& rng) {
  std::vector<int> held;
  for (int cls : {0, 1}) {
    std::vector<int> pool;
    for (int r : rows)
      if (labels[r] == cls) pool.push_back(r);
    std::vector<int> perm = rng.permutation(int(pool.size()));
    int take = int(std::ceil(fraction * double(pool.size())));
    for (int i = 0; i < take && i < int(pool.size()); ++i)
      held.push_back(pool[perm[i]]);
  }
  std::sort(held.begin(), held.end());
  return held;
}

Eigen::MatrixXd static_features(const graph::TemporalBipartiteGraph& g) {
  int m = g.reviewer_count(), n = g.node_count();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, kStaticDim);
  for (int v = 0; v < n; ++v) {
    if (v < m) {
      x(v, 0) = 1.0;
      x.block(v, 2, 1, 6) = g.reviewer_features.row(v);
    } else {
      x(v, 1) = 1.0;
      x.block(v, 8, 1, 4) = g.product_features.row(v - m);
    }
  }
  return x;
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  std::nth_element(xs.begin(), xs.begin() + mid - 1, xs.begin() + mid);
  return 0.5 * (xs[mid - 1] + hi);
}

double metric_or_nan(const std::function<double()>& f) {
  try {
    return f();
  } catch (const InputError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

metrics::ReportRow eval_rows(const std::string& variant,
                             const std::string& split,
                             const std::vector<double>& scores,
                             const std::vector<int>& labels) {
  metrics::ReportRow row;
  row.variant = variant;
  row.split = split;
  std::vector<int> preds(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] >= 0.5;
  row.accuracy = metric_or_nan(
      [&] { return metrics::accuracy(metrics::confusion(labels, preds)); });
  row.recall = metric_or_nan(
      [&] { return metrics::recall(metrics::confusion(labels, preds)); });
  row.f1_macro = metric_or_nan(
      [&] { return metrics::f1_macro(metrics::confusion(labels, preds)); });
  row.auroc = metric_or_nan([&] { return metrics::auroc(scores, labels); });
  return row;
}

}  // namespace

void PipelineConfig::validate() const {
  if (n_windows < 2) throw InputError("pipeline: need at least two windows");
  if (max_sample < 1) throw InputError("pipeline: max_sample must be >= 1");
  if (test_fraction <= 0.0 || test_fraction >= 1.0)
    throw InputError("pipeline: test_fraction must be in (0, 1)");
  if (min_spam < 0.0 || min_spam > 1.0)
    throw InputError("pipeline: min_spam outside [0, 1]");
  if (cluster_divisor < 1)
    throw InputError("pipeline: cluster_divisor must be >= 1");
  pool_weights.validate();
  dga.validate();
}

Prepared prepare(LabeledGraph& lg, const PipelineConfig& cfg,
                 const nfs::NfsModel* pretrained_nfs) {
  cfg.validate();
  auto& g = lg.g;
  if (g.events.empty()) throw InputError("pipeline: empty graph");
  bool labeled = !lg.labels.empty();
  if (labeled && int(lg.labels.size()) != g.reviewer_count())
    throw InputError("pipeline: label vector must cover every reviewer");
  if (!labeled && pretrained_nfs == nullptr)
    throw InputError("pipeline: unlabeled data needs a fitted NFS model");
  if (g.reviewer_features.rows() != g.reviewer_count()) graph::raw_features(g);

  Prepared out;
  out.profiles = metrics::profile_all(g, cfg.profile);
  out.nfs_features = nfs::assemble_features(out.profiles, cfg.nfs.dv);

  Rng rng(cfg.seed);
  Rng split_rng = rng.fork(11);
  Rng val_rng = rng.fork(12);

  if (labeled) {
    std::vector<int> labeled_rows;
    for (int r = 0; r < g.reviewer_count(); ++r)
      if (lg.labels[r] == 0 || lg.labels[r] == 1) labeled_rows.push_back(r);
    out.test_reviewers =
        stratified_holdout(labeled_rows, lg.labels, cfg.test_fraction,
                           split_rng);
    std::set<int> held(out.test_reviewers.begin(), out.test_reviewers.end());
    for (int r : labeled_rows)
      if (!held.count(r)) out.train_reviewers.push_back(r);
  }

  if (pretrained_nfs != nullptr) {
    out.nfs_model = *pretrained_nfs;
  } else {
    if (out.train_reviewers.empty())
      throw InputError("pipeline: no labeled reviewers to fit NFS");
    Eigen::MatrixXd feats(out.train_reviewers.size(), 2);
    std::vector<int> labs(out.train_reviewers.size());
    for (size_t i = 0; i < out.train_reviewers.size(); ++i) {
      feats.row(i) = out.nfs_features.row(out.train_reviewers[i]);
      labs[i] = lg.labels[out.train_reviewers[i]];
    }
    nfs::NfsConfig ncfg = cfg.nfs;
    ncfg.seed = cfg.seed;
    out.nfs_model = nfs::fit(feats, labs, ncfg);
  }
  out.scores = nfs::score(out.nfs_model, out.nfs_features);

  out.windows = graph::make_windows(g, cfg.n_windows, cfg.tau_abs);
  int n_win = out.windows.count();
  int n = g.node_count();
  Eigen::MatrixXd x_static = static_features(g);

  std::vector<pool::PooledGraph> per_window(n_win);
  std::vector<std::vector<double>> win_importance(n_win);
  out.window_stats.assign(n_win, {});

#pragma omp parallel for schedule(dynamic)
  for (int w = 0; w < n_win; ++w) {
    out.window_stats[w].window = w;
    pool::WindowSlice slice = pool::window_slice(g, out.windows, w);
    if (slice.nodes.empty()) continue;
    out.window_stats[w].active_nodes = int(slice.nodes.size());
    out.window_stats[w].window_edges = long(slice.edges.size());

    std::vector<int> deg(n, 0);
    for (const auto& e : slice.edges) {
      deg[e.u]++;
      deg[e.v]++;
    }
    int max_deg = 0;
    for (int v : slice.nodes) max_deg = std::max(max_deg, deg[v]);

    std::vector<double> imp(n, 0.0);
    std::vector<double> in_window;
    for (int v : slice.nodes) {
      imp[v] = pool::node_importance(out.scores.normalized[v], deg[v], max_deg,
                                     out.profiles[v].clustering_coeff,
                                     cfg.pool_weights);
      in_window.push_back(imp[v]);
    }
    double theta = cfg.pool_weights.theta >= 0.0 ? cfg.pool_weights.theta
                                                 : median_of(in_window);
    std::vector<int> sampled =
        pool::sample_nodes(slice.nodes, imp, theta, cfg.max_sample);

    pool::PoolInput pin;
    pin.window = w;
    pin.nodes = sampled;
    pin.features.resize(int(sampled.size()), kStaticDim);
    std::vector<int> local(n, -1);
    for (size_t i = 0; i < sampled.size(); ++i) {
      int v = sampled[i];
      local[v] = int(i);
      pin.features.row(int(i)) = x_static.row(v);
      pin.importance.push_back(imp[v]);
      pin.s_norm.push_back(out.scores.normalized[v]);
    }
    std::vector<double> slice_time(n, 0.0);
    for (size_t i = 0; i < slice.nodes.size(); ++i)
      slice_time[slice.nodes[i]] = slice.node_time01[i];
    for (int v : sampled) pin.time01.push_back(slice_time[v]);

    for (const auto& e : pool::induce_edges(slice.edges, sampled)) {
      double ie = pool::edge_importance(e.weight, x_static.row(e.u),
                                        x_static.row(e.v), cfg.pool_weights);
      if (ie >= cfg.pool_weights.delta)
        pin.edges.push_back({local[e.u], local[e.v], ie});
    }
    int kc = (int(sampled.size()) + cfg.cluster_divisor - 1) /
             cfg.cluster_divisor;
    per_window[w] = pool::cluster_pool(pin, kc);
    out.window_stats[w].sampled_nodes = int(sampled.size());
    out.window_stats[w].induced_edges = long(pin.edges.size());
    out.window_stats[w].supernodes = int(per_window[w].supernodes.size());
    win_importance[w] = std::move(imp);
  }
  out.pooled = pool::merge_windows(per_window);

  std::vector<std::pair<int, int>> base_edges;
  const auto& adj = g.adjacency();
  for (int u = 0; u < n; ++u)
    for (int v : adj.row(u))
      if (u < v) base_edges.emplace_back(u, v);
  dga::EmbedConfig ecfg = cfg.embed;
  ecfg.seed = cfg.seed;
  Eigen::MatrixXd z0 = dga::global_embed(n, base_edges, ecfg);

  const auto& sup = out.pooled.supernodes;
  int n_sup = int(sup.size());
  dga::DgaInput& in = out.input;
  in.static_feats.resize(n_sup, kStaticDim);
  in.s_norm.resize(n_sup);
  in.time01.resize(n_sup);
  in.z.resize(n_sup, z0.cols());
  in.labels.assign(n_sup, -1);

  std::vector<char> is_train(g.reviewer_count(), 0);
  for (int r : out.train_reviewers) is_train[r] = 1;
  out.reviewer_supernodes.assign(g.reviewer_count(), {});

  for (int k = 0; k < n_sup; ++k) {
    in.static_feats.row(k) = sup[k].h.transpose();
    in.s_norm[k] = sup[k].s_norm;
    in.time01[k] = sup[k].time01;

    const auto& wimp = win_importance[sup[k].window];
    Eigen::RowVectorXd zk = Eigen::RowVectorXd::Zero(z0.cols());
    double wsum = 0.0;
    int votes[2] = {0, 0};
    for (int v : sup[k].members) {
      double iw = wimp.empty() ? 1.0 : wimp[v];
      zk += iw * z0.row(v);
      wsum += iw;
      if (v < g.reviewer_count()) {
        out.reviewer_supernodes[v].push_back(k);
        if (labeled && is_train[v] && lg.labels[v] >= 0)
          votes[lg.labels[v]]++;
      }
    }
    in.z.row(k) = wsum > 0.0 ? (zk / wsum).eval() : zk;
    if (votes[0] + votes[1] > 0) in.labels[k] = votes[1] >= votes[0] ? 1 : 0;
  }

  std::vector<int> labeled_sup;
  for (int k = 0; k < n_sup; ++k)
    if (in.labels[k] >= 0) labeled_sup.push_back(k);
  in.val_rows = stratified_holdout(labeled_sup, in.labels, 0.2, val_rng);
  std::set<int> vr(in.val_rows.begin(), in.val_rows.end());
  for (int k : labeled_sup)
    if (!vr.count(k)) in.train_rows.push_back(k);
  if (in.train_rows.empty()) {
    in.train_rows = in.val_rows;  // tiny datasets: train on everything labeled
    in.val_rows.clear();
  }
  in.edges.clear();
  for (const auto& se : out.pooled.superedges) in.edges.emplace_back(se.a, se.b);
  return out;
}

TrainedVariant train_variant(const Prepared& prep, const PipelineConfig& cfg,
                             dga::Ablation ablation) {
  TrainedVariant tv;
  tv.ablation = ablation;
  dga::DgaConfig dc = cfg.dga;
  dc.ablation = ablation;
  dc.seed = cfg.seed;  // one master seed for splits, embedding and training
  tv.model = dga::init_model(dc, int(prep.input.static_feats.cols()));
  tv.history = dga::train(tv.model, prep.input);
  return tv;
}

std::vector<double> reviewer_scores(const dga::DgaModel& model,
                                    const Prepared& prep) {
  dga::ForwardResult fr = dga::forward(model, prep.input);
  std::vector<double> out(prep.reviewer_supernodes.size(), 0.5);
  for (size_t r = 0; r < prep.reviewer_supernodes.size(); ++r) {
    const auto& sups = prep.reviewer_supernodes[r];
    if (sups.empty()) continue;
    double sum = 0.0;
    for (int k : sups) sum += fr.probs(k, 1);
    out[r] = sum / double(sups.size());
  }
  return out;
}

std::vector<std::vector<std::string>> reviewer_scales(
    const graph::TemporalBipartiteGraph& g) {
  std::vector<long> count(g.product_count(), 0);
  for (const auto& e : g.events) count[e.product]++;
  std::vector<std::set<std::string>> sets(g.reviewer_count());
  for (const auto& e : g.events)
    sets[e.reviewer].insert(synth::scale_of(count[e.product]));
  std::vector<std::vector<std::string>> out(g.reviewer_count());
  for (int r = 0; r < g.reviewer_count(); ++r)
    out[r].assign(sets[r].begin(), sets[r].end());
  return out;
}

std::string AblationReport::csv() const {
  std::vector<metrics::ReportRow> rows;
  for (const auto& v : variants)
    rows.insert(rows.end(), v.rows.begin(), v.rows.end());
  return metrics::report_csv(rows);
}

std::string AblationReport::table() const {
  std::vector<metrics::ReportRow> rows;
  for (const auto& v : variants)
    rows.insert(rows.end(), v.rows.begin(), v.rows.end());
  return metrics::report_table(rows);
}

AblationReport run_ablation(LabeledGraph& lg, const PipelineConfig& cfg,
                            const std::vector<dga::Ablation>& variants,
                            bool by_scale) {
  if (lg.labels.empty())
    throw InputError("run_ablation: needs a labeled dataset");
  Prepared prep = prepare(lg, cfg);
  if (prep.test_reviewers.empty())
    throw InputError("run_ablation: empty test split");

  AblationReport rep;
  rep.test_reviewers = prep.test_reviewers;
  for (int r : prep.test_reviewers) rep.test_labels.push_back(lg.labels[r]);

  std::vector<std::vector<std::string>> scales;
  if (by_scale) scales = reviewer_scales(lg.g);

  for (dga::Ablation abl : variants) {
    TrainedVariant tv = train_variant(prep, cfg, abl);
    std::vector<double> all_scores = reviewer_scores(tv.model, prep);

    VariantEval ve;
    ve.variant = dga::to_string(abl);
    ve.history = tv.history;
    for (int r : prep.test_reviewers) ve.test_scores.push_back(all_scores[r]);
    ve.rows.push_back(
        eval_rows(ve.variant, "all", ve.test_scores, rep.test_labels));
    if (by_scale) {
      for (const char* name : {"small", "medium", "large"}) {
        std::string bucket(name);
        std::vector<double> s;
        std::vector<int> l;
        for (size_t i = 0; i < prep.test_reviewers.size(); ++i) {
          int r = prep.test_reviewers[i];
          const auto& in_buckets = scales[r];
          if (std::find(in_buckets.begin(), in_buckets.end(), bucket) !=
              in_buckets.end()) {
            s.push_back(ve.test_scores[i]);
            l.push_back(rep.test_labels[i]);
          }
        }
        if (!s.empty()) ve.rows.push_back(eval_rows(ve.variant, bucket, s, l));
      }
    }
    rep.variants.push_back(std::move(ve));
  }
  return rep;
}

}  // namespace frgd::pipeline

#include "frgd/dga_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "frgd/autodiff.hpp"

namespace frgd::dga {

Ablation ablation_from_string(const std::string& s) {
  if (s == "full") return Ablation::full;
  if (s == "A" || s == "no_nfs") return Ablation::no_nfs;
  if (s == "B" || s == "no_temporal") return Ablation::no_temporal;
  if (s == "C" || s == "type_agnostic") return Ablation::type_agnostic;
  if (s == "D" || s == "nfs_only") return Ablation::nfs_only;
  if (s == "no_attention") return Ablation::no_attention;
  throw InputError("unknown ablation variant: " + s);
}

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::no_nfs: return "no_nfs";
    case Ablation::no_temporal: return "no_temporal";
    case Ablation::type_agnostic: return "type_agnostic";
    case Ablation::nfs_only: return "nfs_only";
    case Ablation::no_attention: return "no_attention";
  }
  return "?";
}

void DgaConfig::validate() const {
  if (layers < 1 || hidden < 1 || heads < 1 || time_dim < 1 || embed_dim < 1)
    throw InputError("dga config: dimensions must be >= 1");
  if (lr <= 0.0 || leaky_slope <= 0.0)
    throw InputError("dga config: rates must be > 0");
  if (dropout < 0.0 || dropout >= 1.0)
    throw InputError("dga config: dropout must be in [0, 1)");
  if (weight_decay < 0.0) throw InputError("dga config: negative weight decay");
  if (patience < 1 || max_epochs < 1)
    throw InputError("dga config: patience and max_epochs must be >= 1");
}

void DgaInput::validate() const {
  int m = n();
  if (m == 0) throw InputError("dga input: empty graph");
  if (s_norm.size() != m || time01.size() != m ||
      static_cast<int>(labels.size()) != m || z.rows() != m)
    throw InputError("dga input: per-node arrays disagree on node count");
  for (int i = 0; i < m; ++i) {
    if (time01(i) < -1e-9 || time01(i) > 1.0 + 1e-9)
      throw InputError("dga input: time01 outside [0, 1]");
    if (labels[i] < -1 || labels[i] > 1)
      throw InputError("dga input: labels must be -1, 0 or 1");
  }
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= m || b >= m)
      throw InputError("dga input: edge endpoint out of range");
    if (a == b) throw InputError("dga input: explicit self edge");
  }
  for (const auto* rows : {&train_rows, &val_rows}) {
    for (int r : *rows) {
      if (r < 0 || r >= m) throw InputError("dga input: mask row out of range");
      if (labels[r] < 0) throw InputError("dga input: masked row is unlabeled");
    }
  }
}

namespace {

struct ParamEntry {
  std::string name;
  Eigen::MatrixXd* mat;
  bool decay;
};

std::vector<ParamEntry> collect_params(DgaModel& m) {
  std::vector<ParamEntry> out;
  out.push_back({"omega", &m.omega, false});
  out.push_back({"phi", &m.phi, false});
  for (size_t l = 0; l < m.layers.size(); ++l) {
    LayerParams& L = m.layers[l];
    for (size_t h = 0; h < L.Wq.size(); ++h) {
      std::string p = "L" + std::to_string(l) + ".h" + std::to_string(h) + ".";
      out.push_back({p + "Wq", &L.Wq[h], true});
      out.push_back({p + "Wk", &L.Wk[h], true});
      out.push_back({p + "Wt", &L.Wt[h], true});
      out.push_back({p + "Wv", &L.Wv[h], true});
      out.push_back({p + "aq", &L.aq[h], true});
      out.push_back({p + "ak", &L.ak[h], true});
      out.push_back({p + "at", &L.at[h], true});
    }
    std::string p = "L" + std::to_string(l) + ".";
    out.push_back({p + "Wmix", &L.Wmix, true});
    out.push_back({p + "bmix", &L.bmix, false});
  }
  out.push_back({"Wc", &m.Wc, true});
  out.push_back({"bc", &m.bc, false});
  out.push_back({"Wd", &m.Wd, true});
  out.push_back({"bd", &m.bd, false});
  return out;
}

struct TapeParams {
  ad::Var omega, phi;
  struct L {
    std::vector<ad::Var> Wq, Wk, Wt, Wv, aq, ak, at;
    ad::Var Wmix, bmix;
  };
  std::vector<L> layers;
  ad::Var Wc, bc, Wd, bd;
  std::vector<ad::Var> ordered;  // collect_params order
};

TapeParams register_leaves(ad::Tape& t, const DgaModel& m, bool rg) {
  TapeParams P;
  auto put = [&](const Eigen::MatrixXd& mat) {
    ad::Var v = t.leaf(mat, rg);
    P.ordered.push_back(v);
    return v;
  };
  P.omega = put(m.omega);
  P.phi = put(m.phi);
  for (const LayerParams& L : m.layers) {
    TapeParams::L tl;
    for (size_t h = 0; h < L.Wq.size(); ++h) {
      tl.Wq.push_back(put(L.Wq[h]));
      tl.Wk.push_back(put(L.Wk[h]));
      tl.Wt.push_back(put(L.Wt[h]));
      tl.Wv.push_back(put(L.Wv[h]));
      tl.aq.push_back(put(L.aq[h]));
      tl.ak.push_back(put(L.ak[h]));
      tl.at.push_back(put(L.at[h]));
    }
    tl.Wmix = put(L.Wmix);
    tl.bmix = put(L.bmix);
    P.layers.push_back(std::move(tl));
  }
  P.Wc = put(m.Wc);
  P.bc = put(m.bc);
  P.Wd = put(m.Wd);
  P.bd = put(m.bd);
  return P;
}

struct Prep {
  std::vector<int> src, dst;
  std::vector<std::pair<int, int>> segments;  // one [begin, end) per node
  Eigen::MatrixXd edge_const;                 // gamma*s_src + lambda*z.z
  Eigen::MatrixXd uniform_alpha;              // 1/|segment| per edge
};

Prep prepare(const DgaInput& in, const DgaConfig& cfg) {
  int n = in.n();
  std::vector<std::pair<int, int>> dir;  // (dst, src), self loops included
  dir.reserve(in.edges.size() * 2 + static_cast<size_t>(n));
  for (auto [a, b] : in.edges) {
    dir.emplace_back(b, a);
    dir.emplace_back(a, b);
  }
  for (int v = 0; v < n; ++v) dir.emplace_back(v, v);
  std::sort(dir.begin(), dir.end());
  dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

  Prep p;
  int e_count = static_cast<int>(dir.size());
  p.src.resize(e_count);
  p.dst.resize(e_count);
  for (int e = 0; e < e_count; ++e) {
    p.dst[e] = dir[e].first;
    p.src[e] = dir[e].second;
  }
  p.segments.assign(n, {0, 0});
  int at = 0;
  for (int v = 0; v < n; ++v) {
    int b = at;
    while (at < e_count && p.dst[at] == v) ++at;
    p.segments[v] = {b, at};
  }
  double g = cfg.ablation == Ablation::no_nfs ? 0.0 : cfg.gamma;
  p.edge_const.resize(e_count, 1);
  p.uniform_alpha.resize(e_count, 1);
  for (int e = 0; e < e_count; ++e) {
    p.edge_const(e, 0) = g * in.s_norm(p.src[e]) +
                         cfg.lambda * in.z.row(p.dst[e]).dot(in.z.row(p.src[e]));
  }
  for (auto [b, e] : p.segments) {
    for (int i = b; i < e; ++i) p.uniform_alpha(i, 0) = 1.0 / double(e - b);
  }
  return p;
}

struct BuildOut {
  ad::Var cls, h_final;
  std::vector<std::vector<ad::Var>> alphas, att_logits;
};

BuildOut build_forward(ad::Tape& t, const TapeParams& P, const DgaModel& m,
                       const DgaInput& in, const Prep& prep, bool training,
                       Rng* drop) {
  const DgaConfig& cfg = m.config;
  int n = in.n();
  BuildOut out;

  if (cfg.ablation == Ablation::nfs_only) {
    ad::Var s = t.leaf(Eigen::MatrixXd(in.s_norm));
    out.h_final = s;
    out.cls = t.add_rowvec(t.matmul(s, P.Wd), P.bd);
    return out;
  }

  Eigen::MatrixXd stat = in.static_feats;
  if (cfg.ablation == Ablation::type_agnostic && stat.cols() >= 2)
    stat.leftCols(2).setZero();
  Eigen::VectorXd sn = cfg.ablation == Ablation::no_nfs
                           ? Eigen::VectorXd::Zero(n)
                           : Eigen::VectorXd(in.s_norm);

  bool use_time = cfg.ablation != Ablation::no_temporal;
  ad::Var time_block;
  if (!use_time) {
    time_block = t.leaf(Eigen::MatrixXd::Zero(n, cfg.time_dim));
  } else if (cfg.raw_time_diff) {
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n, cfg.time_dim);
    raw.col(0) = in.time01;
    time_block = t.leaf(raw);
  } else {
    time_block = t.sin_affine(in.time01, P.omega, P.phi);
  }
  ad::Var H = t.hcat({t.leaf(stat), time_block, t.leaf(Eigen::MatrixXd(sn))});

  for (int l = 0; l < cfg.layers; ++l) {
    const TapeParams::L& TL = P.layers[l];
    std::vector<ad::Var> heads;
    std::vector<ad::Var> lay_alpha, lay_logit;
    for (int h = 0; h < cfg.heads; ++h) {
      ad::Var alpha;
      if (cfg.ablation == Ablation::no_attention) {
        alpha = t.leaf(prep.uniform_alpha);
        lay_logit.push_back(alpha);
      } else {
        ad::Var sq = t.matmul(t.matmul(H, TL.Wq[h]), TL.aq[h]);
        ad::Var sk = t.matmul(t.matmul(H, TL.Wk[h]), TL.ak[h]);
        ad::Var logits =
            t.add(t.gather_rows(sq, prep.dst), t.gather_rows(sk, prep.src));
        if (use_time) {
          ad::Var st = t.matmul(t.matmul(time_block, TL.Wt[h]), TL.at[h]);
          logits = t.add(logits, t.sub(t.gather_rows(st, prep.dst),
                                       t.gather_rows(st, prep.src)));
        }
        ad::Var act = t.leaky_relu(t.add_const(logits, prep.edge_const),
                                   cfg.leaky_slope);
        lay_logit.push_back(act);
        alpha = t.segment_softmax(act, prep.segments);
      }
      lay_alpha.push_back(alpha);
      if (training && cfg.dropout > 0.0 && drop != nullptr) {
        double q = 1.0 - cfg.dropout;
        Eigen::MatrixXd mask(prep.edge_const.rows(), 1);
        for (int e = 0; e < mask.rows(); ++e)
          mask(e, 0) = drop->next_double() < q ? 1.0 / q : 0.0;
        alpha = t.mul_elem_const(alpha, mask);
      }
      ad::Var v_proj = t.matmul(H, TL.Wv[h]);
      ad::Var msg = t.mul_colvec(t.gather_rows(v_proj, prep.src), alpha);
      heads.push_back(t.scatter_rows(msg, prep.dst, n));
    }
    ad::Var mixed =
        t.add_rowvec(t.matmul(t.hcat(heads), TL.Wmix), TL.bmix);
    H = (l + 1 < cfg.layers) ? t.elu(mixed) : mixed;
    out.alphas.push_back(std::move(lay_alpha));
    out.att_logits.push_back(std::move(lay_logit));
  }
  out.h_final = H;
  out.cls = t.add_rowvec(t.matmul(H, P.Wc), P.bc);
  return out;
}

void check_dims(const DgaModel& m, const DgaInput& in) {
  if (in.static_feats.cols() != m.static_dim)
    throw InputError("dga: static feature width does not match the model");
  if (m.omega.cols() != m.config.time_dim)
    throw InputError("dga: time encoding width does not match the config");
}

std::vector<int> loss_rows(const DgaInput& in, const std::vector<int>& given) {
  if (!given.empty()) return given;
  std::vector<int> rows;
  for (int i = 0; i < in.n(); ++i)
    if (in.labels[i] >= 0) rows.push_back(i);
  if (rows.empty()) throw InputError("dga: no labeled rows");
  return rows;
}

// Balanced class weights (n / 2n_c) over the training rows, indexed by row
// id. Fraud labels are rare; an unweighted loss spends its first thousand
// epochs learning the base rate.
std::vector<double> class_weights(const DgaInput& in,
                                  const std::vector<int>& train_rows) {
  double cnt[2] = {0.0, 0.0};
  for (int r : train_rows)
    if (in.labels[r] == 0 || in.labels[r] == 1) cnt[in.labels[r]] += 1.0;
  double n = cnt[0] + cnt[1];
  double cw[2];
  for (int c = 0; c < 2; ++c) cw[c] = cnt[c] > 0.0 ? n / (2.0 * cnt[c]) : 1.0;
  std::vector<double> rw(in.labels.size(), 1.0);
  for (size_t i = 0; i < in.labels.size(); ++i)
    if (in.labels[i] == 0 || in.labels[i] == 1) rw[i] = cw[in.labels[i]];
  return rw;
}

double eval_loss(DgaModel& m, const DgaInput& in, const Prep& prep,
                 const std::vector<int>& rows,
                 const std::vector<double>& rw) {
  ad::Tape t;
  TapeParams P = register_leaves(t, m, false);
  BuildOut b = build_forward(t, P, m, in, prep, false, nullptr);
  return t.val(t.ce_loss_masked(b.cls, in.labels, rows, rw))(0, 0);
}

Eigen::MatrixXd glorot(Rng& rng, int rows, int cols, double scale = -1.0) {
  double sd = scale > 0.0 ? scale : std::sqrt(2.0 / double(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.next_normal(0.0, sd);
  return m;
}

}  // namespace

DgaModel init_model(const DgaConfig& cfg, int static_dim) {
  cfg.validate();
  if (static_dim < 1) throw InputError("init_model: static_dim must be >= 1");
  DgaModel m;
  m.config = cfg;
  m.static_dim = static_dim;
  Rng rng = Rng(cfg.seed).fork(5);
  m.omega.resize(1, cfg.time_dim);
  for (int i = 0; i < cfg.time_dim; ++i) m.omega(0, i) = std::pow(2.0, i);
  m.phi = Eigen::MatrixXd::Zero(1, cfg.time_dim);
  int d_in = static_dim + cfg.time_dim + 1;
  for (int l = 0; l < cfg.layers; ++l) {
    LayerParams L;
    int din = l == 0 ? d_in : cfg.hidden;
    for (int h = 0; h < cfg.heads; ++h) {
      L.Wq.push_back(glorot(rng, din, cfg.hidden));
      L.Wk.push_back(glorot(rng, din, cfg.hidden));
      L.Wt.push_back(glorot(rng, cfg.time_dim, cfg.hidden));
      L.Wv.push_back(glorot(rng, din, cfg.hidden));
      L.aq.push_back(glorot(rng, cfg.hidden, 1));
      L.ak.push_back(glorot(rng, cfg.hidden, 1));
      L.at.push_back(glorot(rng, cfg.hidden, 1));
    }
    L.Wmix = glorot(rng, cfg.heads * cfg.hidden, cfg.hidden);
    L.bmix = Eigen::MatrixXd::Zero(1, cfg.hidden);
    m.layers.push_back(std::move(L));
  }
  // Small classifier init keeps epoch-0 logits near zero (uniform softmax).
  m.Wc = glorot(rng, cfg.hidden, 2, 0.1);
  m.bc = Eigen::MatrixXd::Zero(1, 2);
  m.Wd = glorot(rng, 1, 2, 0.1);
  m.bd = Eigen::MatrixXd::Zero(1, 2);
  return m;
}

ForwardResult forward(const DgaModel& model, const DgaInput& in) {
  model.config.validate();
  in.validate();
  check_dims(model, in);
  Prep prep = prepare(in, model.config);
  ad::Tape t;
  TapeParams P = register_leaves(t, model, false);
  BuildOut b = build_forward(t, P, model, in, prep, false, nullptr);

  ForwardResult r;
  r.logits = t.val(b.cls);
  r.h_final = t.val(b.h_final);
  r.probs.resize(r.logits.rows(), 2);
  for (int i = 0; i < r.logits.rows(); ++i) {
    double mx = r.logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (r.logits.row(i).array() - mx).exp();
    r.probs.row(i) = e / e.sum();
  }
  int e_count = static_cast<int>(prep.src.size());
  r.edge_src_dst.resize(e_count);
  for (int e = 0; e < e_count; ++e)
    r.edge_src_dst[e] = {prep.src[e], prep.dst[e]};
  r.segments = prep.segments;
  for (size_t l = 0; l < b.alphas.size(); ++l) {
    std::vector<Eigen::VectorXd> la, ll;
    for (size_t h = 0; h < b.alphas[l].size(); ++h) {
      la.push_back(t.val(b.alphas[l][h]).col(0));
      ll.push_back(t.val(b.att_logits[l][h]).col(0));
    }
    r.alphas.push_back(std::move(la));
    r.att_logits.push_back(std::move(ll));
  }
  return r;
}

TrainResult train(DgaModel& model, const DgaInput& in) {
  model.config.validate();
  in.validate();
  check_dims(model, in);
  const DgaConfig& cfg = model.config;
  Prep prep = prepare(in, cfg);
  std::vector<int> tr = loss_rows(in, in.train_rows);
  std::vector<int> va = in.val_rows.empty() ? tr : in.val_rows;
  std::vector<double> rw = class_weights(in, tr);

  Rng drop = Rng(cfg.seed).fork(17);
  std::vector<ParamEntry> params = collect_params(model);
  std::vector<Eigen::MatrixXd> best;
  best.reserve(params.size());
  for (const ParamEntry& p : params) best.push_back(*p.mat);

  TrainResult res;
  double best_val = std::numeric_limits<double>::infinity();
  int wait = 0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    ad::Tape t;
    TapeParams P = register_leaves(t, model, true);
    BuildOut b = build_forward(t, P, model, in, prep, true, &drop);
    ad::Var loss = t.ce_loss_masked(b.cls, in.labels, tr, rw);
    double train_loss = t.val(loss)(0, 0);
    if (!std::isfinite(train_loss)) {
      std::ostringstream os;
      os << "dga training diverged (non-finite loss) at epoch " << epoch;
      throw InvariantError(os.str());
    }
    t.backward(loss);
    for (size_t k = 0; k < params.size(); ++k) {
      const Eigen::MatrixXd& g = t.grad(P.ordered[k]);
      if (params[k].decay && cfg.weight_decay > 0.0)
        *params[k].mat -= cfg.lr * (g + cfg.weight_decay * *params[k].mat);
      else
        *params[k].mat -= cfg.lr * g;
    }
    double val_loss = eval_loss(model, in, prep, va, rw);
    res.history.push_back({epoch, train_loss, val_loss});
    if (val_loss < best_val - 1e-12) {
      best_val = val_loss;
      res.best_epoch = epoch;
      for (size_t k = 0; k < params.size(); ++k) best[k] = *params[k].mat;
      wait = 0;
    } else if (++wait >= cfg.patience) {
      break;
    }
  }
  for (size_t k = 0; k < params.size(); ++k) *params[k].mat = best[k];
  res.best_val = best_val;
  model.z = in.z;
  return res;
}

GradientDump model_gradients(const DgaModel& model, const DgaInput& in) {
  model.config.validate();
  in.validate();
  check_dims(model, in);
  Prep prep = prepare(in, model.config);
  std::vector<int> rows = loss_rows(in, in.train_rows);
  ad::Tape t;
  TapeParams P = register_leaves(t, model, true);
  BuildOut b = build_forward(t, P, model, in, prep, false, nullptr);
  ad::Var loss = t.ce_loss_masked(b.cls, in.labels, rows);
  t.backward(loss);

  GradientDump d;
  d.loss = t.val(loss)(0, 0);
  DgaModel& mm = const_cast<DgaModel&>(model);  // names/pointers only
  std::vector<ParamEntry> params = collect_params(mm);
  for (size_t k = 0; k < params.size(); ++k) {
    d.names.push_back(params[k].name);
    d.grads.push_back(t.grad(P.ordered[k]));
  }
  return d;
}

double grad_check(const DgaModel& model, const DgaInput& toy, double epsilon) {
  model.config.validate();
  toy.validate();
  check_dims(model, toy);
  DgaModel m = model;
  Prep prep = prepare(toy, m.config);
  std::vector<int> rows = loss_rows(toy, toy.train_rows);
  std::vector<double> rw = class_weights(toy, rows);

  std::vector<Eigen::MatrixXd> analytic;
  {
    ad::Tape t;
    TapeParams P = register_leaves(t, m, true);
    BuildOut b = build_forward(t, P, m, toy, prep, false, nullptr);
    ad::Var loss = t.ce_loss_masked(b.cls, toy.labels, rows, rw);
    t.backward(loss);
    for (ad::Var v : P.ordered) analytic.push_back(t.grad(v));
  }

  std::vector<ParamEntry> params = collect_params(m);
  double worst = 0.0;
  for (size_t k = 0; k < params.size(); ++k) {
    Eigen::MatrixXd& mat = *params[k].mat;
    for (int i = 0; i < mat.rows(); ++i) {
      for (int j = 0; j < mat.cols(); ++j) {
        double keep = mat(i, j);
        mat(i, j) = keep + epsilon;
        double up = eval_loss(m, toy, prep, rows, rw);
        mat(i, j) = keep - epsilon;
        double dn = eval_loss(m, toy, prep, rows, rw);
        mat(i, j) = keep;
        double numeric = (up - dn) / (2.0 * epsilon);
        double a = analytic[k](i, j);
        double rel = std::abs(a - numeric) /
                     std::max({std::abs(a), std::abs(numeric), 1e-3});
        worst = std::max(worst, rel);
      }
    }
  }
  return worst;
}

Eigen::VectorXd time_encode(double t, double t_min, double t_max,
                            const Eigen::RowVectorXd& omega,
                            const Eigen::RowVectorXd& phi) {
  if (omega.size() != phi.size())
    throw InputError("time_encode: omega and phi sizes differ");
  double span = t_max - t_min;
  double t01 = span > 0.0 ? clip01((t - t_min) / span) : 0.0;
  return ((omega.array() * t01 + phi.array()).sin()).transpose();
}

double attention_logit(const AttnHeadParams& p, const Eigen::VectorXd& h_v,
                       const Eigen::VectorXd& h_u, const Eigen::VectorXd& et_v,
                       const Eigen::VectorXd& et_u, double s_u,
                       const Eigen::VectorXd& z_v, const Eigen::VectorXd& z_u,
                       double gamma, double lambda, double slope) {
  double pre = (h_v.transpose() * p.Wq).dot(p.aq) +
               (h_u.transpose() * p.Wk).dot(p.ak) +
               ((et_v - et_u).transpose() * p.Wt).dot(p.at) + gamma * s_u +
               lambda * z_v.dot(z_u);
  return pre > 0.0 ? pre : slope * pre;
}

Eigen::VectorXd attention_weights(const Eigen::VectorXd& logits) {
  if (logits.size() == 0) throw InputError("attention_weights: no neighbors");
  Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

Eigen::MatrixXd global_embed(int n,
                             const std::vector<std::pair<int, int>>& edges,
                             const EmbedConfig& cfg) {
  if (n <= 0) return Eigen::MatrixXd(0, cfg.dim);
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw InputError("global_embed: edge endpoint out of range");
    if (a == b) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& nb : adj) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }

  Rng rng(cfg.seed);
  Eigen::MatrixXd syn0(n, cfg.dim);
  for (int v = 0; v < n; ++v) {
    for (int j = 0; j < cfg.dim; ++j) syn0(v, j) = rng.next_normal();
    double nrm = syn0.row(v).norm();
    if (nrm > 0.0)
      syn0.row(v) /= nrm;
    else
      syn0(v, 0) = 1.0;
  }
  Eigen::MatrixXd syn1 = Eigen::MatrixXd::Zero(n, cfg.dim);

  std::vector<std::vector<int>> corpus;
  corpus.reserve(static_cast<size_t>(n) * cfg.walks_per_node);
  for (int r = 0; r < cfg.walks_per_node; ++r) {
    for (int v = 0; v < n; ++v) {
      std::vector<int> walk{v};
      int cur = v;
      for (int s = 1; s < cfg.walk_len; ++s) {
        if (adj[cur].empty()) break;
        cur = adj[cur][rng.next_below(adj[cur].size())];
        walk.push_back(cur);
      }
      corpus.push_back(std::move(walk));
    }
  }

  long long pairs = 0;
  for (const auto& walk : corpus) {
    int len = static_cast<int>(walk.size());
    for (int i = 0; i < len; ++i)
      pairs += std::min(i, cfg.window) + std::min(len - 1 - i, cfg.window);
  }
  long long total_updates = pairs * cfg.epochs;
  if (total_updates == 0) return syn0;

  std::vector<double> cum(n, 0.0);
  double total_w = 0.0;
  for (int v = 0; v < n; ++v) {
    total_w += std::pow(double(adj[v].size()), 0.75);
    cum[v] = total_w;
  }

  long long processed = 0;
  for (int ep = 0; ep < cfg.epochs; ++ep) {
    for (const auto& walk : corpus) {
      int len = static_cast<int>(walk.size());
      for (int i = 0; i < len; ++i) {
        int lo = std::max(0, i - cfg.window);
        int hi = std::min(len - 1, i + cfg.window);
        for (int j = lo; j <= hi; ++j) {
          if (j == i) continue;
          int target = walk[i], ctx = walk[j];
          double alpha =
              cfg.lr *
              std::max(1e-4, 1.0 - double(processed) / double(total_updates));
          ++processed;
          Eigen::VectorXd neu = Eigen::VectorXd::Zero(cfg.dim);
          auto push = [&](int out_node, double label) {
            double f = syn0.row(target).dot(syn1.row(out_node));
            double s = 1.0 / (1.0 + std::exp(-f));
            double g = (label - s) * alpha;
            neu += g * syn1.row(out_node).transpose();
            syn1.row(out_node) += g * syn0.row(target);
          };
          push(ctx, 1.0);
          if (total_w > 0.0) {
            for (int k = 0; k < cfg.negatives; ++k) {
              double u = rng.next_double() * total_w;
              int neg = int(std::upper_bound(cum.begin(), cum.end(), u) -
                            cum.begin());
              if (neg >= n) neg = n - 1;
              if (neg == ctx) continue;
              push(neg, 0.0);
            }
          }
          syn0.row(target) += neu.transpose();
        }
      }
    }
  }
  return syn0;
}

}  // namespace frgd::dga

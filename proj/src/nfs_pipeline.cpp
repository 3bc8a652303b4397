#include "frgd/nfs_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "frgd/util.hpp"

namespace frgd::nfs {

Eigen::MatrixXd assemble_features(std::span<const metrics::NodeStructureProfile> profiles,
                                  DvSource dv) {
  Eigen::MatrixXd f(profiles.size(), 2);
  for (size_t i = 0; i < profiles.size(); ++i) {
    const auto& p = profiles[i];
    if (p.node < 0) throw InputError("incomplete profile at row " + std::to_string(i));
    f(long(i), 0) = dv == DvSource::diversity ? p.diversity : p.degree_centrality;
    f(long(i), 1) = p.self_similarity;
  }
  return f;
}

Eigen::VectorXd NfsModel::project(const Eigen::Vector2d& f) const {
  Eigen::Vector2d z = (f - feature_means).cwiseQuotient(feature_stds);
  return pca_basis.leftCols(pca_kept).transpose() * z;
}

namespace {

// Stratified split: val_fraction of each class, seed-controlled.
void stratified_split(std::span<const int> labels, double val_fraction,
                      std::uint64_t seed, std::vector<int>& train,
                      std::vector<int>& val) {
  std::vector<int> pos, neg;
  for (int i = 0; i < int(labels.size()); ++i)
    (labels[i] ? pos : neg).push_back(i);
  Rng rng(seed);
  for (auto* cls : {&neg, &pos}) {
    auto perm = rng.permutation(int(cls->size()));
    int n_val = int(std::floor(val_fraction * double(cls->size())));
    for (int k = 0; k < int(cls->size()); ++k) {
      int idx = (*cls)[perm[k]];
      (k < n_val ? val : train).push_back(idx);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
}

}  // namespace

YoudenResult youden_threshold(std::span<const double> scores,
                              std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw InputError("youden: scores/labels size mismatch");
  long p = 0, n = 0;
  for (int y : labels) (y ? p : n)++;
  if (p == 0 || n == 0) throw InputError("youden: both classes required");

  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<double> cands;
  cands.push_back(sorted.front() - 1.0);
  for (size_t i = 0; i + 1 < sorted.size(); ++i)
    cands.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  cands.push_back(sorted.back() + 1.0);

  YoudenResult best;
  best.j = -2.0;
  for (double t : cands) {
    long tp = 0, fp = 0;
    for (size_t i = 0; i < scores.size(); ++i)
      if (scores[i] >= t) (labels[i] ? tp : fp)++;
    double j = double(tp) / double(p) - double(fp) / double(n);
    if (j > best.j || (j == best.j && t > best.threshold)) {
      best.j = j;
      best.threshold = t;
    }
  }
  return best;
}

NfsModel fit(const Eigen::MatrixXd& features, std::span<const int> labels,
             const NfsConfig& cfg) {
  if (features.rows() != long(labels.size()))
    throw InputError("fit: features/labels size mismatch");
  if (features.rows() < 10) throw InputError("fit: need at least 10 labeled rows");
  long pos = 0;
  for (int y : labels) pos += y ? 1 : 0;
  if (pos == 0 || pos == long(labels.size()))
    throw InputError("fit: both classes required");
  if (cfg.pca_kept < 1 || cfg.pca_kept > 2)
    throw InputError("fit: pca_kept must be 1 or 2");

  NfsModel m;
  m.config = cfg;
  m.pca_kept = cfg.pca_kept;
  stratified_split(labels, cfg.val_fraction, cfg.seed, m.train_rows, m.val_rows);
  if (m.val_rows.empty()) throw InputError("fit: validation split empty");

  Eigen::MatrixXd xtr(m.train_rows.size(), 2);
  for (size_t i = 0; i < m.train_rows.size(); ++i)
    xtr.row(long(i)) = features.row(m.train_rows[i]);

  for (int c = 0; c < 2; ++c) {
    m.feature_means[c] = xtr.col(c).mean();
    double sd = std::sqrt((xtr.col(c).array() - m.feature_means[c]).square().mean());
    if (sd < 1e-12) {
      std::cerr << "warning: zero-variance feature column " << c
                << ", std clamped\n";
      sd = 1e-12;
    }
    m.feature_stds[c] = sd;
  }
  Eigen::MatrixXd xstd = (xtr.rowwise() - m.feature_means.transpose()).array().rowwise() /
                         m.feature_stds.transpose().array();

  // PCA via the 2x2 covariance eigendecomposition, components by eigenvalue
  // descending, sign fixed so the largest-magnitude entry is positive
  Eigen::Matrix2d cov = (xstd.transpose() * xstd) / double(xstd.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  Eigen::Matrix2d basis;
  basis.col(0) = es.eigenvectors().col(1);  // Eigen sorts ascending
  basis.col(1) = es.eigenvectors().col(0);
  for (int c = 0; c < 2; ++c) {
    int arg = std::abs(basis(0, c)) >= std::abs(basis(1, c)) ? 0 : 1;
    if (basis(arg, c) < 0.0) basis.col(c) = -basis.col(c);
  }
  m.pca_basis = basis;

  Eigen::MatrixXd z = xstd * basis.leftCols(cfg.pca_kept);

  // Linear SVM, full-batch subgradient on hinge + L2. Hinge terms are
  // class-weighted (n / 2n_c) so a rare positive class is not absorbed into
  // the bias; with balanced classes the weights are 1.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(cfg.pca_kept);
  double b = 0.0;
  Eigen::VectorXd y(z.rows());
  for (size_t i = 0; i < m.train_rows.size(); ++i)
    y[long(i)] = labels[m.train_rows[i]] ? 1.0 : -1.0;
  double n_pos = 0.0;
  for (long i = 0; i < y.size(); ++i)
    if (y[i] > 0.0) n_pos += 1.0;
  double n_all = double(y.size());
  double cw_pos = n_all / (2.0 * n_pos);
  double cw_neg = n_all / (2.0 * (n_all - n_pos));

  m.train_loss_history.reserve(cfg.svm_epochs);
  for (int epoch = 0; epoch < cfg.svm_epochs; ++epoch) {
    Eigen::VectorXd margins = y.array() * (z * w).array() + y.array() * b;
    double hinge = 0.0;
    Eigen::VectorXd gw = w;
    double gb = 0.0;
    for (long i = 0; i < z.rows(); ++i) {
      double mval = margins[i];
      double cw = y[i] > 0.0 ? cw_pos : cw_neg;
      if (mval < 1.0) {
        hinge += cw * (1.0 - mval);
        gw -= (cfg.svm_c * cw / n_all) * y[i] * z.row(i).transpose();
        gb -= (cfg.svm_c * cw / n_all) * y[i];
      }
    }
    m.train_loss_history.push_back(0.5 * w.squaredNorm() +
                                   cfg.svm_c * hinge / n_all);
    w -= cfg.svm_lr * gw;
    if (cfg.svm_bias) b -= cfg.svm_lr * gb;
  }
  m.svm_weights = w;
  m.svm_bias = cfg.svm_bias ? b : 0.0;

  Eigen::VectorXd train_scores = z * w;
  train_scores.array() += m.svm_bias;
  m.score_min = train_scores.minCoeff();
  m.score_max = train_scores.maxCoeff();
  if (m.score_max - m.score_min < 1e-12) m.score_max = m.score_min + 1e-12;

  // t* from the held-out split, scored through the frozen pipeline
  std::vector<double> val_scores;
  std::vector<int> val_labels;
  double range = m.score_max - m.score_min;
  for (int r : m.val_rows) {
    Eigen::VectorXd zv = m.project(features.row(r).transpose());
    double raw = m.svm_weights.dot(zv) + m.svm_bias;
    val_scores.push_back(clip01((raw - m.score_min) / range));
    val_labels.push_back(labels[r]);
  }
  auto yr = youden_threshold(val_scores, val_labels);
  m.threshold = clip01(yr.threshold);
  m.val_j = yr.j;
  return m;
}

NfsScores score(const NfsModel& model, const Eigen::MatrixXd& features) {
  NfsScores out;
  long n = features.rows();
  out.raw.resize(n);
  out.normalized.resize(n);
  out.suspicious.resize(n);
  double range = model.score_max - model.score_min;
  for (long i = 0; i < n; ++i) {
    Eigen::VectorXd z = model.project(features.row(i).transpose());
    double raw = model.svm_weights.dot(z) + model.svm_bias;
    out.raw[i] = raw;
    out.normalized[i] = clip01((raw - model.score_min) / range);
    out.suspicious[i] = out.normalized[i] >= model.threshold ? 1 : 0;
  }
  return out;
}

}  // namespace frgd::nfs

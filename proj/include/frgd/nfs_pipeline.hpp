#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "frgd/structure_metrics.hpp"

namespace frgd::nfs {

enum class DvSource { diversity, degree_centrality };

struct NfsConfig {
  DvSource dv = DvSource::diversity;
  int pca_kept = 2;
  bool svm_bias = true;
  double svm_c = 1.0;
  int svm_epochs = 500;
  double svm_lr = 0.01;
  double val_fraction = 0.2;
  std::uint64_t seed = 72;
};

struct NfsModel {
  NfsConfig config;
  Eigen::Vector2d feature_means = Eigen::Vector2d::Zero();
  Eigen::Vector2d feature_stds = Eigen::Vector2d::Ones();
  Eigen::Matrix2d pca_basis = Eigen::Matrix2d::Identity();  // columns, by eigenvalue desc
  int pca_kept = 2;
  Eigen::VectorXd svm_weights;
  double svm_bias = 0.0;
  double score_min = 0.0;
  double score_max = 1.0;
  double threshold = 0.5;  // t*
  double val_j = 0.0;      // Youden J achieved on the validation split

  std::vector<int> train_rows, val_rows;      // split used at fit time
  std::vector<double> train_loss_history;     // SVM objective per epoch

  Eigen::VectorXd project(const Eigen::Vector2d& f) const;  // standardize + PCA
};

// f_v = [D_v, S_v]; D_v is the diversity score by default (config switch).
Eigen::MatrixXd assemble_features(std::span<const metrics::NodeStructureProfile> profiles,
                                  DvSource dv = DvSource::diversity);

// Rows of `features` restricted to labeled nodes; labels in {0,1}.
NfsModel fit(const Eigen::MatrixXd& features, std::span<const int> labels,
             const NfsConfig& cfg = {});

struct NfsScores {
  Eigen::VectorXd raw;         // S_nfs
  Eigen::VectorXd normalized;  // S_norm in [0,1]
  std::vector<char> suspicious;
};

NfsScores score(const NfsModel& model, const Eigen::MatrixXd& features);

struct YoudenResult {
  double threshold = 0.0;
  double j = 0.0;  // max TPR - FPR
};

// Candidates are midpoints of consecutive distinct sorted scores plus finite
// sentinels below/above; classification is positive iff score >= t; ties on J
// break toward the larger threshold.
YoudenResult youden_threshold(std::span<const double> scores,
                              std::span<const int> labels);

}  // namespace frgd::nfs

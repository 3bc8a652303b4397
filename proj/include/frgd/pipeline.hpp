#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "frgd/dga_net.hpp"
#include "frgd/eval_metrics.hpp"
#include "frgd/nfs_pipeline.hpp"
#include "frgd/pool_sample.hpp"
#include "frgd/structure_metrics.hpp"
#include "frgd/temporal_graph.hpp"

namespace frgd::pipeline {

struct PipelineConfig {
  int n_windows = 10;
  double tau_abs = 0.0;  // > 0: fixed window duration in seconds
  int max_sample = 1000;
  double test_fraction = 0.2;
  double min_spam = 0.6;
  // Per-window cluster budget is ceil(sampled / cluster_divisor). Smaller
  // divisor -> finer supernodes -> more labeled training rows downstream.
  int cluster_divisor = 4;
  std::uint64_t seed = 72;

  pool::ImportanceWeights pool_weights;
  metrics::ProfileOptions profile;
  nfs::NfsConfig nfs;
  dga::DgaConfig dga;
  dga::EmbedConfig embed;

  void validate() const;
};

// Input dataset: graph plus optional per-reviewer labels (-1 = unlabeled;
// empty vector = fully unlabeled scoring mode).
struct LabeledGraph {
  graph::TemporalBipartiteGraph g;
  std::vector<int> labels;
};

struct WindowStats {
  int window = -1;
  int active_nodes = 0;
  int sampled_nodes = 0;
  int supernodes = 0;
  long window_edges = 0;   // distinct reviewer-product pairs in the window
  long induced_edges = 0;  // pairs surviving sampling and the delta filter
};

// Everything up to (but not including) network training. Deterministic for a
// fixed config and dataset.
struct Prepared {
  std::vector<metrics::NodeStructureProfile> profiles;
  Eigen::MatrixXd nfs_features;  // per unified node
  nfs::NfsModel nfs_model;
  nfs::NfsScores scores;  // per unified node
  graph::TimeWindowing windows;
  pool::PooledGraph pooled;
  std::vector<WindowStats> window_stats;
  dga::DgaInput input;  // over supernodes

  std::vector<std::vector<int>> reviewer_supernodes;  // per reviewer
  std::vector<int> train_reviewers, test_reviewers;
};

// When a fitted NFS model is supplied it is reused instead of refit, which
// also allows running without labels.
Prepared prepare(LabeledGraph& lg, const PipelineConfig& cfg,
                 const nfs::NfsModel* pretrained_nfs = nullptr);

struct TrainedVariant {
  dga::Ablation ablation = dga::Ablation::full;
  dga::DgaModel model;
  dga::TrainResult history;
};

TrainedVariant train_variant(const Prepared& prep, const PipelineConfig& cfg,
                             dga::Ablation ablation);

// Per-reviewer fake probability: mean over supernodes containing the
// reviewer, 0.5 for reviewers absent from the pooled graph.
std::vector<double> reviewer_scores(const dga::DgaModel& model,
                                    const Prepared& prep);

// Scale-bucket membership per reviewer ("small"/"medium"/"large" by the
// review count of each product they touched; a reviewer can sit in several).
std::vector<std::vector<std::string>> reviewer_scales(
    const graph::TemporalBipartiteGraph& g);

struct VariantEval {
  std::string variant;
  std::vector<metrics::ReportRow> rows;  // "all" first, then any scale rows
  std::vector<double> test_scores;       // aligned with test_reviewers
  dga::TrainResult history;
};

struct AblationReport {
  std::vector<VariantEval> variants;
  std::vector<int> test_reviewers;
  std::vector<int> test_labels;

  std::string csv() const;
  std::string table() const;
};

// Trains and evaluates the requested variants under one shared prepare()
// pass, so splits, pooling and the embedding are identical across variants.
AblationReport run_ablation(LabeledGraph& lg, const PipelineConfig& cfg,
                            const std::vector<dga::Ablation>& variants,
                            bool by_scale = false);

}  // namespace frgd::pipeline

#pragma once

// Dynamic graph attention network over the pooled window graph.  Attention
// logits combine query/key projections, a temporal term on trainable sine
// time encodings, a suspicion-score bias (gamma) and a global-embedding
// affinity (lambda).  Gradients come from the tape in autodiff.hpp and are
// verified against finite differences by grad_check.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "frgd/util.hpp"

namespace frgd::dga {

enum class Ablation {
  full,
  no_nfs,         // A: drop suspicion scores (feature column and gamma bias)
  no_temporal,    // B: drop time encodings and the temporal logit term
  type_agnostic,  // C: zero the node-type indicator columns
  nfs_only,       // D: affine head on the suspicion score, no attention layers
  no_attention,   // uniform neighbor weights, everything else intact
};

Ablation ablation_from_string(const std::string& s);
std::string to_string(Ablation a);

struct DgaConfig {
  int layers = 2;
  int hidden = 8;    // per-head dim; heads are concatenated then mixed back
  int heads = 4;
  int time_dim = 8;
  int embed_dim = 16;
  double lr = 0.005;
  double weight_decay = 5e-4;
  double dropout = 0.3;  // on attention weights, training only
  int patience = 200;
  int max_epochs = 1000;
  std::uint64_t seed = 72;
  double leaky_slope = 0.2;
  double gamma = 0.5;
  double lambda = 0.2;
  Ablation ablation = Ablation::full;
  // Use the raw scaled timestamp in place of the sine encoding (the temporal
  // difference then acts on scalars rather than encoded vectors).
  bool raw_time_diff = false;

  void validate() const;
};

// One graph ready for the network: rows are supernodes (or plain nodes in
// tests).  static_feats columns 0 and 1 are the reviewer/product type
// indicators; time01 is the node time already scaled to [0, 1].
struct DgaInput {
  Eigen::MatrixXd static_feats;
  Eigen::VectorXd s_norm;
  Eigen::VectorXd time01;
  std::vector<std::pair<int, int>> edges;  // undirected, no self pairs
  Eigen::MatrixXd z;                       // n x embed_dim
  std::vector<int> labels;                 // -1 unlabeled, else 0/1
  std::vector<int> train_rows, val_rows;

  int n() const { return static_cast<int>(static_feats.rows()); }
  void validate() const;
};

struct LayerParams {
  // One entry per head; projections are (d_in x hidden), attention vector
  // thirds are (hidden x 1), the temporal projection is (time_dim x hidden).
  std::vector<Eigen::MatrixXd> Wq, Wk, Wt, Wv, aq, ak, at;
  Eigen::MatrixXd Wmix;  // (heads*hidden) x hidden
  Eigen::MatrixXd bmix;  // 1 x hidden
};

struct DgaModel {
  DgaConfig config;
  int static_dim = 0;
  Eigen::MatrixXd omega, phi;  // 1 x time_dim, trainable sine parameters
  std::vector<LayerParams> layers;
  Eigen::MatrixXd Wc, bc;  // classifier hidden x 2, 1 x 2
  Eigen::MatrixXd Wd, bd;  // nfs_only head 1 x 2, 1 x 2
  Eigen::MatrixXd z;       // global embeddings kept for checkpointing
};

DgaModel init_model(const DgaConfig& cfg, int static_dim);

struct ForwardResult {
  Eigen::MatrixXd probs;   // n x 2, rows sum to 1
  Eigen::MatrixXd logits;  // n x 2 pre-softmax
  Eigen::MatrixXd h_final; // representation fed to the classifier
  // Diagnostics: directed edge list (self loops included) sorted by target,
  // per-target [begin, end) ranges, and per layer/head attention.
  std::vector<std::pair<int, int>> edge_src_dst;
  std::vector<std::pair<int, int>> segments;
  std::vector<std::vector<Eigen::VectorXd>> alphas;      // [layer][head]
  std::vector<std::vector<Eigen::VectorXd>> att_logits;  // pre-softmax
};

ForwardResult forward(const DgaModel& model, const DgaInput& in);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0, val_loss = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = -1;
  double best_val = 0.0;
};

// Full-batch gradient descent with weight decay and early stopping on the
// validation loss (train loss when no validation rows are given); restores
// the best parameters.  Throws InvariantError if the loss diverges.
TrainResult train(DgaModel& model, const DgaInput& in);

// Max relative error between tape gradients and central finite differences
// over every parameter tensor, dropout off.
double grad_check(const DgaModel& model, const DgaInput& toy,
                  double epsilon = 1e-5);

struct GradientDump {
  std::vector<std::string> names;
  std::vector<Eigen::MatrixXd> grads;
  double loss = 0.0;
};

// Analytic gradients of the training loss at the current parameters.
GradientDump model_gradients(const DgaModel& model, const DgaInput& in);

// --- plain (non-tape) pieces, used directly and by unit tests ---

// sin(omega_i * t01 + phi_i); t is rescaled over [t_min, t_max] and clipped.
Eigen::VectorXd time_encode(double t, double t_min, double t_max,
                            const Eigen::RowVectorXd& omega,
                            const Eigen::RowVectorXd& phi);

struct AttnHeadParams {
  Eigen::MatrixXd Wq, Wk, Wt;  // (d x h), (d x h), (time_dim x h)
  Eigen::VectorXd aq, ak, at;  // (h)
};

double attention_logit(const AttnHeadParams& p, const Eigen::VectorXd& h_v,
                       const Eigen::VectorXd& h_u, const Eigen::VectorXd& et_v,
                       const Eigen::VectorXd& et_u, double s_u,
                       const Eigen::VectorXd& z_v, const Eigen::VectorXd& z_u,
                       double gamma, double lambda, double slope);

// Stable softmax; empty input throws.
Eigen::VectorXd attention_weights(const Eigen::VectorXd& logits);

// --- DeepWalk-style global embeddings over the pooled graph ---

struct EmbedConfig {
  int walk_len = 10;
  int walks_per_node = 5;
  int window = 2;
  int negatives = 5;
  int dim = 16;
  int epochs = 5;
  double lr = 0.025;  // linear decay over all pair updates
  std::uint64_t seed = 72;
};

// Uniform random walks + skip-gram with negative sampling.  Isolated nodes
// keep their unit-norm random initialization.  Deterministic under seed.
Eigen::MatrixXd global_embed(int n, const std::vector<std::pair<int, int>>& edges,
                             const EmbedConfig& cfg);

}  // namespace frgd::dga

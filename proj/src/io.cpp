#include "frgd/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "frgd/util.hpp"

namespace frgd::io {

namespace {

// Fixed-width float formatting keeps the CSVs deterministic without the
// 17-digit round-trip noise; %.9g is plenty for scores and losses.
std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw InputError("config: unknown key \"" + it.key() + "\" in " + where);
}

template <typename T>
void take(const json& obj, const char* key, T& into) {
  if (obj.contains(key)) into = obj.at(key).get<T>();
}

std::string dv_name(nfs::DvSource s) {
  return s == nfs::DvSource::diversity ? "diversity" : "degree_centrality";
}

nfs::DvSource dv_from(const std::string& s) {
  if (s == "diversity") return nfs::DvSource::diversity;
  if (s == "degree_centrality") return nfs::DvSource::degree_centrality;
  throw InputError("config: unknown dv source \"" + s + "\"");
}

void expect_kind(const json& j, const char* kind) {
  if (!j.is_object() || j.value("kind", std::string()) != kind)
    throw InputError(std::string("artifact: expected kind \"") + kind + "\"");
}

}  // namespace

json matrix_json(const Eigen::MatrixXd& m) {
  json v = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
  return json{{"r", m.rows()}, {"c", m.cols()}, {"v", std::move(v)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  Eigen::Index r = j.at("r").get<Eigen::Index>();
  Eigen::Index c = j.at("c").get<Eigen::Index>();
  const json& v = j.at("v");
  if (r < 0 || c < 0 || Eigen::Index(v.size()) != r * c)
    throw InputError("artifact: matrix shape does not match its values");
  Eigen::MatrixXd m(r, c);
  size_t k = 0;
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index jj = 0; jj < c; ++jj) m(i, jj) = v[k++].get<double>();
  return m;
}

json to_json(const RunConfig& rc) {
  const auto& p = rc.pipe;
  const auto& s = rc.synth;
  json j;
  j["seed"] = p.seed;
  j["windows"] = p.n_windows;
  j["tau_abs"] = p.tau_abs;
  j["max_sample"] = p.max_sample;
  j["test_fraction"] = p.test_fraction;
  j["min_spam"] = p.min_spam;
  j["cluster_divisor"] = p.cluster_divisor;
  j["profile"] = {{"hops", p.profile.hops},
                  {"alpha", p.profile.alpha},
                  {"damping", p.profile.damping},
                  {"levels", p.profile.levels},
                  {"node_cap", p.profile.node_cap},
                  {"parallel", p.profile.parallel}};
  j["pool"] = {{"alpha1", p.pool_weights.alpha1},
               {"alpha2", p.pool_weights.alpha2},
               {"alpha3", p.pool_weights.alpha3},
               {"beta1", p.pool_weights.beta1},
               {"beta2", p.pool_weights.beta2},
               {"theta", p.pool_weights.theta},
               {"delta", p.pool_weights.delta}};
  j["nfs"] = {{"dv", dv_name(p.nfs.dv)},
              {"pca_kept", p.nfs.pca_kept},
              {"svm_bias", p.nfs.svm_bias},
              {"svm_c", p.nfs.svm_c},
              {"svm_epochs", p.nfs.svm_epochs},
              {"svm_lr", p.nfs.svm_lr},
              {"val_fraction", p.nfs.val_fraction}};
  j["dga"] = {{"layers", p.dga.layers},
              {"hidden", p.dga.hidden},
              {"heads", p.dga.heads},
              {"time_dim", p.dga.time_dim},
              {"embed_dim", p.dga.embed_dim},
              {"lr", p.dga.lr},
              {"weight_decay", p.dga.weight_decay},
              {"dropout", p.dga.dropout},
              {"patience", p.dga.patience},
              {"max_epochs", p.dga.max_epochs},
              {"leaky_slope", p.dga.leaky_slope},
              {"gamma", p.dga.gamma},
              {"lambda", p.dga.lambda},
              {"ablation", dga::to_string(p.dga.ablation)},
              {"raw_time_diff", p.dga.raw_time_diff}};
  j["embed"] = {{"walk_len", p.embed.walk_len},
                {"walks_per_node", p.embed.walks_per_node},
                {"window", p.embed.window},
                {"negatives", p.embed.negatives},
                {"dim", p.embed.dim},
                {"epochs", p.embed.epochs},
                {"lr", p.embed.lr}};
  j["synth"] = {{"n_reviewers", s.n_reviewers},
                {"n_products", s.n_products},
                {"days", s.days},
                {"organic_rate", s.organic_rate},
                {"n_groups", s.n_groups},
                {"group_size", s.group_size},
                {"targets_per_group", s.targets_per_group},
                {"burst_window", s.burst_window},
                {"mode", synth::to_string(s.mode)},
                {"camouflage_rate", s.camouflage_rate}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw InputError("config: document must be an object");
  check_keys(j, {"seed", "windows", "tau_abs", "max_sample", "test_fraction",
                 "min_spam", "cluster_divisor", "profile", "pool", "nfs",
                 "dga", "embed", "synth"},
             "the top level");
  RunConfig rc;
  auto& p = rc.pipe;
  take(j, "seed", p.seed);
  take(j, "windows", p.n_windows);
  take(j, "tau_abs", p.tau_abs);
  take(j, "max_sample", p.max_sample);
  take(j, "test_fraction", p.test_fraction);
  take(j, "min_spam", p.min_spam);
  take(j, "cluster_divisor", p.cluster_divisor);

  if (j.contains("profile")) {
    const json& o = j.at("profile");
    check_keys(o, {"hops", "alpha", "damping", "levels", "node_cap", "parallel"},
               "\"profile\"");
    take(o, "hops", p.profile.hops);
    take(o, "alpha", p.profile.alpha);
    take(o, "damping", p.profile.damping);
    take(o, "levels", p.profile.levels);
    take(o, "node_cap", p.profile.node_cap);
    take(o, "parallel", p.profile.parallel);
  }
  if (j.contains("pool")) {
    const json& o = j.at("pool");
    check_keys(o, {"alpha1", "alpha2", "alpha3", "beta1", "beta2", "theta",
                   "delta"},
               "\"pool\"");
    take(o, "alpha1", p.pool_weights.alpha1);
    take(o, "alpha2", p.pool_weights.alpha2);
    take(o, "alpha3", p.pool_weights.alpha3);
    take(o, "beta1", p.pool_weights.beta1);
    take(o, "beta2", p.pool_weights.beta2);
    take(o, "theta", p.pool_weights.theta);
    take(o, "delta", p.pool_weights.delta);
  }
  if (j.contains("nfs")) {
    const json& o = j.at("nfs");
    check_keys(o, {"dv", "pca_kept", "svm_bias", "svm_c", "svm_epochs",
                   "svm_lr", "val_fraction"},
               "\"nfs\"");
    if (o.contains("dv")) p.nfs.dv = dv_from(o.at("dv").get<std::string>());
    take(o, "pca_kept", p.nfs.pca_kept);
    take(o, "svm_bias", p.nfs.svm_bias);
    take(o, "svm_c", p.nfs.svm_c);
    take(o, "svm_epochs", p.nfs.svm_epochs);
    take(o, "svm_lr", p.nfs.svm_lr);
    take(o, "val_fraction", p.nfs.val_fraction);
  }
  if (j.contains("dga")) {
    const json& o = j.at("dga");
    check_keys(o, {"layers", "hidden", "heads", "time_dim", "embed_dim", "lr",
                   "weight_decay", "dropout", "patience", "max_epochs",
                   "leaky_slope", "gamma", "lambda", "ablation",
                   "raw_time_diff"},
               "\"dga\"");
    take(o, "layers", p.dga.layers);
    take(o, "hidden", p.dga.hidden);
    take(o, "heads", p.dga.heads);
    take(o, "time_dim", p.dga.time_dim);
    take(o, "embed_dim", p.dga.embed_dim);
    take(o, "lr", p.dga.lr);
    take(o, "weight_decay", p.dga.weight_decay);
    take(o, "dropout", p.dga.dropout);
    take(o, "patience", p.dga.patience);
    take(o, "max_epochs", p.dga.max_epochs);
    take(o, "leaky_slope", p.dga.leaky_slope);
    take(o, "gamma", p.dga.gamma);
    take(o, "lambda", p.dga.lambda);
    if (o.contains("ablation"))
      p.dga.ablation = dga::ablation_from_string(o.at("ablation").get<std::string>());
    take(o, "raw_time_diff", p.dga.raw_time_diff);
  }
  if (j.contains("embed")) {
    const json& o = j.at("embed");
    check_keys(o, {"walk_len", "walks_per_node", "window", "negatives", "dim",
                   "epochs", "lr"},
               "\"embed\"");
    take(o, "walk_len", p.embed.walk_len);
    take(o, "walks_per_node", p.embed.walks_per_node);
    take(o, "window", p.embed.window);
    take(o, "negatives", p.embed.negatives);
    take(o, "dim", p.embed.dim);
    take(o, "epochs", p.embed.epochs);
    take(o, "lr", p.embed.lr);
  }
  auto& s = rc.synth;
  if (j.contains("synth")) {
    const json& o = j.at("synth");
    check_keys(o, {"n_reviewers", "n_products", "days", "organic_rate",
                   "n_groups", "group_size", "targets_per_group",
                   "burst_window", "mode", "camouflage_rate"},
               "\"synth\"");
    take(o, "n_reviewers", s.n_reviewers);
    take(o, "n_products", s.n_products);
    take(o, "days", s.days);
    take(o, "organic_rate", s.organic_rate);
    take(o, "n_groups", s.n_groups);
    take(o, "group_size", s.group_size);
    take(o, "targets_per_group", s.targets_per_group);
    take(o, "burst_window", s.burst_window);
    if (o.contains("mode"))
      s.mode = synth::mode_from_string(o.at("mode").get<std::string>());
    take(o, "camouflage_rate", s.camouflage_rate);
  }

  // One master seed for every stage.
  p.nfs.seed = p.seed;
  p.dga.seed = p.seed;
  p.embed.seed = p.seed;
  s.seed = p.seed;

  p.validate();
  s.validate();
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(read_json(path));
}

json graph_to_json(const graph::TemporalBipartiteGraph& g,
                   const std::vector<int>& labels, const json& config_echo) {
  json j;
  j["kind"] = "frgd.graph";
  j["version"] = 1;
  j["config"] = config_echo;
  j["reviewers"] = g.reviewer_ids;
  j["products"] = g.product_ids;
  json ev = json::array();
  for (const auto& e : g.events)
    ev.push_back(json::array({e.reviewer, e.product, e.timestamp, e.rating,
                              e.content_len}));
  j["events"] = std::move(ev);
  if (!labels.empty()) j["labels"] = labels;
  return j;
}

GraphArtifact graph_from_json(const json& j) {
  expect_kind(j, "frgd.graph");
  GraphArtifact a;
  a.config = j.value("config", json::object());
  a.g.reviewer_ids = j.at("reviewers").get<std::vector<std::string>>();
  a.g.product_ids = j.at("products").get<std::vector<std::string>>();
  for (const json& e : j.at("events")) {
    if (!e.is_array() || e.size() != 5)
      throw InputError("artifact: malformed event record");
    graph::ReviewEvent ev;
    ev.reviewer = e[0].get<std::int32_t>();
    ev.product = e[1].get<std::int32_t>();
    ev.timestamp = e[2].get<std::int64_t>();
    ev.rating = e[3].get<double>();
    ev.content_len = e[4].get<std::int32_t>();
    if (ev.reviewer < 0 || ev.reviewer >= a.g.reviewer_count() ||
        ev.product < 0 || ev.product >= a.g.product_count())
      throw InputError("artifact: event references a missing node");
    a.g.events.push_back(ev);
  }
  if (j.contains("labels")) {
    a.labels = j.at("labels").get<std::vector<int>>();
    if (int(a.labels.size()) != a.g.reviewer_count())
      throw InputError("artifact: label vector must cover every reviewer");
  }
  a.g.finalize();
  return a;
}

json nfs_to_json(const nfs::NfsModel& m, const json& config_echo) {
  json j;
  j["kind"] = "frgd.nfs";
  j["version"] = 1;
  j["config"] = config_echo;
  j["dv"] = dv_name(m.config.dv);
  j["feature_means"] = {m.feature_means(0), m.feature_means(1)};
  j["feature_stds"] = {m.feature_stds(0), m.feature_stds(1)};
  j["pca_basis"] = matrix_json(m.pca_basis);
  j["pca_kept"] = m.pca_kept;
  j["svm_weights"] = matrix_json(m.svm_weights);
  j["svm_bias"] = m.svm_bias;
  j["score_min"] = m.score_min;
  j["score_max"] = m.score_max;
  j["threshold"] = m.threshold;
  j["val_j"] = m.val_j;
  return j;
}

nfs::NfsModel nfs_from_json(const json& j) {
  expect_kind(j, "frgd.nfs");
  nfs::NfsModel m;
  m.config.dv = dv_from(j.at("dv").get<std::string>());
  m.feature_means << j.at("feature_means")[0].get<double>(),
      j.at("feature_means")[1].get<double>();
  m.feature_stds << j.at("feature_stds")[0].get<double>(),
      j.at("feature_stds")[1].get<double>();
  m.pca_basis = matrix_from_json(j.at("pca_basis"));
  m.pca_kept = j.at("pca_kept").get<int>();
  m.svm_weights = matrix_from_json(j.at("svm_weights"));
  m.svm_bias = j.at("svm_bias").get<double>();
  m.score_min = j.at("score_min").get<double>();
  m.score_max = j.at("score_max").get<double>();
  m.threshold = j.at("threshold").get<double>();
  m.val_j = j.at("val_j").get<double>();
  return m;
}

namespace {

json layer_json(const dga::LayerParams& lp) {
  auto heads = [](const std::vector<Eigen::MatrixXd>& ms) {
    json a = json::array();
    for (const auto& m : ms) a.push_back(matrix_json(m));
    return a;
  };
  return json{{"Wq", heads(lp.Wq)}, {"Wk", heads(lp.Wk)}, {"Wt", heads(lp.Wt)},
              {"Wv", heads(lp.Wv)}, {"aq", heads(lp.aq)}, {"ak", heads(lp.ak)},
              {"at", heads(lp.at)}, {"Wmix", matrix_json(lp.Wmix)},
              {"bmix", matrix_json(lp.bmix)}};
}

dga::LayerParams layer_from_json(const json& j) {
  auto heads = [](const json& a) {
    std::vector<Eigen::MatrixXd> ms;
    for (const json& m : a) ms.push_back(matrix_from_json(m));
    return ms;
  };
  dga::LayerParams lp;
  lp.Wq = heads(j.at("Wq"));
  lp.Wk = heads(j.at("Wk"));
  lp.Wt = heads(j.at("Wt"));
  lp.Wv = heads(j.at("Wv"));
  lp.aq = heads(j.at("aq"));
  lp.ak = heads(j.at("ak"));
  lp.at = heads(j.at("at"));
  lp.Wmix = matrix_from_json(j.at("Wmix"));
  lp.bmix = matrix_from_json(j.at("bmix"));
  return lp;
}

}  // namespace

json dga_to_json(const dga::DgaModel& m, const json& config_echo) {
  json j;
  j["kind"] = "frgd.dga";
  j["version"] = 1;
  j["config"] = config_echo;
  j["ablation"] = dga::to_string(m.config.ablation);
  j["model_config"] = {{"layers", m.config.layers},
                       {"hidden", m.config.hidden},
                       {"heads", m.config.heads},
                       {"time_dim", m.config.time_dim},
                       {"embed_dim", m.config.embed_dim},
                       {"leaky_slope", m.config.leaky_slope},
                       {"gamma", m.config.gamma},
                       {"lambda", m.config.lambda},
                       {"raw_time_diff", m.config.raw_time_diff},
                       {"seed", m.config.seed}};
  j["static_dim"] = m.static_dim;
  j["omega"] = matrix_json(m.omega);
  j["phi"] = matrix_json(m.phi);
  json layers = json::array();
  for (const auto& lp : m.layers) layers.push_back(layer_json(lp));
  j["layers"] = std::move(layers);
  j["Wc"] = matrix_json(m.Wc);
  j["bc"] = matrix_json(m.bc);
  j["Wd"] = matrix_json(m.Wd);
  j["bd"] = matrix_json(m.bd);
  j["z"] = matrix_json(m.z);
  return j;
}

dga::DgaModel dga_from_json(const json& j) {
  expect_kind(j, "frgd.dga");
  dga::DgaModel m;
  m.config.ablation = dga::ablation_from_string(j.at("ablation").get<std::string>());
  const json& mc = j.at("model_config");
  m.config.layers = mc.at("layers").get<int>();
  m.config.hidden = mc.at("hidden").get<int>();
  m.config.heads = mc.at("heads").get<int>();
  m.config.time_dim = mc.at("time_dim").get<int>();
  m.config.embed_dim = mc.at("embed_dim").get<int>();
  m.config.leaky_slope = mc.at("leaky_slope").get<double>();
  m.config.gamma = mc.at("gamma").get<double>();
  m.config.lambda = mc.at("lambda").get<double>();
  m.config.raw_time_diff = mc.at("raw_time_diff").get<bool>();
  m.config.seed = mc.at("seed").get<std::uint64_t>();
  m.static_dim = j.at("static_dim").get<int>();
  m.omega = matrix_from_json(j.at("omega"));
  m.phi = matrix_from_json(j.at("phi"));
  for (const json& lp : j.at("layers")) m.layers.push_back(layer_from_json(lp));
  if (int(m.layers.size()) != m.config.layers)
    throw InputError("artifact: checkpoint layer count mismatch");
  m.Wc = matrix_from_json(j.at("Wc"));
  m.bc = matrix_from_json(j.at("bc"));
  m.Wd = matrix_from_json(j.at("Wd"));
  m.bd = matrix_from_json(j.at("bd"));
  m.z = matrix_from_json(j.at("z"));
  return m;
}

std::string with_echo(const std::string& csv, const json& config_echo) {
  return "# config: " + config_echo.dump() + "\n" + csv;
}

namespace {

const std::string& node_id(const graph::TemporalBipartiteGraph& g, int v) {
  return v < g.reviewer_count() ? g.reviewer_ids[v]
                                : g.product_ids[v - g.reviewer_count()];
}

}  // namespace

std::string scores_csv(const graph::TemporalBipartiteGraph& g,
                       const nfs::NfsScores& s, const json& config_echo) {
  if (s.raw.size() != g.node_count())
    throw InputError("scores: size does not match the graph");
  std::ostringstream out;
  out << "node_id,raw,norm,suspicious\n";
  for (int v = 0; v < g.node_count(); ++v)
    out << node_id(g, v) << ',' << num(s.raw(v)) << ',' << num(s.normalized(v))
        << ',' << int(s.suspicious[v]) << '\n';
  return with_echo(out.str(), config_echo);
}

std::string profiles_csv(const graph::TemporalBipartiteGraph& g,
                         const std::vector<metrics::NodeStructureProfile>& p,
                         const json& config_echo) {
  if (int(p.size()) != g.node_count())
    throw InputError("profiles: size does not match the graph");
  std::ostringstream out;
  out << "node_id,degree,degree_centrality,pagerank,diversity,"
         "self_similarity,geometric_score,spectral_score,consistency,"
         "clustering\n";
  for (int v = 0; v < g.node_count(); ++v) {
    const auto& r = p[v];
    out << node_id(g, v) << ',' << r.degree << ',' << num(r.degree_centrality)
        << ',' << num(r.pagerank) << ',' << num(r.diversity) << ','
        << num(r.self_similarity) << ',' << num(r.geometric_score) << ','
        << num(r.spectral_score) << ',' << num(r.consistency) << ','
        << num(r.clustering_coeff) << '\n';
  }
  return with_echo(out.str(), config_echo);
}

std::string reviewer_scores_csv(const graph::TemporalBipartiteGraph& g,
                                const std::vector<double>& p_fake,
                                const json& config_echo) {
  if (int(p_fake.size()) != g.reviewer_count())
    throw InputError("reviewer scores: size does not match the graph");
  std::ostringstream out;
  out << "reviewer_id,p_fake\n";
  for (int v = 0; v < g.reviewer_count(); ++v)
    out << g.reviewer_ids[v] << ',' << num(p_fake[v]) << '\n';
  return with_echo(out.str(), config_echo);
}

std::string history_csv(const dga::TrainResult& h, const json& config_echo) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss\n";
  for (const auto& e : h.history)
    out << e.epoch << ',' << num(e.train_loss) << ',' << num(e.val_loss)
        << '\n';
  return with_echo(out.str(), config_echo);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << contents;
  if (!out) throw InputError("short write to " + path);
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

}  // namespace frgd::io

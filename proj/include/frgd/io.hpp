#pragma once

// Artifact formats shared by the command-line tools: JSON for graphs and
// model checkpoints, CSV for tabular outputs.  Every writer embeds the run
// configuration under a "config" key (or a leading '#' comment line in CSVs)
// so downstream steps carry their provenance; loaders reject files of the
// wrong kind.  Serialization is deterministic, so identical inputs and seed
// give byte-identical artifacts.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "frgd/dga_net.hpp"
#include "frgd/nfs_pipeline.hpp"
#include "frgd/pipeline.hpp"
#include "frgd/structure_metrics.hpp"
#include "frgd/synth_bench.hpp"
#include "frgd/temporal_graph.hpp"

namespace frgd::io {

using json = nlohmann::ordered_json;

// Every tunable in one document.  The top-level seed fans out to the
// per-stage seeds (NFS split, embedding walks, network init, synthesis);
// sub-objects do not take their own.
struct RunConfig {
  pipeline::PipelineConfig pipe;
  synth::SynthConfig synth;
};

json to_json(const RunConfig& rc);
// Unknown keys anywhere in the document are rejected; simplex and range
// constraints are enforced before returning.
RunConfig run_config_from_json(const json& j);
RunConfig load_run_config(const std::string& path);

// {"r": rows, "c": cols, "v": [row-major]}
json matrix_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);

struct GraphArtifact {
  graph::TemporalBipartiteGraph g;
  std::vector<int> labels;  // per reviewer, -1 unlabeled; empty when absent
  json config;
};

json graph_to_json(const graph::TemporalBipartiteGraph& g,
                   const std::vector<int>& labels, const json& config_echo);
GraphArtifact graph_from_json(const json& j);

json nfs_to_json(const nfs::NfsModel& m, const json& config_echo);
nfs::NfsModel nfs_from_json(const json& j);

json dga_to_json(const dga::DgaModel& m, const json& config_echo);
dga::DgaModel dga_from_json(const json& j);

// Per unified node: id, raw score, normalized score, suspicious flag.
std::string scores_csv(const graph::TemporalBipartiteGraph& g,
                       const nfs::NfsScores& s, const json& config_echo);
// Per unified node: the structural profile columns.
std::string profiles_csv(const graph::TemporalBipartiteGraph& g,
                         const std::vector<metrics::NodeStructureProfile>& p,
                         const json& config_echo);
// Per reviewer: fake probability from the trained network.
std::string reviewer_scores_csv(const graph::TemporalBipartiteGraph& g,
                                const std::vector<double>& p_fake,
                                const json& config_echo);
std::string history_csv(const dga::TrainResult& h, const json& config_echo);
// '# config: ...' line ahead of an existing CSV body.
std::string with_echo(const std::string& csv, const json& config_echo);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);
json read_json(const std::string& path);
void write_json(const std::string& path, const json& j);

}  // namespace frgd::io

#pragma once

// Synthetic reviewer-product benchmark: organic background traffic from
// preferential attachment with exponential inter-arrival times, plus planted
// fraud groups (star bursts and collusive rings) with known labels.  Output
// is deterministic under the seed, down to the exported bytes.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "frgd/temporal_graph.hpp"

namespace frgd::synth {

enum class Mode { star_burst, ring, mixed };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

struct SynthConfig {
  int n_reviewers = 2000;
  int n_products = 200;
  double days = 90.0;          // horizon
  double organic_rate = 0.08;  // reviews per reviewer per day
  int n_groups = 5;
  int group_size = 10;
  int targets_per_group = 3;
  double burst_window = 86400.0;  // seconds
  Mode mode = Mode::star_burst;
  // Fake accounts also post organic-looking reviews at this fraction of the
  // organic rate so they are not isolated to their bursts.
  double camouflage_rate = 0.15;
  std::uint64_t seed = 72;

  void validate() const;
};

struct LabeledDataset {
  graph::TemporalBipartiteGraph graph;
  std::map<std::string, int> labels;               // reviewer -> 0 real, 1 fake
  std::map<std::string, int> group_ids;            // fake reviewer -> group
  std::map<std::string, std::string> scale_split;  // product -> small/medium/large
  std::vector<std::vector<std::string>> group_targets;  // per group, product ids
};

// Review-count thresholds 50 and 200.
std::string scale_of(long review_count);

LabeledDataset generate(const SynthConfig& cfg);

// Serializations; all orders follow the graph's canonical event/id order.
std::string to_jsonl(const LabeledDataset& d);
std::string labels_csv(const LabeledDataset& d);  // reviewer_id,label,group_id
std::string split_csv(const LabeledDataset& d);   // product_id,scale

}  // namespace frgd::synth

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "frgd/temporal_graph.hpp"
#include "frgd/util.hpp"

namespace frgd::metrics {

struct ConfusionCounts {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;

  long total() const { return tp + tn + fp + fn; }
};

// labels and predictions are 0/1 per evaluated node
ConfusionCounts confusion(const std::vector<int>& labels,
                          const std::vector<int>& preds);

double accuracy(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
double f1_macro(const ConfusionCounts& c);

// Rank-based AUROC with midrank tie handling.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// O(n^2) pairwise reference: wins + half ties over pos*neg pairs.
double auroc_bruteforce(const std::vector<double>& scores,
                        const std::vector<int>& labels);

struct DynamicsReport {
  // per window; entries that are undefined for a window hold NaN
  std::vector<double> r;  // arrival rate, events per day
  std::vector<double> c;  // reviewer churn vs previous window
  std::vector<double> u;  // edge turnover vs previous window
  std::vector<double> B;  // burstiness of within-window inter-arrivals

  double r_bar = 0.0, c_bar = 0.0, u_bar = 0.0, B_bar = 0.0;

  // min-max across compared datasets; 0.5 when no scale is available
  double r_norm = 0.5, c_norm = 0.5, u_norm = 0.5, B_norm = 0.5;
  bool normalized_degenerate = true;
  double D = 0.5;
};

DynamicsReport dynamics(const graph::TemporalBipartiteGraph& g,
                        const graph::TimeWindowing& w);

// Min-max normalizes the component averages across the given reports and
// recomputes each D. A component with zero span stays at 0.5.
void normalize_reports(std::vector<DynamicsReport>& reports);

double composite_index(const std::array<double, 4>& normalized);

struct Group {
  std::vector<int> members;  // reviewer indices, ascending
  double mean_score = 0.0;
  bool flagged = false;
};

// Connected components (size >= 2) of the co-review projection restricted to
// suspicious reviewers; a group is flagged when its mean score clears
// min_spam. Output is sorted by smallest member index.
std::vector<Group> extract_groups(const graph::TemporalBipartiteGraph& g,
                                  const std::vector<std::uint8_t>& suspicious,
                                  const std::vector<double>& scores,
                                  double min_spam = 0.6);

struct ReportRow {
  std::string variant;
  std::string split;  // "all", "small", "medium", "large"
  double accuracy = 0.0;
  double recall = 0.0;
  double f1_macro = 0.0;
  double auroc = 0.0;
};

std::string report_csv(const std::vector<ReportRow>& rows);
std::string report_table(const std::vector<ReportRow>& rows);

}  // namespace frgd::metrics

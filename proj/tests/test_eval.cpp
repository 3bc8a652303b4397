#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "frgd/eval_metrics.hpp"
#include "frgd/util.hpp"

using namespace frgd;
using namespace frgd::metrics;

namespace {

std::string jl(const std::string& r, const std::string& p, long t) {
  return "{\"reviewer_id\":\"" + r + "\",\"product_id\":\"" + p +
         "\",\"timestamp\":" + std::to_string(t) + ",\"rating\":4}\n";
}

graph::TemporalBipartiteGraph from_lines(const std::string& text) {
  return graph::ingest_text(text, {}).graph;
}

}  // namespace

TEST_CASE("confusion counting and accuracy") {
  ConfusionCounts c = confusion({1, 1, 1, 0, 0, 0, 0, 0, 1, 1},
                                {1, 1, 1, 0, 0, 0, 0, 1, 0, 0});
  CHECK(c.tp == 3);
  CHECK(c.tn == 4);
  CHECK(c.fp == 1);
  CHECK(c.fn == 2);
  CHECK(accuracy(c) == doctest::Approx(0.7));

  CHECK(accuracy({5, 5, 0, 0}) == doctest::Approx(1.0));
  CHECK(accuracy({0, 0, 4, 6}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(accuracy(ConfusionCounts{}), InputError);
  CHECK_THROWS_AS(confusion({1}, {1, 0}), InputError);
  CHECK_THROWS_AS(confusion({2}, {1}), InputError);
}

TEST_CASE("recall") {
  CHECK(recall({3, 0, 0, 1}) == doctest::Approx(0.75));
  CHECK(recall({7, 2, 5, 0}) == doctest::Approx(1.0));
  CHECK(recall({0, 2, 5, 3}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(recall({0, 9, 4, 0}), InputError);
}

TEST_CASE("macro F1") {
  CHECK(f1_macro({5, 5, 0, 0}) == doctest::Approx(1.0));
  // per-class F1s 2/3 and 8/11 -> 23/33
  CHECK(f1_macro({3, 4, 1, 2}) == doctest::Approx(23.0 / 33.0).epsilon(1e-12));
  // degenerate positive class contributes 0
  CHECK(f1_macro({0, 3, 0, 2}) == doctest::Approx(0.375));
  CHECK_THROWS_AS(f1_macro({0, 4, 1, 0}), InputError);  // no positives
  CHECK_THROWS_AS(f1_macro({3, 0, 0, 1}), InputError);  // no negatives
}

TEST_CASE("AUROC basics") {
  CHECK(auroc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == doctest::Approx(1.0));
  CHECK(auroc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == doctest::Approx(0.5));
  CHECK(auroc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(auroc({0.1, 0.2}, {1, 1}), InputError);
  CHECK_THROWS_AS(auroc({0.1, 0.2}, {0, 0}), InputError);
  CHECK_THROWS_AS(auroc({}, {}), InputError);
  CHECK_THROWS_AS(auroc({0.1, 0.2}, {0, 2}), InputError);
}

TEST_CASE("AUROC matches pairwise brute force with heavy ties") {
  for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
    Rng rng(seed);
    int n = 40 + int(rng.next_below(161));  // up to just above 200? keep <=200
    n = std::min(n, 200);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      // coarse grid forces tie runs
      scores[i] = double(rng.next_below(12)) / 11.0;
      labels[i] = rng.next_below(2) ? 1 : 0;
    }
    labels[0] = 0;
    labels[1] = 1;
    double fast = auroc(scores, labels);
    double slow = auroc_bruteforce(scores, labels);
    CHECK(std::abs(fast - slow) <= 1e-12);
  }
}

TEST_CASE("composite index arithmetic and order invariance") {
  std::array<double, 4> a{0.45, 0.28, 0.35, 0.19};
  CHECK(composite_index(a) == doctest::Approx(0.3175).epsilon(1e-12));
  CHECK(std::round(composite_index(a) * 100) / 100 == doctest::Approx(0.32));

  std::array<double, 4> b{0.85, 0.79, 0.81, 0.65};
  CHECK(composite_index(b) == doctest::Approx(0.775).epsilon(1e-12));
  CHECK(std::round(composite_index(b) * 100) / 100 == doctest::Approx(0.78));

  std::sort(a.begin(), a.end());
  do {
    CHECK(composite_index(a) == doctest::Approx(0.3175).epsilon(1e-12));
  } while (std::next_permutation(a.begin(), a.end()));
}

TEST_CASE("dynamics on a two-window toy") {
  // window 0 (day one): r0,r1 post at constant 10s gaps; window 1 (day two):
  // r1,r2 post with uneven gaps
  std::string text;
  text += jl("r0", "p0", 0);
  text += jl("r1", "p0", 10);
  text += jl("r0", "p1", 20);
  text += jl("r1", "p1", 30);
  text += jl("r1", "p0", 86400);
  text += jl("r2", "p2", 86410);
  text += jl("r2", "p0", 86490);
  auto g = from_lines(text);
  graph::TimeWindowing w;
  w.boundaries = {0.0, 86400.0, 2.0 * 86400.0};

  DynamicsReport rep = dynamics(g, w);
  REQUIRE(rep.r.size() == 2);
  CHECK(rep.r[0] == doctest::Approx(4.0));  // events per day
  CHECK(rep.r[1] == doctest::Approx(3.0));
  CHECK(std::isnan(rep.c[0]));
  CHECK(std::isnan(rep.u[0]));
  // active sets {r0,r1} then {r1,r2}: jaccard 1/3
  CHECK(rep.c[1] == doctest::Approx(2.0 / 3.0));
  // edges {r0p0,r1p0,r0p1,r1p1} then {r1p0,r2p2,r2p0}: jaccard 1/6
  CHECK(rep.u[1] == doctest::Approx(5.0 / 6.0));
  // constant gaps
  CHECK(rep.B[0] == doctest::Approx(-1.0));
  // gaps {10, 80}: mu 45, sigma 35
  CHECK(rep.B[1] == doctest::Approx((35.0 - 45.0) / (35.0 + 45.0)));

  CHECK(rep.r_bar == doctest::Approx(3.5));
  CHECK(rep.c_bar == doctest::Approx(2.0 / 3.0));
  CHECK(rep.B_bar == doctest::Approx(0.5 * (-1.0 - 0.125)));

  // single dataset: normalized components degenerate to 0.5
  CHECK(rep.normalized_degenerate);
  CHECK(rep.r_norm == doctest::Approx(0.5));
  CHECK(rep.D == doctest::Approx(0.5));

  graph::TimeWindowing one;
  one.boundaries = {0.0, 2.0 * 86400.0};
  CHECK_THROWS_AS(dynamics(g, one), InputError);
}

TEST_CASE("windows with at most one event skip burstiness") {
  std::string text;
  text += jl("r0", "p0", 0);
  text += jl("r0", "p1", 50);
  text += jl("r0", "p2", 70);
  text += jl("r1", "p0", 86400);  // lone event in window 1
  auto g = from_lines(text);
  graph::TimeWindowing w;
  w.boundaries = {0.0, 86400.0, 2.0 * 86400.0};
  DynamicsReport rep = dynamics(g, w);
  CHECK_FALSE(std::isnan(rep.B[0]));
  CHECK(std::isnan(rep.B[1]));
  CHECK(rep.B_bar == doctest::Approx(rep.B[0]));  // skipped, not zero-filled
}

TEST_CASE("min-max normalization across datasets") {
  DynamicsReport lo, mid, hi;
  lo.r_bar = 10.0;
  mid.r_bar = 15.0;
  hi.r_bar = 20.0;
  lo.c_bar = mid.c_bar = hi.c_bar = 0.4;  // zero span stays at 0.5
  lo.u_bar = 0.0;
  mid.u_bar = 1.0;
  hi.u_bar = 0.5;
  lo.B_bar = -1.0;
  mid.B_bar = 0.0;
  hi.B_bar = 1.0;
  std::vector<DynamicsReport> reps{lo, mid, hi};
  normalize_reports(reps);
  CHECK(reps[0].r_norm == doctest::Approx(0.0));
  CHECK(reps[1].r_norm == doctest::Approx(0.5));
  CHECK(reps[2].r_norm == doctest::Approx(1.0));
  for (const auto& r : reps) CHECK(r.c_norm == doctest::Approx(0.5));
  CHECK(reps[1].u_norm == doctest::Approx(1.0));
  CHECK(reps[2].B_norm == doctest::Approx(1.0));
  CHECK_FALSE(reps[0].normalized_degenerate);
  CHECK(reps[0].D ==
        doctest::Approx((0.0 + 0.5 + 0.0 + 0.0) / 4.0));
  CHECK(reps[2].D ==
        doctest::Approx((1.0 + 0.5 + 0.5 + 1.0) / 4.0));

  std::vector<DynamicsReport> single{lo};
  normalize_reports(single);
  CHECK(single[0].normalized_degenerate);
  CHECK(single[0].D == doctest::Approx(0.5));
}

TEST_CASE("extract_groups component and threshold behavior") {
  // r0,r1 share p0; r2,r3 share p2; r4 suspicious but isolated; r5 genuine
  std::string text;
  text += jl("r0", "p0", 0);
  text += jl("r1", "p0", 1);
  text += jl("r2", "p2", 2);
  text += jl("r3", "p2", 3);
  text += jl("r4", "p3", 4);
  text += jl("r5", "p0", 5);
  auto g = from_lines(text);

  std::vector<std::uint8_t> none(6, 0);
  CHECK(extract_groups(g, none, std::vector<double>(6, 0.9)).empty());

  std::vector<std::uint8_t> susp{1, 1, 1, 1, 1, 0};
  std::vector<double> scores{0.7, 0.7, 0.7, 0.45, 0.9, 0.99};
  auto groups = extract_groups(g, susp, scores);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].members == std::vector<int>{0, 1});
  CHECK(groups[0].mean_score == doctest::Approx(0.7));
  CHECK(groups[0].flagged);
  CHECK(groups[1].members == std::vector<int>{2, 3});
  CHECK(groups[1].mean_score == doctest::Approx(0.575));
  CHECK_FALSE(groups[1].flagged);  // 0.575 < 0.6

  CHECK_THROWS_AS(extract_groups(g, susp, scores, 1.5), InputError);
  CHECK_THROWS_AS(extract_groups(g, {1, 0}, scores), InputError);
}

TEST_CASE("extract_groups chains transitive co-reviews") {
  std::string text;
  text += jl("a", "p0", 0);
  text += jl("b", "p0", 1);
  text += jl("b", "p1", 2);
  text += jl("c", "p1", 3);
  auto g = from_lines(text);
  auto groups = extract_groups(g, {1, 1, 1}, {0.8, 0.8, 0.8});
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].members == std::vector<int>{0, 1, 2});
}

TEST_CASE("extract_groups ignores reviewer input order") {
  std::vector<std::string> lines{jl("a", "p0", 0), jl("b", "p0", 1),
                                 jl("c", "p1", 2), jl("d", "p1", 3)};
  auto run = [&](const std::vector<int>& order) {
    std::string text;
    for (int i : order) text += lines[i];
    auto g = from_lines(text);
    std::vector<std::uint8_t> susp(4, 1);
    std::vector<double> scores(4);
    std::map<std::string, double> by_id{
        {"a", 0.9}, {"b", 0.8}, {"c", 0.7}, {"d", 0.65}};
    for (int r = 0; r < 4; ++r) scores[r] = by_id.at(g.reviewer_ids[r]);
    std::set<std::set<std::string>> names;
    for (const auto& grp : extract_groups(g, susp, scores)) {
      std::set<std::string> ids;
      for (int r : grp.members) ids.insert(g.reviewer_ids[r]);
      names.insert(std::move(ids));
    }
    return names;
  };
  CHECK(run({0, 1, 2, 3}) == run({3, 2, 1, 0}));
  CHECK(run({2, 0, 3, 1}) == run({0, 1, 2, 3}));
}

TEST_CASE("report formats keep the fixed column order") {
  std::vector<ReportRow> rows{{"full", "all", 0.91, 0.88, 0.9, 0.95},
                              {"no_nfs", "small", 0.8, 0.7, 0.75, 0.85}};
  std::string csv = report_csv(rows);
  CHECK(csv.rfind("variant,split,accuracy,recall,f1_macro,auroc\n", 0) == 0);
  CHECK(csv.find("full,all,0.910000,0.880000,0.900000,0.950000") !=
        std::string::npos);
  std::string tab = report_table(rows);
  CHECK(tab.find("no_nfs") != std::string::npos);
  CHECK(tab.find("0.9500") != std::string::npos);
}

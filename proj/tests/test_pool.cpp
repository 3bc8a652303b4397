#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "frgd/pool_sample.hpp"

using namespace frgd;
using namespace frgd::pool;

namespace {

std::string jl(const std::string& r, const std::string& p, long t) {
  return "{\"reviewer_id\":\"" + r + "\",\"product_id\":\"" + p +
         "\",\"timestamp\":" + std::to_string(t) + ",\"rating\":4}\n";
}

}  // namespace

TEST_CASE("importance weights validation") {
  ImportanceWeights w;
  CHECK_NOTHROW(w.validate());
  w.alpha1 = 0.9;
  CHECK_THROWS_AS(w.validate(), InputError);
  w = {};
  w.beta1 = 0.9;
  CHECK_THROWS_AS(w.validate(), InputError);
  w = {};
  w.delta = 1.5;
  CHECK_THROWS_AS(w.validate(), InputError);
}

TEST_CASE("node importance arithmetic") {
  ImportanceWeights w;
  CHECK(node_importance(1.0, 7, 7, 1.0, w) == doctest::Approx(1.0));
  CHECK(node_importance(0.0, 0, 7, 0.0, w) == doctest::Approx(0.0));
  CHECK(node_importance(0.8, 1, 2, 0.0, w) == doctest::Approx(0.55));
  // max degree 0 -> degree term vanishes
  CHECK(node_importance(0.8, 3, 0, 0.0, w) == doctest::Approx(0.4));
}

TEST_CASE("sample_nodes threshold, cap and fallback") {
  std::vector<int> nodes{0, 1, 2, 3, 4};
  std::vector<double> imp{0.9, 0.1, 0.7, 0.3, 0.5};

  auto all = sample_nodes(nodes, imp, 0.0, 1000);
  CHECK(all.size() == 5);

  auto top2 = sample_nodes(nodes, imp, 0.0, 2);
  CHECK(top2 == std::vector<int>{0, 2});

  auto fallback = sample_nodes(nodes, imp, 0.95, 1000);
  CHECK(fallback == std::vector<int>{0});

  auto mid = sample_nodes(nodes, imp, 0.5, 1000);
  CHECK(mid == std::vector<int>{0, 2, 4});

  // raising theta never increases the sample
  for (double lo = 0.0; lo <= 1.0; lo += 0.1) {
    auto a = sample_nodes(nodes, imp, lo, 1000);
    auto b = sample_nodes(nodes, imp, lo + 0.05, 1000);
    CHECK(b.size() <= a.size());
  }
}

TEST_CASE("window slice collapses pairs and scales times") {
  auto g = graph::ingest_text(jl("a", "x", 0) + jl("a", "x", 10) +
                                  jl("b", "x", 50) + jl("b", "y", 100),
                              {})
               .graph;
  auto tw = graph::make_windows(g, 2);  // [0,50) and [50,100]
  auto s0 = window_slice(g, tw, 0);
  REQUIRE(s0.edges.size() == 1);  // a-x twice collapses
  CHECK(s0.edges[0].weight == doctest::Approx(2.0));
  CHECK(s0.nodes == std::vector<int>{0, 2});  // reviewer a, product x
  CHECK(s0.node_time01[0] == doctest::Approx(0.05));  // mean(0,0.1)

  auto s1 = window_slice(g, tw, 1);
  CHECK(s1.edges.size() == 2);
  CHECK(s1.nodes.size() == 3);  // b, x, y
}

TEST_CASE("induce_edges keeps only fully sampled endpoints") {
  std::vector<WindowEdge> edges{{0, 5, 1.0}, {1, 5, 1.0}, {2, 6, 1.0}, {3, 7, 1.0}};
  std::vector<int> sampled{0, 2, 5, 7};
  auto kept = induce_edges(edges, sampled);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].u == 0);
  CHECK(kept[0].v == 5);

  auto none = induce_edges(edges, std::vector<int>{0, 6});
  CHECK(none.empty());
  std::vector<int> everything{0, 1, 2, 3, 5, 6, 7};
  CHECK(induce_edges(edges, everything).size() == 4);
}

TEST_CASE("edge importance arithmetic") {
  ImportanceWeights w;
  Eigen::VectorXd a(2), b(2), zero(2);
  a << 1.0, 2.0;
  b << 2.0, 4.0;
  zero.setZero();
  CHECK(edge_importance(1.0, a, a, w) == doctest::Approx(1.0));
  Eigen::VectorXd c(2);
  c << -2.0, 1.0;  // orthogonal to a
  ImportanceWeights w2;
  w2.beta1 = 0.0;
  w2.beta2 = 1.0;
  CHECK(edge_importance(0.7, a, c, w2) == doctest::Approx(0.0));
  CHECK(edge_importance(0.4, a, b, w) ==
        doctest::Approx(0.5 * 0.4 + 0.5 * 1.0));
  // zero vector defines cos = 0
  CHECK(edge_importance(0.4, a, zero, w) == doctest::Approx(0.2));
}

namespace {

PoolInput two_triangles() {
  // nodes 0-2 tight, nodes 3-5 tight, one weak bridge 2-3
  PoolInput in;
  in.window = 0;
  in.nodes = {10, 11, 12, 13, 14, 15};
  in.features.resize(6, 2);
  for (int i = 0; i < 6; ++i) {
    in.features(i, 0) = i < 3 ? 1.0 : -1.0;
    in.features(i, 1) = double(i);
    in.importance.push_back(1.0);
    in.s_norm.push_back(i < 3 ? 0.8 : 0.2);
    in.time01.push_back(0.1 * i);
  }
  auto link = [&](int u, int v, double w) { in.edges.push_back({u, v, w}); };
  link(0, 1, 0.9);
  link(1, 2, 0.9);
  link(0, 2, 0.9);
  link(3, 4, 0.9);
  link(4, 5, 0.9);
  link(3, 5, 0.9);
  link(2, 3, 0.3);
  return in;
}

}  // namespace

TEST_CASE("cluster_pool separates communities and pools by Eq. 19/20") {
  auto in = two_triangles();
  auto pg = cluster_pool(in, 2);
  REQUIRE(pg.supernodes.size() == 2);
  std::vector<int> left = pg.supernodes[0].members;
  CHECK(left == std::vector<int>{10, 11, 12});
  CHECK(pg.supernodes[1].members == std::vector<int>{13, 14, 15});

  // equal importances -> arithmetic mean of member vectors
  CHECK(pg.supernodes[0].h[0] == doctest::Approx(1.0));
  CHECK(pg.supernodes[0].h[1] == doctest::Approx(1.0));  // mean(0,1,2)
  CHECK(pg.supernodes[0].s_norm == doctest::Approx(0.8));
  CHECK(pg.supernodes[0].importance == doctest::Approx(3.0));

  // single cross edge of importance 0.3
  REQUIRE(pg.superedges.size() == 1);
  CHECK(pg.superedges[0].weight == doctest::Approx(0.3));
}

TEST_CASE("cluster_pool singleton keeps its vector") {
  PoolInput in;
  in.window = 3;
  in.nodes = {42};
  in.features.resize(1, 3);
  in.features << 1.0, 2.0, 3.0;
  in.importance = {0.7};
  in.s_norm = {0.9};
  in.time01 = {0.5};
  auto pg = cluster_pool(in, 0);
  REQUIRE(pg.supernodes.size() == 1);
  CHECK(pg.supernodes[0].h[2] == doctest::Approx(3.0));
  CHECK(pg.supernodes[0].window == 3);
  CHECK(pg.supernodes[0].importance == doctest::Approx(0.7));
}

TEST_CASE("cluster_pool superedge accumulates cross weights") {
  PoolInput in;
  in.window = 0;
  in.nodes = {0, 1, 2, 3};
  in.features = Eigen::MatrixXd::Zero(4, 1);
  in.importance = {1, 1, 1, 1};
  in.s_norm = {0, 0, 0, 0};
  in.time01 = {0, 0, 0, 0};
  // two tight pairs, two cross edges 0.2 and 0.3
  in.edges = {{0, 1, 0.95}, {2, 3, 0.95}, {0, 2, 0.2}, {1, 3, 0.3}};
  auto pg = cluster_pool(in, 2);
  REQUIRE(pg.supernodes.size() == 2);
  REQUIRE(pg.superedges.size() == 1);
  CHECK(pg.superedges[0].weight == doctest::Approx(0.5));
}

TEST_CASE("cluster_pool respects the k cap via merging") {
  auto in = two_triangles();
  auto pg = cluster_pool(in, 1);  // force everything together via bridge
  CHECK(pg.supernodes.size() == 1);
  CHECK(pg.supernodes[0].members.size() == 6);
  CHECK(pg.superedges.empty());
}

TEST_CASE("pooled representation stays in the member convex hull") {
  auto in = two_triangles();
  in.importance = {0.2, 0.5, 0.9, 0.1, 0.4, 0.6};
  auto pg = cluster_pool(in, 2);
  for (const auto& sn : pg.supernodes) {
    for (int c = 0; c < sn.h.size(); ++c) {
      double lo = 1e30, hi = -1e30;
      for (int m : sn.members) {
        int row = int(std::find(in.nodes.begin(), in.nodes.end(), m) -
                      in.nodes.begin());
        lo = std::min(lo, in.features(row, c));
        hi = std::max(hi, in.features(row, c));
      }
      CHECK(sn.h[c] >= lo - 1e-9);
      CHECK(sn.h[c] <= hi + 1e-9);
    }
  }
}

TEST_CASE("zero importance cluster falls back to uniform pooling") {
  PoolInput in;
  in.window = 0;
  in.nodes = {0, 1};
  in.features.resize(2, 1);
  in.features << 2.0, 4.0;
  in.importance = {0.0, 0.0};
  in.s_norm = {0.0, 0.0};
  in.time01 = {0.2, 0.4};
  in.edges = {{0, 1, 0.9}};
  auto pg = cluster_pool(in, 1);
  REQUIRE(pg.supernodes.size() == 1);
  CHECK(pg.supernodes[0].h[0] == doctest::Approx(3.0));
  CHECK(pg.supernodes[0].time01 == doctest::Approx(0.3));
}

TEST_CASE("merge_windows is a namespaced disjoint union") {
  auto a = cluster_pool(two_triangles(), 2);
  PoolInput second = two_triangles();
  second.window = 1;
  second.nodes = {20, 21, 22, 23, 24, 25};
  auto b = cluster_pool(second, 2);

  std::vector<PooledGraph> parts{a, b};
  auto merged = merge_windows(parts);
  CHECK(merged.supernodes.size() == 4);
  CHECK(merged.superedges.size() == 2);
  CHECK(merged.superedges[1].a == 2);  // offset applied
  CHECK(merged.supernodes[2].window == 1);

  // every sampled node appears in exactly one supernode per window
  std::map<std::pair<int, int>, int> seen;
  for (const auto& sn : merged.supernodes)
    for (int m : sn.members) seen[{sn.window, m}]++;
  for (auto& [key, cnt] : seen) CHECK(cnt == 1);

  // single window is the identity
  std::vector<PooledGraph> one{a};
  auto same = merge_windows(one);
  CHECK(same.supernodes.size() == a.supernodes.size());
  CHECK(same.superedges.size() == a.superedges.size());
}

TEST_CASE("pooling determinism") {
  auto in = two_triangles();
  auto p1 = cluster_pool(in, 2);
  auto p2 = cluster_pool(in, 2);
  REQUIRE(p1.supernodes.size() == p2.supernodes.size());
  for (size_t i = 0; i < p1.supernodes.size(); ++i) {
    CHECK(p1.supernodes[i].members == p2.supernodes[i].members);
    CHECK((p1.supernodes[i].h - p2.supernodes[i].h).norm() == 0.0);
  }
}

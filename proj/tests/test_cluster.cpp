#include <doctest.h>

#include <cmath>

#include "coa/cluster.hpp"
#include "coa/random.hpp"
#include "helpers.hpp"

using namespace coa;

namespace {

Configuration valued(std::vector<int> boxes, double x) { return Configuration{std::move(boxes), x}; }

// Written out directly from the definition.
double reference_similarity(const std::vector<int>& a, const std::vector<int>& b, double xa, double xb, double lo,
                            double hi) {
  double differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += a[i] != b[i];
  const double dv = hi > lo ? std::abs(xa - xb) / (hi - lo) : 0.0;
  return 1.0 - (1.0 - differ / double(a.size())) * (1.0 - dv);
}

std::vector<std::vector<double>> best_distances(const std::vector<Cluster>& cs, std::size_t k, double lo, double hi) {
  std::vector<std::vector<double>> d(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) d[i][j] = similarity(cs[i].best, cs[j].best, lo, hi);
  return d;
}

}  // namespace

TEST_CASE("similarity") {
  const auto a = valued({1, 2, 3, 4, 5, 6, 7}, 0.0);
  auto b = valued({1, 2, 3, 4, 5, 6, 8}, 0.0);
  CHECK(struct_sim(a, b) == 1);
  CHECK(similarity(a, b, -1.0, 1.0) == doctest::Approx(1.0 / 7.0));
  CHECK(similarity(a, a, -1.0, 1.0) == 0.0);
  b.value = 1.0;
  CHECK(similarity(a, b, -1.0, 1.0) == doctest::Approx(1.0 - (6.0 / 7.0) * 0.5));
  CHECK(similarity(a, b, 0.0, 0.0) == doctest::Approx(1.0 / 7.0));  // flat range drops the value term
  const auto c = valued({2, 3, 4, 5, 6, 7, 1}, 0.0);
  CHECK(similarity(a, c, -1.0, 1.0) == 1.0);
  CHECK_THROWS_AS(struct_sim(a, valued({1}, 0.0)), ClusterError);

  Rng rng(1);
  for (int k = 0; k < 500; ++k) {
    std::vector<int> p(5), q(5);
    for (int i = 0; i < 5; ++i) {
      p[i] = 1 + int(rng.index(4));
      q[i] = 1 + int(rng.index(4));
    }
    const double xp = rng.uniform01() - 0.5, xq = rng.uniform01() - 0.5;
    const double s = similarity(valued(p, xp), valued(q, xq), -0.5, 0.5);
    CHECK(s == doctest::Approx(reference_similarity(p, q, xp, xq, -0.5, 0.5)).epsilon(1e-14));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s == doctest::Approx(similarity(valued(q, xq), valued(p, xp), -0.5, 0.5)));
  }
}

TEST_CASE("clustering joins configurations within tau") {
  SUBCASE("identical structure and value form one cluster") {
    const auto cs = cluster_all({valued({1, 2}, 0.1), valued({1, 2}, 0.1), valued({1, 2}, 0.1)}, 0.1);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].members.size() == 3);
  }
  SUBCASE("tau zero separates every distinct configuration") {
    const auto cs = cluster_all({valued({1, 2}, 0.1), valued({1, 3}, 0.1), valued({1, 2}, 0.1)}, 0.0);
    CHECK(cs.size() == 2);
  }
  SUBCASE("tau one puts everything together") {
    const auto cs = cluster_all({valued({1, 2}, 0.5), valued({3, 4}, -0.2), valued({2, 2}, 0.0)}, 1.0);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].members.front().value == -0.2);  // processed in ascending value
  }
  SUBCASE("complete linkage checks every member") {
    // b is close to a and c, but a and c are far apart; c cannot join {a, b}.
    const auto a = valued({1, 1, 1, 1}, 0.0);
    const auto b = valued({1, 1, 2, 2}, 0.0);
    const auto c = valued({2, 2, 2, 2}, 0.0);
    const auto pad = valued({9, 9, 9, 9}, 1.0);  // sets the value range
    const auto cs = cluster_all({a, b, c, pad}, 0.5);
    REQUIRE(cs.size() == 3);
    CHECK(cs[0].members.size() == 2);
    CHECK(cs[1].members.size() == 1);
    CHECK(cs[1].members[0].assignment == c.assignment);
  }
  SUBCASE("the nearest eligible cluster wins") {
    const auto cs = cluster_all({valued({1, 1, 1, 1}, 0.0), valued({2, 2, 2, 2}, 0.0), valued({2, 2, 2, 1}, 0.0),
                                 valued({9, 9, 9, 9}, 1.0)},
                                0.8);
    REQUIRE(cs.size() >= 2);
    // {2,2,2,1} differs from the second founder in one slot and from the first in three.
    bool placed_with_second = false;
    for (const auto& m : cs[1].members) placed_with_second |= m.assignment == std::vector<int>{2, 2, 2, 1};
    CHECK(placed_with_second);
  }
  CHECK(cluster_all({}, 0.3).empty());
}

TEST_CASE("every member lies within tau of its whole cluster") {
  Rng rng(21);
  std::vector<Configuration> cs;
  for (int k = 0; k < 200; ++k) {
    std::vector<int> p(6);
    for (int& b : p) b = 1 + int(rng.index(5));
    cs.push_back(valued(p, rng.uniform01() - 0.3));
  }
  double lo = 1e9, hi = -1e9;
  for (const auto& c : cs) {
    lo = std::min(lo, *c.value);
    hi = std::max(hi, *c.value);
  }
  const double tau = 0.45;
  const auto clusters = cluster_all(cs, tau);
  std::size_t total = 0;
  for (const auto& cl : clusters) {
    total += cl.members.size();
    for (const auto& a : cl.members)
      for (const auto& b : cl.members) CHECK(similarity(a, b, lo, hi) <= tau + 1e-12);
  }
  CHECK(total == cs.size());
  double global = 1e9;
  for (const auto& c : cs) global = std::min(global, *c.value);
  CHECK(clusters[0].members[0].value == global);
}

TEST_CASE("cluster statistics") {
  Cluster c;
  c.members = {valued({1, 2}, 3.0), valued({1, 3}, -1.0), valued({2, 2}, 0.0)};
  cluster_stats(c, {"AIP", "TP"});
  CHECK(c.best.assignment == std::vector<int>{1, 3});
  CHECK(c.min == -1.0);
  CHECK(c.median == 0.0);
  CHECK(c.max == 3.0);
  REQUIRE(c.allocation.size() == 4);
  CHECK(c.allocation[0].box == 1);
  CHECK(c.allocation[0].type == "AIP");
  CHECK(c.allocation[0].mean == doctest::Approx(2.0 / 3.0));
  CHECK(c.allocation[1].box == 2);
  double sum = 0;
  for (const auto& cell : c.allocation) sum += cell.mean;
  CHECK(sum == doctest::Approx(2.0));  // one platoon per slot
  c.members.push_back(valued({1, 1}, 1.0));
  cluster_stats(c, {"AIP", "TP"});
  CHECK(c.median == 0.5);
  Cluster empty;
  CHECK_THROWS_AS(cluster_stats(empty, {"AIP"}), ClusterError);
}

TEST_CASE("value colours") {
  CHECK(value_color(0.0, -1.0, 1.0) == "#ffffff");
  CHECK(value_color(-1.0, -1.0, 1.0) == "#0000ff");
  CHECK(value_color(1.0, -1.0, 1.0) == "#ff0000");
  CHECK(value_color(5.0, -1.0, 1.0) == "#ff0000");
  CHECK(value_color(-0.5, -1.0, 1.0) == "#8080ff");
}

TEST_CASE("layouts reproduce small distance sets exactly") {
  std::vector<Cluster> cs(3);
  cs[0].members = {valued({1, 1, 1, 1}, -0.2), valued({1, 1, 1, 2}, -0.1)};
  cs[1].members = {valued({2, 2, 1, 1}, 0.1)};
  cs[2].members = {valued({3, 3, 3, 1}, 0.3), valued({3, 3, 3, 2}, 0.3), valued({3, 3, 3, 3}, 0.35)};
  for (auto& c : cs) cluster_stats(c, {"AIP", "AIP", "AIP", "TP"});
  const double lo = -0.2, hi = 0.35;

  const auto one = layout_topk(cs, 1, lo, hi);
  REQUIRE(one.size() == 1);
  CHECK(one[0].x == 0.0);
  CHECK(one[0].y == 0.0);
  CHECK(one[0].radius == 1.0);

  for (std::size_t k : {2u, 3u}) {
    const auto pts = layout_topk(cs, k, lo, hi);
    REQUIRE(pts.size() == k);
    CHECK(layout_stress(pts, best_distances(cs, k, lo, hi)) <= 1e-6);
    double cx = 0, cy = 0;
    for (const auto& p : pts) {
      cx += p.x;
      cy += p.y;
    }
    CHECK(std::abs(cx) <= 1e-9);
    CHECK(std::abs(cy) <= 1e-9);
  }
  const auto pts = layout_topk(cs, 10, lo, hi);
  REQUIRE(pts.size() == 3);
  CHECK(pts[2].radius == 1.0);
  CHECK(pts[0].radius == doctest::Approx(2.0 / 3.0));
  CHECK(pts[1].radius == doctest::Approx(1.0 / 3.0));
  CHECK(pts[0].color == value_color(-0.2, lo, hi));
  CHECK_THROWS_AS(layout_topk(cs, 0, lo, hi), ClusterError);
}

TEST_CASE("layout of many clusters keeps stress near the classical start") {
  Rng rng(4);
  std::vector<Configuration> configs;
  for (int k = 0; k < 120; ++k) {
    std::vector<int> p(4);
    for (int& b : p) b = 1 + int(rng.index(6));
    configs.push_back(valued(p, rng.uniform01() - 0.5));
  }
  auto cs = cluster_all(configs, 0.4);
  for (auto& c : cs) cluster_stats(c, {"AIP", "AIP", "AIP", "TP"});
  const std::size_t k = std::min<std::size_t>(8, cs.size());
  const auto pts = layout_topk(cs, k, -0.5, 0.5);
  const auto target = best_distances(cs, k, -0.5, 0.5);
  // Any planar embedding must do better than collapsing every point onto one spot.
  double collapsed = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) collapsed += target[i][j] * target[i][j];
  CHECK(layout_stress(pts, target) < 0.5 * collapsed);
}

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <set>

#include "coa/simulation.hpp"
#include "helpers.hpp"

using namespace coa;
using testutil::config;

namespace {

nlohmann::json red_unit(int type, std::vector<std::pair<int, double>> route) {
  nlohmann::json r{{"type_id", type}};
  for (auto [box, t] : route) r["route"].push_back({{"box", box}, {"arrival_s", t}});
  return r;
}

// Blue enters at box 1 of a 3-box line and holds box 2; one BMP-3 walks 3 -> 2 -> 1.
Scenario ambush() {
  auto j = testutil::line_scenario(3);
  j["red"].push_back(red_unit(4, {{3, 3600}, {2, 4500}, {1, 5400}}));
  return parse_scenario(j.dump());
}

// Like ambush() with two more BMP-3 coming the other way later on.
Scenario two_waves() {
  auto j = testutil::line_scenario(3);
  j["red"].push_back(red_unit(4, {{3, 3600}, {2, 4500}, {1, 5400}}));
  j["red"].push_back(red_unit(4, {{1, 9000}, {2, 9900}, {3, 10800}}));
  j["red"].push_back(red_unit(4, {{1, 9120}, {2, 10020}, {3, 10920}}));
  return parse_scenario(j.dump());
}

// Test-side event loop: plays the state to the end, branching over every
// regrouping at each blue victory, and returns the smallest x and leaf count.
std::pair<double, std::size_t> exhaustive(const Simulator& sim, SituationState s) {
  while (!s.empty()) {
    const Event e = s.pop();
    if (e.kind == EventKind::MoveToNewBox) {
      const auto& us = s.units[static_cast<std::size_t>(e.unit)];
      if (!us.platoon.active() || us.box != e.box) continue;
      if (us.place != Place::Transit && us.place != Place::Entry) continue;
      sim.handle_arrival(s, e.unit, e.box);
      continue;
    }
    const auto& c = s.combat_at(e.box);
    if (!c.active || c.version != e.version) continue;
    const auto survivors = sim.handle_end_of_combat(s, e.box);
    if (!survivors) continue;
    Rng rng(1);
    const auto alts = enumerate_regroupings(survivors->size(), sim.scenario().graph.box_count(), e.box, rng);
    double best = std::numeric_limits<double>::infinity();
    std::size_t leaves = 0;
    for (const auto& a : alts) {
      SituationState child = s;
      sim.apply_regrouping(child, e.box, *survivors, a.assignment);
      const auto [x, n] = exhaustive(sim, std::move(child));
      best = std::min(best, x);
      leaves += n;
    }
    return {best, leaves};
  }
  const double x = valuation(sim.blue_value(s), sim.red_value(s), s.illegal_moves, sim.options());
  return {x, 1};
}

}  // namespace

TEST_CASE("valuation") {
  CHECK(valuation(0.5, 0.0, 0) == doctest::Approx(-0.1));
  CHECK(valuation(0.0, 0.0, 0) == 0.0);
  CHECK(valuation(0.1, 0.45, 0) == doctest::Approx(1.1 * 0.45 - 0.02));
  CHECK(valuation(0.0, 0.0, 2) == doctest::Approx(20.0));
}

TEST_CASE("the two valuation forms differ by a configuration-independent constant") {
  Rng rng(5);
  const double bi = 0.8, ri = 0.768125;
  for (int i = 0; i < 500; ++i) {
    const double bf = bi * rng.uniform01(), rf = ri * rng.uniform01();
    const int ill = static_cast<int>(rng.index(3));
    const double d = valuation_with_initials(bi, bf, ri, rf, ill) - valuation(bf, rf, ill);
    CHECK(d == doctest::Approx(0.2 * bi - 0.1 * ri).epsilon(1e-12));
  }
}

TEST_CASE("event queue pops by time, FIFO among ties") {
  SituationState s;
  s.push({EventKind::MoveToNewBox, 5.0, 0, 0, 1, 0});
  s.push({EventKind::MoveToNewBox, 1.0, 0, 1, 1, 0});
  s.push({EventKind::EndOfCombat, 5.0, 0, 2, 1, 0});
  s.push({EventKind::MoveToNewBox, 5.0, 0, 3, 1, 0});
  std::vector<int> order;
  while (!s.empty()) order.push_back(s.pop().unit);
  CHECK(order == std::vector<int>{1, 0, 2, 3});
  CHECK(s.clock == 5.0);
}

TEST_CASE("an unopposed red force keeps its full value") {
  const auto r = simulate(config({}), testutil::bundled());
  CHECK(r.red_final == doctest::Approx(0.768125).epsilon(1e-15));
  CHECK(r.blue_final == 0.0);
  CHECK(r.x_value == doctest::Approx(0.8449375).epsilon(1e-15));
  CHECK(r.illegal_moves == 0);
}

TEST_CASE("regrouping enumeration") {
  Rng rng(3);
  SUBCASE("one unit goes to each other box") {
    const auto alts = enumerate_regroupings(1, 14, 5, rng);
    CHECK(alts.size() == 13);
    std::set<int> boxes;
    for (const auto& a : alts) boxes.insert(a.assignment[0]);
    CHECK(boxes.size() == 13);
    CHECK_FALSE(boxes.count(5));
  }
  SUBCASE("small spaces are listed in full") {
    CHECK(enumerate_regroupings(2, 3, 1, rng).size() == 4);
    CHECK(enumerate_regroupings(4, 3, 2, rng).size() == 16);
  }
  SUBCASE("large spaces stop at the cap with distinct entries") {
    const auto alts = enumerate_regroupings(3, 14, 7, rng);
    CHECK(alts.size() == 120);
    std::set<std::vector<int>> seen;
    for (const auto& a : alts) {
      seen.insert(a.assignment);
      for (int b : a.assignment) {
        CHECK(b != 7);
        CHECK(b >= 1);
        CHECK(b <= 14);
      }
    }
    CHECK(seen.size() == alts.size());
  }
  CHECK(enumerate_regroupings(0, 14, 1, rng).empty());
  CHECK(enumerate_regroupings(2, 1, 1, rng).empty());
}

TEST_CASE("a strong blue defense destroys a lone attacker") {
  const auto s = ambush();
  SimOptions opt;
  opt.record_log = true;
  const auto r = simulate(config({2, 2, 2, 2}), s, opt);
  CHECK(r.red_final == 0.0);
  CHECK(r.blue_final > 0.0);
  CHECK(r.blue_final < 0.25);
  CHECK(r.x_value == doctest::Approx(-0.2 * r.blue_final));
  REQUIRE(r.battle_log.size() == 1);
  CHECK(r.battle_log[0].outcome == Winner::Blue);
  CHECK(r.battle_log[0].typing == EngagementTyping{Engagement::DeliberateDefense, Engagement::DeliberateAttack});
  CHECK(r.rollouts_explored == 16);
  CHECK_FALSE(r.truncated);
  CHECK_FALSE(r.frames.empty());
}

TEST_CASE("a lone platoon loses to a larger force") {
  auto j = testutil::line_scenario(3);
  for (int k = 0; k < 4; ++k) j["red"].push_back(red_unit(4, {{3, 3600.0 + k}, {2, 4500.0 + k}, {1, 5400.0 + k}}));
  const auto s = parse_scenario(j.dump());
  const auto r = simulate(config({2}), s);
  CHECK(r.blue_final == 0.0);
  CHECK(r.red_final > 0.0);
  CHECK(r.red_final < 4 * 0.040625);
}

TEST_CASE("branching finds the best leaf of the full tree") {
  const auto s = two_waves();
  const std::vector<std::vector<int>> configs = {{2, 2, 2, 2}, {2, 2, 2, 3}, {1, 2, 2, 3}, {2, 2, 3, 3}};
  std::size_t most = 0;
  for (const auto& c : configs) {
    const Simulator sim(s, compose_blue_force(s, 4));
    const auto [x, leaves] = exhaustive(sim, sim.init_state(config(c)));
    const auto r = sim.simulate(config(c));
    CHECK(r.x_value == doctest::Approx(x).epsilon(1e-14));
    CHECK(r.rollouts_explored == leaves);

    SimOptions one;
    one.rollout_budget = 1;
    const auto first = Simulator(s, compose_blue_force(s, 4), one).simulate(config(c));
    CHECK(r.x_value <= first.x_value);
    if (leaves > 1) CHECK(first.truncated);
    most = std::max(most, leaves);
  }
  CHECK(most > 16);  // some line branches more than once
}

TEST_CASE("the replayed log reaches the searched value") {
  const auto s = two_waves();
  SimOptions opt;
  opt.record_log = true;
  const Simulator sim(s, compose_blue_force(s, 3), opt);
  const auto r = sim.simulate(config({2, 2, 3}));
  const auto& last = r.frames.back();
  CHECK(last.blue_value == doctest::Approx(r.blue_final).epsilon(1e-12));
  CHECK(last.red_value == doctest::Approx(r.red_final).epsilon(1e-12));
  SimOptions quiet;
  CHECK(Simulator(s, compose_blue_force(s, 3), quiet).simulate(config({2, 2, 3})).x_value == r.x_value);
}

TEST_CASE("illegal move checks") {
  auto j = testutil::line_scenario(3);
  j["red"].push_back(red_unit(4, {{3, 100}, {2, 400}}));
  const auto s = parse_scenario(j.dump());
  const Simulator sim(s, compose_blue_force(s, 1));
  auto st = sim.init_state(config({3}));
  auto& blue = st.units[0];
  auto& red = st.units[1];

  SUBCASE("entry connector is never illegal") { CHECK_FALSE(sim.detect_illegal_move(st, 0)); }
  SUBCASE("passing a box with fighting in it") {
    blue.place = Place::Box;
    blue.box = 2;
    CHECK_FALSE(sim.detect_illegal_move(st, 0));
    st.combat_at(2).active = true;
    CHECK(sim.detect_illegal_move(st, 0));
    blue.dest = 2;
    CHECK_FALSE(sim.detect_illegal_move(st, 0));
  }
  SUBCASE("passing a box holding red") {
    blue.place = Place::Box;
    blue.box = 2;
    red.place = Place::Box;
    red.box = 2;
    CHECK(sim.detect_illegal_move(st, 0));
  }
  SUBCASE("sharing an edge with red") {
    blue.place = Place::Transit;
    blue.from = 2;
    blue.box = 3;
    blue.depart_s = 0;
    blue.arrive_s = 100;
    red.place = Place::Transit;
    red.from = 3;
    red.box = 2;
    red.depart_s = 50;
    red.arrive_s = 150;
    CHECK(sim.detect_illegal_move(st, 0));
    red.depart_s = 100;
    red.arrive_s = 200;
    CHECK_FALSE(sim.detect_illegal_move(st, 0));
    red.depart_s = 50;
    red.from = 1;
    red.box = 2;
    CHECK_FALSE(sim.detect_illegal_move(st, 0));
  }
}

TEST_CASE("a blue platoon meeting red on an edge is discarded") {
  // Red runs 3 -> 2 during [100, 400]; blue runs 2 -> 3 during [240, 360].
  auto j = testutil::line_scenario(3);
  j["red"].push_back(red_unit(4, {{3, 100}, {2, 400}}));
  const auto s = parse_scenario(j.dump());
  SimOptions opt;
  opt.record_log = true;
  const auto r = simulate(config({3}), s, opt);
  CHECK(r.illegal_moves == 1);
  CHECK(r.blue_final == 0.0);
  CHECK(r.x_value == doctest::Approx(1.1 * 0.040625 + 10.0));
  const bool logged = std::any_of(r.events.begin(), r.events.end(), [](const EventRecord& e) { return e.kind == "illegal_move"; });
  CHECK(logged);
}

TEST_CASE("simulation invariants on random configurations") {
  const auto& s = testutil::bundled();
  Rng rng(11);
  SimOptions opt;
  opt.rollout_budget = 50;
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + static_cast<int>(rng.index(16));
    std::vector<int> boxes;
    for (int i = 0; i < n; ++i) boxes.push_back(1 + static_cast<int>(rng.index(14)));
    const auto r = simulate(config(boxes), s, opt);
    CHECK(r.blue_final <= r.blue_initial + 1e-12);
    CHECK(r.red_final <= r.red_initial + 1e-12);
    CHECK(r.blue_final >= 0.0);
    CHECK(r.red_final >= 0.0);
    CHECK(r.x_value == doctest::Approx(valuation(r.blue_final, r.red_final, r.illegal_moves)));
    CHECK(r.rollouts_explored <= opt.rollout_budget + r.decisions.size());  // the first child of each open branch still runs
    const auto again = simulate(config(boxes), s, opt);
    CHECK(again.x_value == r.x_value);
    CHECK(again.decisions.size() == r.decisions.size());
  }
}

TEST_CASE("event log lines are JSON objects") {
  const auto s = ambush();
  SimOptions opt;
  opt.record_log = true;
  const auto r = simulate(config({2, 2}), s, opt);
  const auto text = event_log_ndjson(r.events);
  std::size_t lines = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\n') continue;
    const auto obj = nlohmann::json::parse(text.substr(start, i - start));
    CHECK(obj.contains("kind"));
    start = i + 1;
    ++lines;
  }
  CHECK(lines == r.events.size());
}

#include "coa/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace coa {
namespace {

constexpr std::size_t kMaxUnits = 64;

bool later(const Event& a, const Event& b) {
  return a.time > b.time || (a.time == b.time && a.seq > b.seq);
}

bool windows_overlap(double a0, double a1, double b0, double b1) { return a0 < b1 && b0 < a1; }

bool same_edge(const UnitState& a, const UnitState& b) {
  return (a.from == b.from && a.box == b.box) || (a.from == b.box && a.box == b.from);
}

std::string clock_text(double t) {
  const auto s = static_cast<long long>(std::llround(t));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", s / 3600, (s / 60) % 60, s % 60);
  return buf;
}

struct Leaf {
  double x = 0.0;
  double blue_final = 0.0;
  double red_final = 0.0;
  int illegal = 0;
  std::vector<Decision> decisions;
  std::optional<SituationState> final_state;
};

struct BranchPoint {
  int box = 0;
  std::vector<int> units;
};

}  // namespace

void SituationState::push(Event e) {
  e.seq = next_seq_++;
  queue_.push_back(e);
  std::push_heap(queue_.begin(), queue_.end(), later);
}

Event SituationState::pop() {
  std::pop_heap(queue_.begin(), queue_.end(), later);
  Event e = queue_.back();
  queue_.pop_back();
  clock = e.time;
  return e;
}

double travel_time(double distance_m, double speed_mps) {
  if (!(speed_mps > 0.0)) throw std::invalid_argument("speed must be positive");
  return distance_m / speed_mps;
}

double valuation(double blue_final, double red_final, int illegal_moves, const SimOptions& opt) {
  return (1.0 + opt.beta) * red_final - opt.alpha * blue_final + opt.illegal_penalty * illegal_moves;
}

double valuation_with_initials(double blue_initial, double blue_final, double red_initial,
                               double red_final, int illegal_moves, const SimOptions& opt) {
  return red_final + opt.alpha * (blue_initial - blue_final) - opt.beta * (red_initial - red_final) +
         opt.illegal_penalty * illegal_moves;
}

std::vector<Configuration> enumerate_regroupings(std::size_t units, int box_count, int current_box,
                                                 Rng& rng, int regroup_factor) {
  std::vector<Configuration> out;
  if (units == 0) return out;
  std::vector<int> options;
  for (int b = 1; b <= box_count; ++b) {
    if (b != current_box) options.push_back(b);
  }
  if (options.empty()) return out;
  const std::size_t cap = static_cast<std::size_t>(std::max(regroup_factor, 0)) * units;
  if (cap == 0) return out;

  // Count the full space, stopping once it exceeds the cap.
  std::size_t total = 1;
  for (std::size_t i = 0; i < units && total <= cap; ++i) total *= options.size();

  if (total <= cap) {
    std::vector<std::size_t> digit(units, 0);
    while (true) {
      Configuration c;
      c.assignment.reserve(units);
      for (auto d : digit) c.assignment.push_back(options[d]);
      out.push_back(std::move(c));
      std::size_t pos = units;
      while (pos > 0) {
        --pos;
        if (++digit[pos] < options.size()) break;
        digit[pos] = 0;
        if (pos == 0) return out;
      }
    }
  }

  std::set<std::vector<int>> seen;
  std::vector<std::size_t> order(units);
  const std::size_t max_attempts = cap * 50;
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < cap; ++attempt) {
    for (std::size_t i = 0; i < units; ++i) order[i] = i;
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<int> assign(units, 0);
    std::size_t i = 0;
    while (i < units) {
      const auto left = static_cast<std::int64_t>(units - i);
      const auto group = static_cast<std::size_t>(rng.uniform_int(1, left));
      const int dest = options[rng.index(options.size())];
      for (std::size_t j = i; j < i + group; ++j) assign[order[j]] = dest;
      i += group;
    }
    if (seen.insert(assign).second) out.push_back(Configuration{std::move(assign), std::nullopt});
  }
  return out;
}

Simulator::Simulator(const Scenario& scenario, std::vector<const UnitTypeSpec*> blue_slots, SimOptions options)
    : scenario_(&scenario), blue_slots_(std::move(blue_slots)), options_(options) {
  if (blue_slots_.size() + scenario.red_force.size() > kMaxUnits) {
    throw std::invalid_argument("at most 64 platoons per simulation");
  }
  for (const auto* s : blue_slots_) {
    if (!s) throw std::invalid_argument("null blue unit type");
  }
}

double Simulator::blue_value(const SituationState& state) const {
  double v = 0.0;
  for (int u = 0; u < state.blue_count; ++u) {
    const auto& us = state.units[static_cast<std::size_t>(u)];
    if (us.platoon.active()) v += us.value * us.platoon.rel;
  }
  return v;
}

double Simulator::red_value(const SituationState& state) const {
  double v = 0.0;
  for (std::size_t u = static_cast<std::size_t>(state.blue_count); u < state.units.size(); ++u) {
    const auto& us = state.units[u];
    if (us.platoon.active()) v += us.value * us.platoon.rel;
  }
  return v;
}

SituationState Simulator::init_state(const Configuration& config) const {
  const auto& graph = scenario_->graph;
  validate_configuration(config, graph, blue_slots_.size());
  SituationState s;
  s.blue_count = static_cast<int>(blue_slots_.size());
  s.combats.assign(static_cast<std::size_t>(graph.box_count()), CombatState{});

  std::map<std::string, int> per_label;
  for (std::size_t i = 0; i < blue_slots_.size(); ++i) {
    UnitState u;
    u.platoon = {static_cast<int>(i + 1), Side::Blue, blue_slots_[i], 1.0, PlatoonStatus::Active};
    const std::string kind = platoon_label(*blue_slots_[i]);
    u.label = kind + " " + std::to_string(++per_label[kind]);
    u.value = platoon_value(*blue_slots_[i]);
    u.armor = is_armor(*blue_slots_[i]);
    u.dest = config.assignment[i];
    s.units.push_back(std::move(u));
  }
  for (std::size_t j = 0; j < scenario_->red_force.size(); ++j) {
    UnitState u;
    u.platoon = scenario_->red_force[j];
    u.platoon.rel = 1.0;
    u.platoon.status = PlatoonStatus::Active;
    u.label = "R" + std::to_string(j + 1);
    u.value = platoon_value(*u.platoon.spec);
    u.armor = is_armor(*u.platoon.spec);
    s.units.push_back(std::move(u));
  }

  const auto& ep = graph.entry_points().at(static_cast<std::size_t>(scenario_->blue_entry));
  const double first_leg = travel_time(ep.road_m, scenario_->blue_speed_mps);
  for (int u = 0; u < s.blue_count; ++u) {
    auto& us = s.units[static_cast<std::size_t>(u)];
    us.place = Place::Transit;
    us.from = 0;
    us.box = ep.connects_to;
    us.depart_s = 0.0;
    us.arrive_s = first_leg;
    s.push({EventKind::MoveToNewBox, first_leg, 0, u, ep.connects_to, 0});
  }
  for (std::size_t j = 0; j < scenario_->red_routes.size(); ++j) {
    const int u = s.blue_count + static_cast<int>(j);
    const auto& first = scenario_->red_routes[j].route.front();
    auto& us = s.units[static_cast<std::size_t>(u)];
    us.place = Place::Entry;
    us.route_pos = 0;
    us.box = first.box;
    s.push({EventKind::MoveToNewBox, first.arrival_s, 0, u, first.box, 0});
  }
  if (options_.record_log) record_frame(s, "initial deployment");
  return s;
}

void Simulator::record_event(SituationState& state, int box, const char* kind, std::uint64_t mask,
                             const std::vector<double>& before) const {
  if (!options_.record_log) return;
  EventRecord r;
  r.time_s = state.clock;
  r.box = box;
  r.kind = kind;
  r.rel_before = before;
  for (std::size_t u = 0; u < state.units.size(); ++u) {
    if (mask & (std::uint64_t{1} << u)) {
      r.participants.push_back(state.units[u].label);
      r.rel_after.push_back(state.units[u].platoon.rel);
    }
  }
  state.events.push_back(std::move(r));
}

void Simulator::record_frame(SituationState& state, std::string caption) const {
  Frame f;
  f.time_s = state.clock;
  f.caption = clock_text(state.clock) + "  " + caption;
  for (const auto& us : state.units) {
    UnitView v;
    v.label = us.label;
    v.side = us.platoon.side;
    v.place = us.place;
    v.box = us.box;
    v.from = us.from;
    v.rel = us.platoon.rel;
    v.status = us.platoon.status;
    if (us.place == Place::Transit && us.arrive_s > us.depart_s) {
      v.progress = std::clamp((state.clock - us.depart_s) / (us.arrive_s - us.depart_s), 0.0, 1.0);
    }
    f.units.push_back(std::move(v));
    if (!us.platoon.active()) continue;
    if (us.platoon.side == Side::Blue) {
      ++f.blue_count;
      f.blue_value += us.value * us.platoon.rel;
    } else {
      ++f.red_count;
      f.red_value += us.value * us.platoon.rel;
    }
  }
  for (int b = 1; b <= static_cast<int>(state.combats.size()); ++b) {
    if (state.combat_at(b).active) f.combats.emplace_back(b, state.combat_at(b).typing);
  }
  state.frames.push_back(std::move(f));
}

void Simulator::discard(SituationState& state, int unit, const char* why) const {
  auto& us = state.units[static_cast<std::size_t>(unit)];
  const std::vector<double> before{us.platoon.rel};
  us.platoon.rel = 0.0;
  us.platoon.status = PlatoonStatus::Discarded;
  us.place = Place::Gone;
  ++state.illegal_moves;
  record_event(state, us.box, why, std::uint64_t{1} << unit, before);
}

bool Simulator::detect_illegal_move(const SituationState& state, int unit) const {
  const auto& us = state.units[static_cast<std::size_t>(unit)];
  if (!state.is_blue(unit) || !us.platoon.active()) return false;
  if (us.place == Place::Transit) {
    if (us.from == 0) return false;  // entry connectors carry no red traffic
    for (std::size_t r = static_cast<std::size_t>(state.blue_count); r < state.units.size(); ++r) {
      const auto& red = state.units[r];
      if (!red.platoon.active() || red.place != Place::Transit || red.from == 0) continue;
      if (same_edge(us, red) && windows_overlap(us.depart_s, us.arrive_s, red.depart_s, red.arrive_s)) return true;
    }
    return false;
  }
  if (us.place == Place::Box && us.box != us.dest) {
    if (state.combat_at(us.box).active) return true;
    for (std::size_t r = static_cast<std::size_t>(state.blue_count); r < state.units.size(); ++r) {
      const auto& red = state.units[r];
      if (red.platoon.active() && red.place == Place::Box && red.box == us.box) return true;
    }
  }
  return false;
}

void Simulator::depart_blue(SituationState& state, int unit) const {
  auto& us = state.units[static_cast<std::size_t>(unit)];
  const auto& graph = scenario_->graph;
  const int cur = us.box;
  const int next = graph.next_hop(cur, us.dest);
  us.place = Place::Transit;
  us.from = cur;
  us.box = next;
  us.depart_s = state.clock;
  us.arrive_s = state.clock + travel_time(*graph.edge_length(cur, next), scenario_->blue_speed_mps);
  if (detect_illegal_move(state, unit)) {
    discard(state, unit, "illegal_move");
    return;
  }
  state.push({EventKind::MoveToNewBox, us.arrive_s, 0, unit, next, 0});
}

void Simulator::depart_red(SituationState& state, int unit) const {
  auto& us = state.units[static_cast<std::size_t>(unit)];
  const auto& route = scenario_->red_routes[static_cast<std::size_t>(unit - state.blue_count)].route;
  const auto i = static_cast<std::size_t>(us.route_pos);
  if (i + 1 >= route.size()) {
    us.place = Place::Exited;
    record_event(state, us.box, "exit", std::uint64_t{1} << unit, {us.platoon.rel});
    return;
  }
  const auto& next = route[i + 1];
  us.place = Place::Transit;
  us.from = route[i].box;
  us.box = next.box;
  us.depart_s = state.clock;
  us.arrive_s = std::max(state.clock, next.arrival_s + us.delay_s);
  us.route_pos = static_cast<int>(i + 1);
  for (int b = 0; b < state.blue_count; ++b) {
    const auto& blue = state.units[static_cast<std::size_t>(b)];
    if (!blue.platoon.active() || blue.place != Place::Transit || blue.from == 0) continue;
    if (same_edge(us, blue) && windows_overlap(us.depart_s, us.arrive_s, blue.depart_s, blue.arrive_s)) {
      discard(state, b, "illegal_move");
    }
  }
  state.push({EventKind::MoveToNewBox, us.arrive_s, 0, unit, next.box, 0});
}

void Simulator::resolve_current(SituationState& state, int box) const {
  auto& c = state.combat_at(box);
  double bv[kMaxUnits], br[kMaxUnits], rv[kMaxUnits], rr[kMaxUnits];
  int bidx[kMaxUnits], ridx[kMaxUnits];
  std::size_t nb = 0, nr = 0;
  double b_value = 0.0, b_armor = 0.0, r_value = 0.0, r_armor = 0.0;
  for (std::size_t u = 0; u < state.units.size(); ++u) {
    const auto& us = state.units[u];
    const double v = us.value * us.platoon.rel;
    if (c.blue_mask & (std::uint64_t{1} << u)) {
      bv[nb] = us.value;
      br[nb] = us.platoon.rel;
      bidx[nb++] = static_cast<int>(u);
      b_value += v;
      if (us.armor) b_armor += v;
    } else if (c.red_mask & (std::uint64_t{1} << u)) {
      rv[nr] = us.value;
      rr[nr] = us.platoon.rel;
      ridx[nr++] = static_cast<int>(u);
      r_value += v;
      if (us.armor) r_armor += v;
    }
  }
  const auto result = run_rounds({bv, nb}, {br, nb}, {rv, nr}, {rr, nr}, c.typing, options_.combat);
  for (std::size_t i = 0; i < nb; ++i) state.units[static_cast<std::size_t>(bidx[i])].combat_end_rel = br[i];
  for (std::size_t i = 0; i < nr; ++i) state.units[static_cast<std::size_t>(ridx[i])].combat_end_rel = rr[i];
  c.winner = result.winner;
  c.rounds = result.rounds;
  c.timing = combat_timing(b_value, b_armor, r_value, r_armor, c.typing, scenario_->graph.box(box));
  c.end_s = c.start_s + c.timing.duration_s;
  ++c.version;
  state.push({EventKind::EndOfCombat, c.end_s, 0, -1, box, c.version});
}

void Simulator::start_or_join_combat(SituationState& state, int box, int unit) const {
  auto& c = state.combat_at(box);
  const double now = state.clock;
  std::vector<double> before;
  const char* kind = c.active ? "combat_interrupt" : "combat_start";
  if (!c.active) {
    const auto version = c.version;
    c = CombatState{};
    c.version = version;
    c.active = true;
    c.blue_since_s = std::numeric_limits<double>::infinity();
    c.red_since_s = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < state.units.size(); ++u) {
      const auto& us = state.units[u];
      if (!us.platoon.active() || us.place != Place::Box || us.box != box) continue;
      if (state.is_blue(static_cast<int>(u))) {
        c.blue_mask |= std::uint64_t{1} << u;
        c.blue_since_s = std::min(c.blue_since_s, us.arrived_s);
      } else {
        c.red_mask |= std::uint64_t{1} << u;
        c.red_since_s = std::min(c.red_since_s, us.arrived_s);
      }
    }
  } else {
    // Interruption: settle the fight so far pro rata, then restart merged.
    const double span = c.end_s - c.start_s;
    const double phi = span > 0.0 ? std::clamp((now - c.start_s) / span, 0.0, 1.0) : 1.0;
    if (options_.record_log) {
      BattleRecord rec{box, c.start_s, now - c.start_s, c.typing, {}, {}, {}, Winner::None, true};
      for (std::size_t u = 0; u < state.units.size(); ++u) {
        if ((c.blue_mask | c.red_mask) & (std::uint64_t{1} << u)) {
          rec.participants.push_back(state.units[u].label);
          rec.rel_before.push_back(state.units[u].combat_start_rel);
        }
      }
      for (std::size_t u = 0; u < state.units.size(); ++u) {
        if ((c.blue_mask | c.red_mask) & (std::uint64_t{1} << u)) {
          const auto& us = state.units[u];
          rec.rel_after.push_back(us.combat_start_rel + phi * (us.combat_end_rel - us.combat_start_rel));
        }
      }
      state.battle_log.push_back(std::move(rec));
    }
    for (std::size_t u = 0; u < state.units.size(); ++u) {
      if ((c.blue_mask | c.red_mask) & (std::uint64_t{1} << u)) {
        auto& us = state.units[u];
        us.platoon.rel = us.combat_start_rel + phi * (us.combat_end_rel - us.combat_start_rel);
      }
    }
    if (state.is_blue(unit)) {
      c.blue_mask |= std::uint64_t{1} << unit;
      c.blue_since_s = now;
    } else {
      c.red_mask |= std::uint64_t{1} << unit;
      c.red_since_s = now;
    }
  }
  c.start_s = now;
  c.typing = classify_engagement(c.blue_since_s, c.red_since_s, scenario_->engagement);
  for (std::size_t u = 0; u < state.units.size(); ++u) {
    if ((c.blue_mask | c.red_mask) & (std::uint64_t{1} << u)) {
      state.units[u].combat_start_rel = state.units[u].platoon.rel;
      if (options_.record_log) before.push_back(state.units[u].platoon.rel);
    }
  }
  resolve_current(state, box);
  record_event(state, box, kind, c.blue_mask | c.red_mask, before);
}

void Simulator::handle_arrival(SituationState& state, int unit, int box) const {
  auto& us = state.units[static_cast<std::size_t>(unit)];
  if (!us.platoon.active()) return;
  us.place = Place::Box;
  us.box = box;
  us.from = 0;
  us.arrived_s = state.clock;
  auto& c = state.combat_at(box);

  if (state.is_blue(unit)) {
    if (box != us.dest) {
      if (detect_illegal_move(state, unit)) {
        discard(state, unit, "illegal_move");
        return;
      }
      depart_blue(state, unit);
      return;
    }
    if (c.active) {
      start_or_join_combat(state, box, unit);
      return;
    }
    for (std::size_t r = static_cast<std::size_t>(state.blue_count); r < state.units.size(); ++r) {
      const auto& red = state.units[r];
      if (red.platoon.active() && red.place == Place::Box && red.box == box) {
        start_or_join_combat(state, box, unit);
        return;
      }
    }
    record_event(state, box, "arrive", std::uint64_t{1} << unit, {us.platoon.rel});
    return;
  }

  if (c.active) {
    start_or_join_combat(state, box, unit);
    return;
  }
  for (int b = 0; b < state.blue_count; ++b) {
    const auto& blue = state.units[static_cast<std::size_t>(b)];
    if (blue.platoon.active() && blue.place == Place::Box && blue.box == box) {
      start_or_join_combat(state, box, unit);
      return;
    }
  }
  depart_red(state, unit);
}

std::optional<std::vector<int>> Simulator::handle_end_of_combat(SituationState& state, int box) const {
  auto& c = state.combat_at(box);
  const std::uint64_t mask = c.blue_mask | c.red_mask;
  std::vector<double> before;
  std::vector<int> blue_units, red_units;
  for (std::size_t u = 0; u < state.units.size(); ++u) {
    if (!(mask & (std::uint64_t{1} << u))) continue;
    auto& us = state.units[u];
    if (options_.record_log) before.push_back(us.combat_start_rel);
    us.platoon.rel = us.combat_end_rel;
    const bool blue = state.is_blue(static_cast<int>(u));
    (blue ? blue_units : red_units).push_back(static_cast<int>(u));
    const bool lost = blue ? c.winner == Winner::Red : c.winner == Winner::Blue;
    if (lost) {
      us.platoon.rel = 0.0;
      us.platoon.status = PlatoonStatus::Eliminated;
      us.place = Place::Gone;
    }
  }
  c.active = false;
  if (options_.record_log) {
    BattleRecord rec{box, c.start_s, c.end_s - c.start_s, c.typing, {}, before, {}, c.winner, false};
    for (std::size_t u = 0; u < state.units.size(); ++u) {
      if (mask & (std::uint64_t{1} << u)) {
        rec.participants.push_back(state.units[u].label);
        rec.rel_after.push_back(state.units[u].platoon.rel);
      }
    }
    state.battle_log.push_back(std::move(rec));
  }
  record_event(state, box, "combat_end", mask, before);

  if (c.winner == Winner::Red) {
    for (int u : red_units) {
      auto& us = state.units[static_cast<std::size_t>(u)];
      const auto& route = scenario_->red_routes[static_cast<std::size_t>(u - state.blue_count)].route;
      us.delay_s = std::max(us.delay_s, state.clock - route[static_cast<std::size_t>(us.route_pos)].arrival_s);
      depart_red(state, u);
    }
    return std::nullopt;
  }
  return blue_units;
}

void Simulator::apply_regrouping(SituationState& state, int box, const std::vector<int>& units,
                                 const std::vector<int>& destinations) const {
  if (units.size() != destinations.size()) throw std::invalid_argument("regrouping size mismatch");
  std::uint64_t mask = 0;
  std::vector<double> before;
  for (std::size_t i = 0; i < units.size(); ++i) {
    auto& us = state.units[static_cast<std::size_t>(units[i])];
    if (!us.platoon.active() || us.place != Place::Box || us.box != box) {
      throw std::logic_error("regrouped unit is not standing in the box");
    }
    mask |= std::uint64_t{1} << units[i];
    before.push_back(us.platoon.rel);
  }
  record_event(state, box, "regroup", mask, before);
  for (std::size_t i = 0; i < units.size(); ++i) {
    auto& us = state.units[static_cast<std::size_t>(units[i])];
    us.dest = destinations[i];
    if (us.dest != box) depart_blue(state, units[i]);
  }
}

/// One depth-first exploration of a simulation's branches.
class Rollout {
 public:
  Rollout(const Simulator& sim, std::uint64_t seed) : sim_(sim), rng_(seed) {}

  const std::vector<Decision>* script = nullptr;
  bool keep_state = false;
  std::size_t leaves = 0;
  bool truncated = false;

  Leaf explore(SituationState s) {
    const auto& opt = sim_.options_;
    while (true) {
      auto bp = advance(s);
      if (!bp) {
        ++leaves;
        Leaf leaf;
        leaf.blue_final = sim_.blue_value(s);
        leaf.red_final = sim_.red_value(s);
        leaf.illegal = s.illegal_moves;
        leaf.x = valuation(leaf.blue_final, leaf.red_final, leaf.illegal, opt);
        if (keep_state) leaf.final_state = std::move(s);
        return leaf;
      }
      if (script) {
        if (script_pos_ >= script->size()) throw std::logic_error("replay ran out of decisions");
        const Decision& d = (*script)[script_pos_++];
        if (d.box != bp->box || d.units != bp->units) throw std::logic_error("replay diverged");
        sim_.apply_regrouping(s, d.box, d.units, d.destinations);
        if (opt.record_log) sim_.record_frame(s, "regrouping after victory in box " + std::to_string(d.box));
        continue;
      }
      const auto alts = enumerate_regroupings(bp->units.size(), sim_.scenario_->graph.box_count(), bp->box,
                                              rng_, opt.regroup_factor);
      if (alts.empty()) continue;
      std::optional<Leaf> best;
      for (std::size_t i = 0; i < alts.size(); ++i) {
        if (i > 0 && leaves >= opt.rollout_budget) {
          truncated = true;
          break;
        }
        SituationState child = s;
        sim_.apply_regrouping(child, bp->box, bp->units, alts[i].assignment);
        Leaf r = explore(std::move(child));
        if (!best || r.x < best->x) {
          r.decisions.insert(r.decisions.begin(), Decision{s.clock, bp->box, bp->units, alts[i].assignment});
          best = std::move(r);
        }
      }
      return std::move(*best);
    }
  }

 private:
  std::optional<BranchPoint> advance(SituationState& s) {
    const auto& opt = sim_.options_;
    while (!s.empty()) {
      const Event e = s.pop();
      if (e.kind == EventKind::MoveToNewBox) {
        const auto& us = s.units[static_cast<std::size_t>(e.unit)];
        if (!us.platoon.active() || (us.place != Place::Transit && us.place != Place::Entry) || us.box != e.box) {
          continue;
        }
        sim_.handle_arrival(s, e.unit, e.box);
        if (opt.record_log) sim_.record_frame(s, us.label + " reaches box " + std::to_string(e.box));
        continue;
      }
      auto& c = s.combat_at(e.box);
      if (!c.active || c.version != e.version) continue;
      const EngagementTyping typing = c.typing;
      auto survivors = sim_.handle_end_of_combat(s, e.box);
      if (opt.record_log) {
        sim_.record_frame(s, std::string("combat in box ") + std::to_string(e.box) + " ends (" +
                                 typing_label(typing) + "), " + (survivors ? "blue" : "red") + " wins");
      }
      if (survivors && (opt.branching || script)) return BranchPoint{e.box, std::move(*survivors)};
    }
    return std::nullopt;
  }

  const Simulator& sim_;
  Rng rng_;
  std::size_t script_pos_ = 0;
};

SimulationResult Simulator::simulate(const Configuration& config) const {
  SimulationResult result;
  SimOptions quiet = options_;
  quiet.record_log = false;
  const Simulator search(*scenario_, blue_slots_, quiet);
  SituationState start = search.init_state(config);
  result.blue_initial = search.blue_value(start);
  result.red_initial = search.red_value(start);

  Rollout explorer(search, options_.seed);
  Leaf best = explorer.explore(std::move(start));
  result.blue_final = best.blue_final;
  result.red_final = best.red_final;
  result.illegal_moves = best.illegal;
  result.x_value = best.x;
  result.rollouts_explored = explorer.leaves;
  result.truncated = explorer.truncated;
  result.decisions = std::move(best.decisions);

  if (options_.record_log) {
    Rollout replay(*this, options_.seed);
    replay.script = &result.decisions;
    replay.keep_state = true;
    Leaf line = replay.explore(init_state(config));
    auto& fs = *line.final_state;
    result.battle_log = std::move(fs.battle_log);
    result.events = std::move(fs.events);
    result.frames = std::move(fs.frames);
  }
  return result;
}

SimulationResult simulate(const Configuration& config, const Scenario& scenario, const SimOptions& options) {
  const Simulator sim(scenario, compose_blue_force(scenario, static_cast<int>(config.assignment.size())), options);
  return sim.simulate(config);
}

std::string event_log_ndjson(const std::vector<EventRecord>& events) {
  std::string out;
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    j["time_s"] = e.time_s;
    j["box"] = e.box;
    j["kind"] = e.kind;
    j["participants"] = e.participants;
    j["rel_before"] = e.rel_before;
    j["rel_after"] = e.rel_after;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace coa

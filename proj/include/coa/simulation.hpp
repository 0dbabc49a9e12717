#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coa/combat.hpp"
#include "coa/random.hpp"
#include "coa/scenario.hpp"

namespace coa {

struct SimOptions {
  std::uint64_t seed = 1;
  /// Roll out regrouping alternatives after every blue victory.
  bool branching = true;
  /// Completed rollouts allowed per top-level simulate() call.
  std::size_t rollout_budget = 10000;
  /// Alternatives per blue victory: at most regroup_factor * survivors.
  int regroup_factor = 40;
  double alpha = 0.2;
  double beta = 0.1;
  /// Added to x_value for every blue platoon discarded for an illegal move.
  double illegal_penalty = 10.0;
  /// Produce battle log, event records and frames (by replaying the chosen line).
  bool record_log = false;
  CombatParams combat;
};

enum class EventKind : std::uint8_t { MoveToNewBox, EndOfCombat };

struct Event {
  EventKind kind = EventKind::MoveToNewBox;
  double time = 0.0;
  std::uint64_t seq = 0;  // FIFO order among equal times
  int unit = -1;
  int box = 0;
  std::uint32_t version = 0;
};

enum class Place : std::uint8_t { Entry, Box, Transit, Exited, Gone };

struct UnitState {
  Platoon platoon;
  std::string label;
  double value = 0.0;  // platoon_value of its unit type
  bool armor = false;
  Place place = Place::Entry;
  int box = 0;   // current box, or target box while in transit
  int from = 0;  // origin box while in transit, 0 when coming from off the graph
  double depart_s = 0.0;
  double arrive_s = 0.0;
  double arrived_s = 0.0;  // arrival time at the current box
  int dest = 0;            // blue destination box
  int route_pos = 0;       // red: index of the current waypoint
  double delay_s = 0.0;    // red: accumulated timetable slip
  double combat_start_rel = 0.0;
  double combat_end_rel = 0.0;
};

struct CombatState {
  bool active = false;
  double start_s = 0.0;
  double end_s = 0.0;
  double blue_since_s = 0.0;
  double red_since_s = 0.0;
  EngagementTyping typing;
  CombatTiming timing;
  std::uint64_t blue_mask = 0;
  std::uint64_t red_mask = 0;
  std::uint32_t version = 0;
  int rounds = 0;
  Winner winner = Winner::None;
};

struct BattleRecord {
  int box = 0;
  double start_s = 0.0;
  double duration_s = 0.0;
  EngagementTyping typing;
  std::vector<std::string> participants;
  std::vector<double> rel_before;
  std::vector<double> rel_after;
  Winner outcome = Winner::None;
  bool interrupted = false;
};

/// One line of the exported event log.
struct EventRecord {
  double time_s = 0.0;
  int box = 0;
  std::string kind;
  std::vector<std::string> participants;
  std::vector<double> rel_before;
  std::vector<double> rel_after;
};

struct UnitView {
  std::string label;
  Side side = Side::Blue;
  Place place = Place::Entry;
  int box = 0;
  int from = 0;
  double progress = 0.0;  // along the edge while in transit
  double rel = 1.0;
  PlatoonStatus status = PlatoonStatus::Active;
};

/// State picture after one processed event.
struct Frame {
  double time_s = 0.0;
  std::string caption;
  std::vector<UnitView> units;
  std::vector<std::pair<int, EngagementTyping>> combats;
  double blue_value = 0.0;
  double red_value = 0.0;
  int blue_count = 0;
  int red_count = 0;
};

/// Regrouping adopted after a blue victory.
struct Decision {
  double time_s = 0.0;
  int box = 0;
  std::vector<int> units;
  std::vector<int> destinations;
};

class SituationState {
 public:
  double clock = 0.0;
  std::vector<UnitState> units;      // blue first, then red
  std::vector<CombatState> combats;  // index box - 1
  int blue_count = 0;
  int illegal_moves = 0;
  std::vector<BattleRecord> battle_log;
  std::vector<EventRecord> events;
  std::vector<Frame> frames;

  void push(Event e);
  bool empty() const { return queue_.empty(); }
  std::size_t queued() const { return queue_.size(); }
  /// Earliest event (FIFO among equal times). Advances the clock.
  Event pop();
  const std::vector<Event>& queue() const { return queue_; }

  bool is_blue(int unit) const { return unit < blue_count; }
  CombatState& combat_at(int box) { return combats[static_cast<std::size_t>(box - 1)]; }
  const CombatState& combat_at(int box) const { return combats[static_cast<std::size_t>(box - 1)]; }

 private:
  std::vector<Event> queue_;
  std::uint64_t next_seq_ = 0;
};

struct SimulationResult {
  double blue_initial = 0.0;
  double red_initial = 0.0;
  double blue_final = 0.0;
  double red_final = 0.0;
  double x_value = 0.0;
  int illegal_moves = 0;
  std::size_t rollouts_explored = 0;
  bool truncated = false;
  std::vector<Decision> decisions;
  std::vector<BattleRecord> battle_log;
  std::vector<EventRecord> events;
  std::vector<Frame> frames;
};

double travel_time(double distance_m, double speed_mps);

/// x_value = (1 + beta) * red_final - alpha * blue_final + penalty * illegal_moves.
double valuation(double blue_final, double red_final, int illegal_moves, const SimOptions& opt = {});

/// The unsimplified form that also carries the initial values; it differs
/// from valuation() by alpha * blue_initial - beta * red_initial.
double valuation_with_initials(double blue_initial, double blue_final, double red_initial,
                               double red_final, int illegal_moves, const SimOptions& opt = {});

/// Up to regroup_factor * |units| distinct regroupings of the units standing in
/// `current_box`. Each is built by splitting the shuffled units into groups of
/// uniformly drawn size and sending every group to a uniformly drawn other box.
/// When every combination fits under the cap, all are listed in order.
std::vector<Configuration> enumerate_regroupings(std::size_t units, int box_count, int current_box,
                                                 Rng& rng, int regroup_factor = 40);

/// Event-driven simulator of one scenario. Stateless apart from the scenario
/// reference and options; each call works on the state it is given.
class Simulator {
 public:
  Simulator(const Scenario& scenario, std::vector<const UnitTypeSpec*> blue_slots, SimOptions options = {});

  const Scenario& scenario() const { return *scenario_; }
  const SimOptions& options() const { return options_; }
  std::size_t slots() const { return blue_slots_.size(); }

  /// Blue at the entry point moving toward its boxes, red scheduled to its
  /// first waypoint.
  SituationState init_state(const Configuration& config) const;

  /// Processes the arrival of `unit` in `box` at the state clock.
  void handle_arrival(SituationState& state, int unit, int box) const;

  /// Processes an end-of-combat event. Returns the surviving blue units when
  /// blue won, which is where alternatives branch.
  std::optional<std::vector<int>> handle_end_of_combat(SituationState& state, int box) const;

  /// True when blue `unit` overlaps red on its current edge, or stands in a
  /// box short of its destination where fighting is going on.
  bool detect_illegal_move(const SituationState& state, int unit) const;

  /// Sends `units` (all in `box`) toward their new destinations.
  void apply_regrouping(SituationState& state, int box, const std::vector<int>& units,
                        const std::vector<int>& destinations) const;

  double blue_value(const SituationState& state) const;
  double red_value(const SituationState& state) const;

  SimulationResult simulate(const Configuration& config) const;

 private:
  friend class Rollout;

  void discard(SituationState& state, int unit, const char* why) const;
  void depart_blue(SituationState& state, int unit) const;
  void depart_red(SituationState& state, int unit) const;
  void start_or_join_combat(SituationState& state, int box, int unit) const;
  void resolve_current(SituationState& state, int box) const;
  void record_event(SituationState& state, int box, const char* kind, std::uint64_t mask,
                    const std::vector<double>& before) const;
  void record_frame(SituationState& state, std::string caption) const;

  const Scenario* scenario_;
  std::vector<const UnitTypeSpec*> blue_slots_;
  SimOptions options_;
};

/// Convenience wrapper: composes the blue force from the roster.
SimulationResult simulate(const Configuration& config, const Scenario& scenario, const SimOptions& options = {});

/// Newline-delimited JSON, one object per event record.
std::string event_log_ndjson(const std::vector<EventRecord>& events);

}  // namespace coa

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coa {

enum class Side : std::uint8_t { Blue, Red };

const char* side_name(Side side);

/// Thrown for malformed or inconsistent scenario and catalog input.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One row of a unit-type catalog. `combatv` is the battalion-scale combat
/// value (1.0 = a fully capable armored battalion) and `size` the number of
/// battalions the row describes.
struct UnitTypeSpec {
  Side side = Side::Blue;
  int type_id = 0;
  std::string text;
  double combatv = 0.0;
  double size = 1.0;
};

/// Built-in catalogs. They are the reference data; CSV catalogs are checked
/// against them.
const std::vector<UnitTypeSpec>& blue_catalog();
const std::vector<UnitTypeSpec>& red_catalog();
const std::vector<UnitTypeSpec>& catalog(Side side);

/// Looks up a type in the built-in catalog of `side`. Throws ScenarioError.
const UnitTypeSpec& find_unit_type(Side side, int type_id);

/// Parses a catalog CSV (type,text,combatv,size with a header row).
std::vector<UnitTypeSpec> load_catalog_csv(const std::filesystem::path& path, Side side);

/// Tank and armor battalions.
bool is_armor(const UnitTypeSpec& spec);

/// Short display label used in reports: "TP" for tank platoons, "AIP" otherwise.
std::string platoon_label(const UnitTypeSpec& spec);

enum class PlatoonStatus : std::uint8_t { Active, Eliminated, Discarded };

struct Platoon {
  int id = 0;
  Side side = Side::Blue;
  const UnitTypeSpec* spec = nullptr;
  double rel = 1.0;
  PlatoonStatus status = PlatoonStatus::Active;

  bool active() const { return status == PlatoonStatus::Active; }
};

struct BoxNode {
  int id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double area_m2 = 0.0;

  double boxlength_m() const;
};

struct Edge {
  int a = 0;
  int b = 0;
  double road_m = 0.0;
};

/// Off-graph position with a one-way connector into the box graph.
struct EntryPoint {
  std::string name;
  double x_m = 0.0;
  double y_m = 0.0;
  int connects_to = 0;
  double road_m = 0.0;
};

/// Either a box of the graph or an off-graph entry point.
struct Position {
  int box = 0;
  int entry = -1;

  static Position at_box(int id) { return {id, -1}; }
  static Position at_entry(int index) { return {0, index}; }
  bool is_entry() const { return entry >= 0; }
};

struct Route {
  std::vector<int> boxes;
  double distance_m = 0.0;
};

/// Boxes are numbered 1..N. All-pairs road distances and next hops are
/// computed once at construction, so the graph is immutable afterwards.
class BattleGraph {
 public:
  BattleGraph() = default;
  BattleGraph(std::vector<BoxNode> nodes, std::vector<Edge> edges,
              std::vector<EntryPoint> entry_points);

  int box_count() const { return static_cast<int>(nodes_.size()); }
  bool has_box(int id) const { return id >= 1 && id <= box_count(); }
  const BoxNode& box(int id) const { return nodes_.at(static_cast<std::size_t>(id - 1)); }
  const std::vector<BoxNode>& boxes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<EntryPoint>& entry_points() const { return entries_; }

  /// Road length of the direct edge, if any.
  std::optional<double> edge_length(int a, int b) const;
  bool adjacent(int a, int b) const { return edge_length(a, b).has_value(); }
  std::vector<int> neighbors(int id) const;

  /// Shortest road distance between boxes; infinity when unreachable.
  double distance(int from, int to) const;
  /// First box after `from` on the canonical shortest path to `to`.
  int next_hop(int from, int to) const;
  /// Straight-line distance between box centers.
  double center_distance(int a, int b) const;

 private:
  std::vector<BoxNode> nodes_;
  std::vector<Edge> edges_;
  std::vector<EntryPoint> entries_;
  std::vector<double> adjacency_;  // n*n, 0 where no edge
  std::vector<double> dist_;       // n*n
  std::vector<int> next_;          // n*n, 0 where unreachable
};

/// Shortest road path; ties resolved toward the smallest next box id.
/// The returned box list starts at `from` when it is a box, or at the entry's
/// connector box when it is an entry point.
Route shortest_path(const BattleGraph& graph, Position from, int to);

struct Waypoint {
  int box = 0;
  double arrival_s = 0.0;
};

struct RedItinerary {
  int platoon_id = 0;
  std::vector<Waypoint> route;
};

struct EngagementParams {
  double t_meet_s = 600.0;
  double t_hasty_s = 3600.0;
};

struct RosterEntry {
  const UnitTypeSpec* spec = nullptr;
  int count = 0;
};

inline constexpr double kDefaultBlueSpeedMps = 30000.0 / 3600.0;

struct Scenario {
  std::string name;
  BattleGraph graph;
  std::vector<Platoon> red_force;
  std::vector<RedItinerary> red_routes;  // parallel to red_force
  std::vector<RosterEntry> blue_roster;
  EngagementParams engagement;
  double blue_speed_mps = kDefaultBlueSpeedMps;
  int blue_entry = 0;  // index into graph.entry_points()

  int roster_size() const;
};

Scenario parse_scenario(const std::string& json_text, const std::string& source = "<memory>");
Scenario load_scenario(const std::filesystem::path& path);

/// Blue platoon slots for an `n`-platoon force drawn from the roster. The
/// tank share follows the red force's tank share (rounded), infantry first.
std::vector<const UnitTypeSpec*> compose_blue_force(const Scenario& scenario, int n);

/// One box id per blue platoon slot; `value` is the evaluated objective.
struct Configuration {
  std::vector<int> assignment;
  std::optional<double> value;

  bool operator==(const Configuration& other) const { return assignment == other.assignment; }
};

/// Throws ScenarioError when an entry is not a box of `graph` or the length
/// differs from `slots`.
void validate_configuration(const Configuration& config, const BattleGraph& graph,
                            std::size_t slots);

}  // namespace coa

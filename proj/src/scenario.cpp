#include "coa/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "coa/csv.hpp"

namespace coa {
namespace {

using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<UnitTypeSpec> kBlueCatalog = {
    {Side::Blue, 1, "Infantry Bn (M113)", 0.71, 1},
    {Side::Blue, 2, "Infantry Bn (M2)", 1, 1},
    {Side::Blue, 3, "Infantry Bn (Light)", 0.48, 1},
    {Side::Blue, 4, "Infantry Bn (Airborne/Air Assault)", 0.7, 1},
    {Side::Blue, 5, "Separate Brigade (Armored)", 5.3, 3},
    {Side::Blue, 6, "Separate Brigade (Mech)", 4.7, 3},
    {Side::Blue, 7, "Separate Brigade (Light)", 3.1, 3},
    {Side::Blue, 8, "Armor Bn (M1A1)", 1.19, 1},
    {Side::Blue, 9, "Armor Bn (M1A2)", 1.3, 1},
    {Side::Blue, 10, "Armored Cav Regiment", 7.6, 3},
    {Side::Blue, 11, "Armored Cav Squadron", 2.2, 1},
    {Side::Blue, 12, "Regimental Aviation Squadron", 0.91, 1},
    {Side::Blue, 13, "Cav Troop (Ground)", 0.5, 0.25},
    {Side::Blue, 14, "105(T) Bn (M102)", 0.8, 1},
    {Side::Blue, 15, "105(T) Bn (M119)", 0.8, 1},
    {Side::Blue, 16, "155(SP) Bn (M109A5)", 1, 1},
    {Side::Blue, 17, "155(SP) Bn (M109A6) (Paladin)", 1.5, 1},
    {Side::Blue, 18, "155(T) Bn (M198)", 0.8, 1},
    {Side::Blue, 19, "MLRS Bn", 4.5, 1},
    {Side::Blue, 20, "ATACMS Bn (B2)", 7.5, 1},
    {Side::Blue, 21, "ATACMS Bn (B1)", 8.8, 1},
    {Side::Blue, 22, "Div Cav Squadron (AASLT, Abn, Lt Div)", 0.7, 1},
    {Side::Blue, 23, "Div Cav Squadron (Heavy Div)", 3.8, 1},
    {Side::Blue, 24, "Atk Helo Bn (24xOH58D)", 2.1, 1},
    {Side::Blue, 25, "Atk Helo Bn (24xAH64)", 4.5, 1},
    {Side::Blue, 26, "ADA Bn (Avenger)", 0.21, 1},
    {Side::Blue, 27, "Patriot Bn", 0.59, 1},
    {Side::Blue, 28, "Infantry Bn", 0.8, 1},
    {Side::Blue, 29, "Tank Co", 0.3, 0.25},
    {Side::Blue, 30, "LAV Co", 0.2, 0.25},
    {Side::Blue, 31, "AAV Co", 0.2, 0.25},
    {Side::Blue, 32, "FA Bn", 1.5, 0.25},
    {Side::Blue, 33, "AH-1 Co", 1, 0.25},
    {Side::Blue, 34, "MEF (Fwd)", 5.6, 16},
};

const std::vector<UnitTypeSpec> kRedCatalog = {
    {Side::Red, 1, "Infantry Bn (BTR-50 / 60)", 0.29, 1},
    {Side::Red, 2, "Infantry Bn (BTR-70 / 80)", 0.36, 1},
    {Side::Red, 3, "Infantry Bn (BMP-1 / 2)", 0.51, 1},
    {Side::Red, 4, "Infantry Bn (BMP-3)", 0.65, 1},
    {Side::Red, 5, "Infantry Bn (Light / Air Assault)", 0.35, 1},
    {Side::Red, 6, "Infantry Bn (Airborne)", 0.5, 1},
    {Side::Red, 7, "Recon Bn", 0.2, 1},
    {Side::Red, 8, "AT Bn", 0.45, 1},
    {Side::Red, 9, "AT Bn (AT Bde / Div)", 0.45, 1},
    {Side::Red, 10, "AT Bn (IMIBn / AT Regt)", 0.5, 1},
    {Side::Red, 11, "Tank Bn (MIB 40xT55)", 0.77, 1},
    {Side::Red, 12, "Tank Bn (MIB 40xT62)", 0.77, 1},
    {Side::Red, 13, "Tank Bn (MIB 40xT64 / T72)", 0.89, 1},
    {Side::Red, 14, "Tank Bn (MIB 40xT80)", 1, 1},
    {Side::Red, 15, "Tank Bn (TR 31xT55 / T62)", 0.6, 1},
    {Side::Red, 16, "Tank Bn (TR 31xT64 / T72)", 0.69, 1},
    {Side::Red, 17, "Tank Bn (TR 31xT80)", 0.78, 1},
    {Side::Red, 18, "Indep Tank Bn (51xT55)", 0.98, 1},
    {Side::Red, 19, "Indep Tank Bn (51xT62)", 0.98, 1},
    {Side::Red, 20, "Indep Tank Bn (51xT64 / T72)", 1.13, 1},
    {Side::Red, 21, "Indep Tank Bn (51xT80)", 1.28, 1},
    {Side::Red, 22, "2A36 Bn", 0.75, 1},
    {Side::Red, 23, "2A65 Bn", 0.75, 1},
    {Side::Red, 24, "2S1 Bn", 0.9, 1},
    {Side::Red, 25, "2S3 Bn", 1.05, 1},
    {Side::Red, 26, "2S4 Bn", 0.45, 1},
    {Side::Red, 27, "2S5 Bn", 1.13, 1},
    {Side::Red, 28, "2S7 Bn", 1.28, 1},
    {Side::Red, 29, "2S9 Bn", 0.6, 1},
    {Side::Red, 30, "2S19 / 23 Bn", 1.35, 1},
    {Side::Red, 31, "9A52 Bn", 3.6, 1},
    {Side::Red, 32, "BM 21 Bn", 3.15, 1},
    {Side::Red, 33, "BM 21V Bn", 1.04, 1},
    {Side::Red, 34, "9P140 Bn", 3.6, 1},
    {Side::Red, 35, "BM 24 Bn", 3.6, 1},
    {Side::Red, 36, "D20 Bn", 0.77, 1},
    {Side::Red, 37, "D30 Bn", 0.63, 1},
    {Side::Red, 38, "FROG Bn", 0.22, 1},
    {Side::Red, 39, "M46 Bn", 0.78, 1},
    {Side::Red, 40, "M240 Bn", 0.4, 1},
    {Side::Red, 41, "SCUD Bn", 0.8, 1},
    {Side::Red, 42, "SCUD-B Bn", 0.4, 1},
    {Side::Red, 43, "SS-21 Bn", 0.6, 1},
    {Side::Red, 44, "9A51 Bn", 3.78, 1},
    {Side::Red, 45, "Hind- D Bn", 3.33, 1},
    {Side::Red, 46, "HOKUM / HAVOK Bn", 5.53, 1},
    {Side::Red, 47, "Hind-E Bn", 4.17, 1},
    {Side::Red, 48, "SA-4 Bn", 0.46, 1},
    {Side::Red, 49, "SA-6 / 8 Bn", 0.11, 1},
    {Side::Red, 50, "SA-11 / 12 Bn", 0.54, 1},
    {Side::Red, 51, "SA-17 Bn", 0.76, 1},
    {Side::Red, 52, "S-60 Bn", 0.34, 1},
};

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  const std::size_t end = text.find('\n', line_start);
  std::ostringstream os;
  os << "line " << line << ": "
     << text.substr(line_start, end == std::string::npos ? std::string::npos : end - line_start);
  return os.str();
}

template <typename T>
T get_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ScenarioError(where + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ScenarioError(where + ": field '" + key + "' has the wrong type");
  }
}

const json& get_array(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_array()) {
    throw ScenarioError(std::string("missing array '") + key + "'");
  }
  return doc.at(key);
}

}  // namespace

const char* side_name(Side side) { return side == Side::Blue ? "blue" : "red"; }

const std::vector<UnitTypeSpec>& blue_catalog() { return kBlueCatalog; }
const std::vector<UnitTypeSpec>& red_catalog() { return kRedCatalog; }
const std::vector<UnitTypeSpec>& catalog(Side side) {
  return side == Side::Blue ? kBlueCatalog : kRedCatalog;
}

const UnitTypeSpec& find_unit_type(Side side, int type_id) {
  for (const auto& spec : catalog(side)) {
    if (spec.type_id == type_id) return spec;
  }
  throw ScenarioError(std::string("unknown ") + side_name(side) + " type_id " +
                      std::to_string(type_id));
}

std::vector<UnitTypeSpec> load_catalog_csv(const std::filesystem::path& path, Side side) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::read_file(path);
  } catch (const std::exception& e) {
    throw ScenarioError(e.what());
  }
  if (rows.empty()) throw ScenarioError(path.string() + ": empty catalog");
  std::vector<UnitTypeSpec> out;
  std::set<int> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = path.filename().string() + " row " + std::to_string(i + 1);
    if (r.size() != 4) throw ScenarioError(where + ": expected 4 columns");
    UnitTypeSpec spec;
    spec.side = side;
    try {
      spec.type_id = csv::to_int(r[0], where);
      spec.text = r[1];
      spec.combatv = csv::to_double(r[2], where);
      spec.size = csv::to_double(r[3], where);
    } catch (const std::runtime_error& e) {
      throw ScenarioError(e.what());
    }
    if (!(spec.combatv > 0.0)) throw ScenarioError(where + ": combatv must be positive");
    if (spec.size != 0.25 && spec.size != 1.0 && spec.size != 3.0 && spec.size != 16.0) {
      throw ScenarioError(where + ": size must be one of 0.25, 1, 3, 16");
    }
    if (!seen.insert(spec.type_id).second) throw ScenarioError(where + ": duplicate type_id");
    out.push_back(std::move(spec));
  }
  return out;
}

bool is_armor(const UnitTypeSpec& spec) {
  return spec.text.find("Tank") != std::string::npos || spec.text.rfind("Armor Bn", 0) == 0;
}

std::string platoon_label(const UnitTypeSpec& spec) { return is_armor(spec) ? "TP" : "AIP"; }

double BoxNode::boxlength_m() const { return std::sqrt(area_m2); }

BattleGraph::BattleGraph(std::vector<BoxNode> nodes, std::vector<Edge> edges,
                         std::vector<EntryPoint> entry_points)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), entries_(std::move(entry_points)) {
  const int n = box_count();
  if (n == 0) throw ScenarioError("graph has no boxes");
  std::sort(nodes_.begin(), nodes_.end(),
            [](const BoxNode& a, const BoxNode& b) { return a.id < b.id; });
  for (int i = 0; i < n; ++i) {
    const auto& node = nodes_[static_cast<std::size_t>(i)];
    if (i > 0 && node.id == nodes_[static_cast<std::size_t>(i - 1)].id) {
      throw ScenarioError("duplicate box id " + std::to_string(node.id));
    }
    if (node.id != i + 1) throw ScenarioError("box ids must be 1..N (found " + std::to_string(node.id) + ")");
    if (!(node.area_m2 > 0.0)) {
      throw ScenarioError("box " + std::to_string(node.id) + ": area_m2 must be positive");
    }
  }
  const auto un = static_cast<std::size_t>(n);
  adjacency_.assign(un * un, 0.0);
  for (const auto& e : edges_) {
    if (!has_box(e.a) || !has_box(e.b)) {
      throw ScenarioError("edge " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                          " references an unknown box");
    }
    if (e.a == e.b) throw ScenarioError("edge " + std::to_string(e.a) + " is a self loop");
    if (!(e.road_m > 0.0)) throw ScenarioError("edge road_m must be positive");
    const auto ia = static_cast<std::size_t>(e.a - 1);
    const auto ib = static_cast<std::size_t>(e.b - 1);
    if (adjacency_[ia * un + ib] != 0.0) {
      throw ScenarioError("duplicate edge " + std::to_string(e.a) + "-" + std::to_string(e.b));
    }
    adjacency_[ia * un + ib] = e.road_m;
    adjacency_[ib * un + ia] = e.road_m;
  }
  for (const auto& ep : entries_) {
    if (!has_box(ep.connects_to)) {
      throw ScenarioError("entry point '" + ep.name + "' connects to unknown box");
    }
    if (!(ep.road_m > 0.0)) throw ScenarioError("entry point '" + ep.name + "': road_m must be positive");
  }

  // Floyd-Warshall on a handful of boxes.
  dist_.assign(un * un, kInf);
  for (std::size_t i = 0; i < un; ++i) {
    dist_[i * un + i] = 0.0;
    for (std::size_t j = 0; j < un; ++j) {
      if (adjacency_[i * un + j] > 0.0) dist_[i * un + j] = adjacency_[i * un + j];
    }
  }
  for (std::size_t k = 0; k < un; ++k) {
    for (std::size_t i = 0; i < un; ++i) {
      for (std::size_t j = 0; j < un; ++j) {
        const double via = dist_[i * un + k] + dist_[k * un + j];
        if (via < dist_[i * un + j]) dist_[i * un + j] = via;
      }
    }
  }
  for (std::size_t j = 1; j < un; ++j) {
    if (dist_[j] == kInf) throw ScenarioError("graph is not connected (box " + std::to_string(j + 1) + ")");
  }

  next_.assign(un * un, 0);
  for (std::size_t from = 0; from < un; ++from) {
    for (std::size_t to = 0; to < un; ++to) {
      if (from == to) {
        next_[from * un + to] = static_cast<int>(to + 1);
        continue;
      }
      const double target = dist_[from * un + to];
      const double tol = 1e-9 * std::max(1.0, target);
      for (std::size_t v = 0; v < un; ++v) {  // ascending id gives the tie-break
        const double w = adjacency_[from * un + v];
        if (w > 0.0 && std::abs(w + dist_[v * un + to] - target) <= tol) {
          next_[from * un + to] = static_cast<int>(v + 1);
          break;
        }
      }
    }
  }
}

std::optional<double> BattleGraph::edge_length(int a, int b) const {
  if (!has_box(a) || !has_box(b)) return std::nullopt;
  const auto un = nodes_.size();
  const double w = adjacency_[static_cast<std::size_t>(a - 1) * un + static_cast<std::size_t>(b - 1)];
  if (w > 0.0) return w;
  return std::nullopt;
}

std::vector<int> BattleGraph::neighbors(int id) const {
  std::vector<int> out;
  for (int v = 1; v <= box_count(); ++v) {
    if (adjacent(id, v)) out.push_back(v);
  }
  return out;
}

double BattleGraph::distance(int from, int to) const {
  const auto un = nodes_.size();
  return dist_.at(static_cast<std::size_t>(from - 1) * un + static_cast<std::size_t>(to - 1));
}

int BattleGraph::next_hop(int from, int to) const {
  const auto un = nodes_.size();
  return next_.at(static_cast<std::size_t>(from - 1) * un + static_cast<std::size_t>(to - 1));
}

double BattleGraph::center_distance(int a, int b) const {
  const auto& p = box(a);
  const auto& q = box(b);
  return std::hypot(p.x_m - q.x_m, p.y_m - q.y_m);
}

Route shortest_path(const BattleGraph& graph, Position from, int to) {
  if (!graph.has_box(to)) throw ScenarioError("unknown box " + std::to_string(to));
  Route route;
  int start = from.box;
  if (from.is_entry()) {
    if (from.entry >= static_cast<int>(graph.entry_points().size())) {
      throw ScenarioError("unknown entry point");
    }
    const auto& ep = graph.entry_points()[static_cast<std::size_t>(from.entry)];
    start = ep.connects_to;
    route.distance_m = ep.road_m;
  } else if (!graph.has_box(start)) {
    throw ScenarioError("unknown box " + std::to_string(start));
  }
  const double d = graph.distance(start, to);
  if (!std::isfinite(d)) throw ScenarioError("destination unreachable");
  route.distance_m += d;
  int cur = start;
  route.boxes.push_back(cur);
  while (cur != to) {
    cur = graph.next_hop(cur, to);
    route.boxes.push_back(cur);
  }
  return route;
}

int Scenario::roster_size() const {
  int total = 0;
  for (const auto& r : blue_roster) total += r.count;
  return total;
}

Scenario parse_scenario(const std::string& json_text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(source + ": parse error at " + line_context(json_text, e.byte) + " (" +
                        e.what() + ")");
  }
  if (!doc.is_object()) throw ScenarioError(source + ": top level must be an object");

  Scenario sc;
  sc.name = doc.value("name", source);

  std::vector<BoxNode> nodes;
  for (const auto& b : get_array(doc, "boxes")) {
    BoxNode node;
    node.id = get_field<int>(b, "id", "boxes");
    const std::string where = "box " + std::to_string(node.id);
    node.x_m = get_field<double>(b, "x_m", where);
    node.y_m = get_field<double>(b, "y_m", where);
    node.area_m2 = get_field<double>(b, "area_m2", where);
    nodes.push_back(node);
  }
  {
    std::set<int> ids;
    for (const auto& n : nodes) {
      if (!ids.insert(n.id).second) throw ScenarioError(source + ": duplicate box id " + std::to_string(n.id));
    }
  }
  std::vector<Edge> edges;
  for (const auto& e : get_array(doc, "edges")) {
    edges.push_back({get_field<int>(e, "a", "edges"), get_field<int>(e, "b", "edges"),
                     get_field<double>(e, "road_m", "edges")});
  }
  std::vector<EntryPoint> entries;
  if (doc.contains("entry_points")) {
    for (const auto& e : get_array(doc, "entry_points")) {
      EntryPoint ep;
      ep.name = get_field<std::string>(e, "name", "entry_points");
      const std::string where = "entry point '" + ep.name + "'";
      ep.x_m = get_field<double>(e, "x_m", where);
      ep.y_m = get_field<double>(e, "y_m", where);
      ep.connects_to = get_field<int>(e, "connects_to", where);
      ep.road_m = get_field<double>(e, "road_m", where);
      entries.push_back(std::move(ep));
    }
  }
  if (entries.empty()) throw ScenarioError(source + ": at least one entry point is required");
  try {
    sc.graph = BattleGraph(std::move(nodes), std::move(edges), std::move(entries));
  } catch (const ScenarioError& e) {
    throw ScenarioError(source + ": " + e.what());
  }
  if (doc.contains("blue_start")) {
    const auto name = get_field<std::string>(doc, "blue_start", "scenario");
    const auto& eps = sc.graph.entry_points();
    const auto it = std::find_if(eps.begin(), eps.end(), [&](const EntryPoint& ep) { return ep.name == name; });
    if (it == eps.end()) throw ScenarioError(source + ": blue_start '" + name + "' is not an entry point");
    sc.blue_entry = static_cast<int>(it - eps.begin());
  }

  int red_id = 1;
  for (const auto& r : get_array(doc, "red")) {
    const std::string where = "red platoon " + std::to_string(red_id);
    Platoon p;
    p.id = red_id;
    p.side = Side::Red;
    try {
      p.spec = &find_unit_type(Side::Red, get_field<int>(r, "type_id", where));
    } catch (const ScenarioError& e) {
      throw ScenarioError(source + ": " + where + ": " + e.what());
    }
    RedItinerary it;
    it.platoon_id = red_id;
    const auto& route = r.contains("route") ? r.at("route") : json();
    if (!route.is_array() || route.empty()) throw ScenarioError(source + ": " + where + ": route must be a non-empty array");
    for (const auto& w : route) {
      Waypoint wp{get_field<int>(w, "box", where), get_field<double>(w, "arrival_s", where)};
      if (!sc.graph.has_box(wp.box)) {
        throw ScenarioError(source + ": " + where + ": unknown box " + std::to_string(wp.box));
      }
      if (!it.route.empty()) {
        const auto& prev = it.route.back();
        if (!(wp.arrival_s > prev.arrival_s)) {
          throw ScenarioError(source + ": " + where + ": arrival times must be strictly increasing");
        }
        if (!sc.graph.adjacent(prev.box, wp.box)) {
          throw ScenarioError(source + ": " + where + ": boxes " + std::to_string(prev.box) + " and " +
                              std::to_string(wp.box) + " are not adjacent");
        }
      }
      it.route.push_back(wp);
    }
    sc.red_force.push_back(p);
    sc.red_routes.push_back(std::move(it));
    ++red_id;
  }

  for (const auto& r : get_array(doc, "blue_roster")) {
    RosterEntry entry;
    try {
      entry.spec = &find_unit_type(Side::Blue, get_field<int>(r, "type_id", "blue_roster"));
    } catch (const ScenarioError& e) {
      throw ScenarioError(source + ": blue_roster: " + e.what());
    }
    entry.count = get_field<int>(r, "count", "blue_roster");
    if (entry.count < 0) throw ScenarioError(source + ": blue_roster: count must be non-negative");
    sc.blue_roster.push_back(entry);
  }
  const int roster = sc.roster_size();
  if (roster < 1 || roster > 16) {
    throw ScenarioError(source + ": blue_roster count must be within [1,16], got " + std::to_string(roster));
  }

  if (doc.contains("params")) {
    const auto& p = doc.at("params");
    sc.engagement.t_meet_s = p.value("t_meet_s", sc.engagement.t_meet_s);
    sc.engagement.t_hasty_s = p.value("t_hasty_s", sc.engagement.t_hasty_s);
    sc.blue_speed_mps = p.value("blue_speed_mps", sc.blue_speed_mps);
  }
  if (!(sc.engagement.t_meet_s >= 0.0) || !(sc.engagement.t_hasty_s >= sc.engagement.t_meet_s)) {
    throw ScenarioError(source + ": params: need 0 <= t_meet_s <= t_hasty_s");
  }
  if (!(sc.blue_speed_mps > 0.0)) throw ScenarioError(source + ": params: blue_speed_mps must be positive");
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.filename().string());
}

std::vector<const UnitTypeSpec*> compose_blue_force(const Scenario& scenario, int n) {
  const int roster = scenario.roster_size();
  if (n < 0 || n > roster) {
    throw ScenarioError("platoon count " + std::to_string(n) + " outside roster size " + std::to_string(roster));
  }
  int red_tanks = 0;
  for (const auto& p : scenario.red_force) red_tanks += is_armor(*p.spec) ? 1 : 0;
  const double share = scenario.red_force.empty()
                           ? 0.0
                           : static_cast<double>(red_tanks) / static_cast<double>(scenario.red_force.size());
  int tanks_avail = 0;
  for (const auto& r : scenario.blue_roster) tanks_avail += is_armor(*r.spec) ? r.count : 0;
  const int other_avail = roster - tanks_avail;
  int tanks = static_cast<int>(std::lround(share * n));
  tanks = std::clamp(tanks, std::max(0, n - other_avail), std::min(n, tanks_avail));

  std::vector<const UnitTypeSpec*> slots;
  int want_other = n - tanks;
  for (const auto& r : scenario.blue_roster) {
    if (is_armor(*r.spec)) continue;
    for (int i = 0; i < r.count && want_other > 0; ++i, --want_other) slots.push_back(r.spec);
  }
  int want_tanks = tanks;
  for (const auto& r : scenario.blue_roster) {
    if (!is_armor(*r.spec)) continue;
    for (int i = 0; i < r.count && want_tanks > 0; ++i, --want_tanks) slots.push_back(r.spec);
  }
  return slots;
}

void validate_configuration(const Configuration& config, const BattleGraph& graph, std::size_t slots) {
  if (config.assignment.size() != slots) {
    throw ScenarioError("configuration has " + std::to_string(config.assignment.size()) + " slots, expected " +
                        std::to_string(slots));
  }
  for (int b : config.assignment) {
    if (!graph.has_box(b)) throw ScenarioError("configuration references unknown box " + std::to_string(b));
  }
}

}  // namespace coa

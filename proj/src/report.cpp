#include "coa/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "coa/combat.hpp"
#include "coa/csv.hpp"
#include "coa/hash.hpp"

namespace coa {
namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string svg_open(double w, double h, const RunManifest& m) {
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<!-- manifest " << m.hash_hex() << " -->\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
    << ' ' << h << "\" font-family=\"sans-serif\">\n"
    << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  return o.str();
}

std::string text(double x, double y, std::string_view s, int size = 12, const char* anchor = "start",
                 const char* extra = "") {
  std::ostringstream o;
  o << "<text x=\"" << fixed(x, 1) << "\" y=\"" << fixed(y, 1) << "\" font-size=\"" << size << "\" text-anchor=\""
    << anchor << "\"" << extra << ">" << xml_escape(s) << "</text>\n";
  return o.str();
}

// "Deliberate Defense vs Deliberate Attack" -> "DD vs DA"
std::string short_typing(EngagementTyping t) {
  auto initials = [](std::string_view name) {
    std::string out;
    bool start = true;
    for (char ch : name) {
      if (start && ch != ' ') out += ch;
      start = ch == ' ';
    }
    return out;
  };
  return initials(engagement_name(t.blue)) + " vs " + initials(engagement_name(t.red));
}

const char* place_name(Place p) {
  switch (p) {
    case Place::Entry: return "entry";
    case Place::Box: return "box";
    case Place::Transit: return "transit";
    case Place::Exited: return "exited";
    case Place::Gone: return "gone";
  }
  return "?";
}

}  // namespace

std::string fixed(double v, int decimals) {
  if (std::abs(v) < 0.5 * std::pow(10.0, -decimals)) v = 0.0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::uint64_t RunManifest::hash() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["fields"] = fields;
  return fnv1a64(j.dump());
}

std::string RunManifest::hash_hex() const { return to_hex(hash()); }

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["manifest_hash"] = hash_hex();
  for (const auto& [k, v] : fields.items()) j[k] = v;
  j["created"] = created;
  return j;
}

void RunManifest::write(const std::filesystem::path& dir) const {
  write_text(dir / "manifest.json", to_json().dump(2) + "\n");
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string csv_manifest_line(const RunManifest& m) { return "# manifest " + m.hash_hex() + "\n"; }

std::string population_csv(const Population& pop, const RunManifest& m) {
  std::string out = csv_manifest_line(m);
  const std::size_t n = pop.empty() ? 0 : pop[0].config.assignment.size();
  for (std::size_t i = 0; i < n; ++i) out += "slot_" + std::to_string(i + 1) + ",";
  out += "x_value,iteration_found\n";
  for (const auto& mem : pop.members()) {
    for (int b : mem.config.assignment) out += std::to_string(b) + ",";
    out += csv::format_double(*mem.config.value) + "," + std::to_string(mem.iteration_found) + "\n";
  }
  return out;
}

std::string trace_csv(const std::vector<TraceEntry>& trace, const RunManifest& m) {
  std::string out = csv_manifest_line(m) + "iteration,best_x_value,evaluations,top_changed\n";
  for (const auto& t : trace) {
    out += std::to_string(t.iteration) + "," + csv::format_double(t.best_x) + "," + std::to_string(t.evaluations) +
           "," + (t.top_changed ? "1" : "0") + "\n";
  }
  return out;
}

std::vector<Configuration> read_population_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw std::runtime_error(path.string() + ": empty population file");
  const auto& header = rows.front();
  const auto xcol = std::find(header.begin(), header.end(), "x_value");
  if (xcol == header.end()) throw std::runtime_error(path.string() + ": missing x_value column");
  const auto slots = static_cast<std::size_t>(xcol - header.begin());
  if (slots == 0) throw std::runtime_error(path.string() + ": no slot columns");
  std::vector<Configuration> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = path.string() + " line " + std::to_string(r + 1);
    if (row.size() < slots + 1) throw std::runtime_error(where + ": too few fields");
    Configuration c;
    for (std::size_t i = 0; i < slots; ++i) c.assignment.push_back(csv::to_int(row[i], where));
    c.value = csv::to_double(row[slots], where);
    out.push_back(std::move(c));
  }
  if (out.empty()) throw std::runtime_error(path.string() + ": empty population");
  return out;
}

std::vector<std::string> slot_labels(const Scenario& scenario, int n) {
  std::vector<std::string> out;
  for (const auto* spec : compose_blue_force(scenario, n)) out.push_back(platoon_label(*spec));
  return out;
}

std::string configuration_report(const Configuration& c, const std::vector<std::string>& labels) {
  if (labels.size() != c.assignment.size()) throw std::invalid_argument("labels do not match configuration");
  std::map<std::pair<int, std::string>, int> counts;
  for (std::size_t i = 0; i < labels.size(); ++i) ++counts[{c.assignment[i], labels[i]}];
  std::string out = "type  count  box\n";
  for (const auto& [key, n] : counts) {
    char line[96];
    std::snprintf(line, sizeof line, "%-4s  %5d  %3d\n", key.second.c_str(), n, key.first);
    out += line;
  }
  out += "compact:";
  bool first = true;
  for (const auto& [key, n] : counts) {
    out += (first ? " " : ", ") + key.second + "x" + std::to_string(n) + "->box " + std::to_string(key.first);
    first = false;
  }
  out += "\n";
  if (c.value) out += "x_value: " + csv::format_double(*c.value) + "\n";
  return out;
}

std::string clusters_csv(const std::vector<Cluster>& clusters, const RunManifest& m) {
  std::string out = csv_manifest_line(m) + "cluster_id,size,best_value,min,median,max,best_assignment\n";
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    std::string assign;
    for (int b : c.best.assignment) assign += (assign.empty() ? "" : " ") + std::to_string(b);
    out += std::to_string(i + 1) + "," + std::to_string(c.members.size()) + "," +
           csv::format_double(*c.best.value) + "," + csv::format_double(c.min) + "," + csv::format_double(c.median) +
           "," + csv::format_double(c.max) + "," + assign + "\n";
  }
  return out;
}

std::string allocation_csv(const std::vector<Cluster>& clusters, const RunManifest& m) {
  std::string out = csv_manifest_line(m) + "cluster_id,type,mean_count,box\n";
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    for (const auto& a : clusters[i].allocation) {
      out += std::to_string(i + 1) + "," + a.type + "," + fixed(a.mean, 2) + "," + std::to_string(a.box) + "\n";
    }
  }
  return out;
}

std::string clusters_text(const std::vector<Cluster>& clusters, std::size_t k) {
  std::string out;
  for (std::size_t i = 0; i < std::min(k, clusters.size()); ++i) {
    const auto& c = clusters[i];
    out += "Cluster " + std::to_string(i + 1) + ": " + std::to_string(c.members.size()) + " configurations, best " +
           fixed(*c.best.value, 4) + ", min " + fixed(c.min, 4) + ", median " + fixed(c.median, 4) + ", max " +
           fixed(c.max, 4) + "\n";
    out += "type   mean   box\n";
    for (const auto& a : c.allocation) {
      char line[96];
      std::snprintf(line, sizeof line, "%-4s  %5s  %4d\n", a.type.c_str(), fixed(a.mean, 2).c_str(), a.box);
      out += line;
    }
    out += "\n";
  }
  return out;
}

std::string clusters_svg(const std::vector<Cluster>& clusters, const std::vector<ClusterPoint>& points,
                         const RunManifest& m) {
  const double plot = 560.0, col = 300.0, w = plot + col, h = std::max(600.0, 40.0 + 150.0 * ((points.size() + 1) / 2));
  std::string out = svg_open(w, h, m);
  out += text(plot / 2, 24, "Top " + std::to_string(points.size()) + " clusters (size = members, color = best x_value)", 14, "middle");
  double extent = 1e-9;
  for (const auto& p : points) extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
  const double scale = (plot / 2 - 80) / extent, cx = plot / 2, cy = h / 2;
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a].radius > points[b].radius; });
  for (std::size_t i : order) {
    const auto& p = points[i];
    const double x = cx + p.x * scale, y = cy - p.y * scale, r = 8.0 + 32.0 * p.radius;
    out += "<circle cx=\"" + fixed(x, 2) + "\" cy=\"" + fixed(y, 2) + "\" r=\"" + fixed(r, 2) + "\" fill=\"" +
           p.color + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += text(x, y + 4, std::to_string(i + 1), 12, "middle", " font-weight=\"bold\"");
    out += text(x, y + r + 14, fixed(*clusters[i].best.value, 3) + " (" + std::to_string(clusters[i].members.size()) + ")",
                10, "middle");
  }
  // Allocation text boxes, two per row.
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double bx = plot + (i % 2) * (col / 2) + 4, by = 40.0 + 150.0 * static_cast<double>(i / 2);
    out += "<rect x=\"" + fixed(bx, 1) + "\" y=\"" + fixed(by, 1) + "\" width=\"" + fixed(col / 2 - 8, 1) +
           "\" height=\"140\" fill=\"#f7f7f7\" stroke=\"#999999\"/>\n";
    out += text(bx + 6, by + 16, "Cluster " + std::to_string(i + 1), 11, "start", " font-weight=\"bold\"");
    double ly = by + 30;
    for (const auto& a : clusters[i].allocation) {
      if (ly > by + 134) {
        out += text(bx + 6, ly, "...", 10);
        break;
      }
      out += text(bx + 6, ly, a.type + "  " + fixed(a.mean, 2) + "  box " + std::to_string(a.box), 10);
      ly += 12;
    }
  }
  out += "</svg>\n";
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const RunManifest& m) {
  std::string out = csv_manifest_line(m) + "platoons,repetitions,mean_best_value,sdom,values\n";
  for (const auto& r : rows) {
    std::string vals;
    for (double v : r.best_values) vals += (vals.empty() ? "" : " ") + csv::format_double(v);
    out += std::to_string(r.platoons) + "," + std::to_string(r.best_values.size()) + "," +
           csv::format_double(r.mean) + "," + (r.sdom ? csv::format_double(*r.sdom) : "") + "," + vals + "\n";
  }
  return out;
}

std::string simulation_json(const SimulationResult& r, const std::vector<std::string>& labels) {
  nlohmann::ordered_json j;
  j["blue_initial"] = r.blue_initial;
  j["red_initial"] = r.red_initial;
  j["blue_final"] = r.blue_final;
  j["red_final"] = r.red_final;
  j["x_value"] = r.x_value;
  j["illegal_moves"] = r.illegal_moves;
  j["rollouts_explored"] = r.rollouts_explored;
  j["truncated"] = r.truncated;
  j["slot_types"] = labels;
  auto& d = j["regroupings"] = nlohmann::ordered_json::array();
  for (const auto& dec : r.decisions) {
    d.push_back({{"time_s", dec.time_s}, {"box", dec.box}, {"units", dec.units}, {"destinations", dec.destinations}});
  }
  return j.dump(2) + "\n";
}

std::string battle_log_csv(const SimulationResult& r, const RunManifest& m) {
  std::string out = csv_manifest_line(m) + "box,start_s,duration_s,typing,participants,rel_before,rel_after,outcome,interrupted\n";
  auto join = [](const auto& v, auto fmt) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : " ") + fmt(x);
    return s;
  };
  for (const auto& b : r.battle_log) {
    out += std::to_string(b.box) + "," + csv::format_double(b.start_s) + "," + csv::format_double(b.duration_s) + "," +
           csv::escape(typing_label(b.typing)) + "," + join(b.participants, [](const std::string& s) { return s; }) +
           "," + join(b.rel_before, [](double d) { return fixed(d, 6); }) + "," +
           join(b.rel_after, [](double d) { return fixed(d, 6); }) + "," + (b.interrupted ? "none" : winner_name(b.outcome)) +
           "," + (b.interrupted ? "1" : "0") + "\n";
  }
  return out;
}

std::string frame_svg(const Scenario& scenario, const Frame& frame, std::size_t index, const RunManifest& m) {
  const auto& g = scenario.graph;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& b : g.boxes()) {
    const double half = std::sqrt(b.area_m2) / 2;
    x0 = std::min(x0, b.x_m - half);
    x1 = std::max(x1, b.x_m + half);
    y0 = std::min(y0, b.y_m - half);
    y1 = std::max(y1, b.y_m + half);
  }
  for (const auto& e : g.entry_points()) {
    x0 = std::min(x0, e.x_m);
    x1 = std::max(x1, e.x_m);
    y0 = std::min(y0, e.y_m);
    y1 = std::max(y1, e.y_m);
  }
  const double map = 640.0, margin = 40.0, top = 60.0, bottom = 70.0;
  const double scale = map / std::max(x1 - x0, y1 - y0);
  const double w = 2 * margin + (x1 - x0) * scale, h = top + bottom + (y1 - y0) * scale;
  auto px = [&](double x) { return margin + (x - x0) * scale; };
  auto py = [&](double y) { return top + (y1 - y) * scale; };

  std::string out = svg_open(w, h, m);
  out += text(margin, 24, "Frame " + std::to_string(index) + ": " + frame.caption, 14);
  for (const auto& e : g.edges()) {
    const auto& a = g.box(e.a);
    const auto& b = g.box(e.b);
    out += "<line x1=\"" + fixed(px(a.x_m), 1) + "\" y1=\"" + fixed(py(a.y_m), 1) + "\" x2=\"" + fixed(px(b.x_m), 1) +
           "\" y2=\"" + fixed(py(b.y_m), 1) + "\" stroke=\"#bbbbbb\" stroke-width=\"2\"/>\n";
  }
  for (const auto& e : g.entry_points()) {
    const auto& b = g.box(e.connects_to);
    out += "<line x1=\"" + fixed(px(e.x_m), 1) + "\" y1=\"" + fixed(py(e.y_m), 1) + "\" x2=\"" + fixed(px(b.x_m), 1) +
           "\" y2=\"" + fixed(py(b.y_m), 1) + "\" stroke=\"#bbbbbb\" stroke-dasharray=\"6 4\"/>\n";
    out += "<circle cx=\"" + fixed(px(e.x_m), 1) + "\" cy=\"" + fixed(py(e.y_m), 1) + "\" r=\"5\" fill=\"#666666\"/>\n";
    out += text(px(e.x_m) + 8, py(e.y_m) + 4, e.name, 11);
  }
  std::map<int, std::string> combat_label;
  for (const auto& [box, typing] : frame.combats) combat_label[box] = short_typing(typing);
  for (const auto& b : g.boxes()) {
    const double side = std::sqrt(b.area_m2) * scale * 0.9;
    const bool fighting = combat_label.count(b.id) > 0;
    out += "<rect x=\"" + fixed(px(b.x_m) - side / 2, 1) + "\" y=\"" + fixed(py(b.y_m) - side / 2, 1) + "\" width=\"" +
           fixed(side, 1) + "\" height=\"" + fixed(side, 1) + "\" fill=\"" + (fighting ? "#fff3cd" : "#f4f4f4") +
           "\" stroke=\"" + (fighting ? "#d4a017" : "#999999") + "\"/>\n";
    out += text(px(b.x_m) - side / 2 + 4, py(b.y_m) - side / 2 + 12, std::to_string(b.id), 11, "start", " fill=\"#555555\"");
    if (fighting) out += text(px(b.x_m), py(b.y_m) + side / 2 - 6, combat_label[b.id], 9, "middle", " fill=\"#8a6d00\"");
  }
  std::map<std::pair<int, int>, int> slot_in_box;  // (box, side) -> units drawn so far
  for (const auto& u : frame.units) {
    double ux = 0, uy = 0;
    if (u.place == Place::Box) {
      const auto& b = g.box(u.box);
      const int k = slot_in_box[{u.box, u.side == Side::Blue ? 0 : 1}]++;
      const double step = std::sqrt(b.area_m2) * scale * 0.14;
      ux = px(b.x_m) + (u.side == Side::Blue ? -1 : 1) * step * (0.6 + (k / 4));
      uy = py(b.y_m) + step * ((k % 4) - 1.5);
    } else if (u.place == Place::Transit) {
      double fx, fy;
      if (u.from == 0) {
        const auto& e = g.entry_points().at(static_cast<std::size_t>(scenario.blue_entry));
        fx = e.x_m;
        fy = e.y_m;
      } else {
        fx = g.box(u.from).x_m;
        fy = g.box(u.from).y_m;
      }
      const auto& t = g.box(u.box);
      ux = px(fx + (t.x_m - fx) * u.progress);
      uy = py(fy + (t.y_m - fy) * u.progress);
    } else {
      continue;
    }
    const char* fill = u.side == Side::Blue ? "#1f5fbf" : "#c0392b";
    const double r = 3.0 + 4.0 * u.rel;
    out += "<circle cx=\"" + fixed(ux, 1) + "\" cy=\"" + fixed(uy, 1) + "\" r=\"" + fixed(r, 1) + "\" fill=\"" + fill +
           "\" fill-opacity=\"0.85\"><title>" + xml_escape(u.label) + " rel " + fixed(u.rel, 3) + " (" +
           place_name(u.place) + ")</title></circle>\n";
  }
  const double ty = h - bottom + 24;
  out += text(margin, ty, "Blue: " + std::to_string(frame.blue_count) + " platoons, combat value " + fixed(frame.blue_value, 4),
              12, "start", " fill=\"#1f5fbf\"");
  out += text(margin, ty + 18, "Red: " + std::to_string(frame.red_count) + " platoons, combat value " + fixed(frame.red_value, 4),
              12, "start", " fill=\"#c0392b\"");
  out += "</svg>\n";
  return out;
}

std::string design_csv(const DesignMatrix& d, const RunManifest& m) {
  std::string out = csv_manifest_line(m);
  for (int c = 0; c < d.cols; ++c) out += (c ? ",c" : "c") + std::to_string(c + 1);
  out += "\n";
  for (int r = 0; r < d.rows; ++r) {
    for (int c = 0; c < d.cols; ++c) out += (c ? "," : "") + std::to_string(d.at(r, c));
    out += "\n";
  }
  return out;
}

}  // namespace coa

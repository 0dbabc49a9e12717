#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "coa/cluster.hpp"
#include "coa/optimizer.hpp"
#include "coa/scenario.hpp"
#include "coa/simulation.hpp"

namespace coa {

/// Everything needed to reproduce a run. `fields` holds the reproducibility
/// inputs; the timestamp is kept apart and does not enter the hash.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json fields = nlohmann::ordered_json::object();
  std::string created;  // ISO 8601, UTC

  std::uint64_t hash() const;
  std::string hash_hex() const;
  nlohmann::ordered_json to_json() const;
  void write(const std::filesystem::path& dir) const;
};

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

/// Writes text exactly as given (binary mode, no newline translation).
void write_text(const std::filesystem::path& path, const std::string& text);

/// "# manifest <hash>\n" for CSV outputs.
std::string csv_manifest_line(const RunManifest& m);

std::string population_csv(const Population& pop, const RunManifest& m);
std::string trace_csv(const std::vector<TraceEntry>& trace, const RunManifest& m);

/// Reads a population CSV: slot columns, then x_value (iteration_found optional).
std::vector<Configuration> read_population_csv(const std::filesystem::path& path);

/// Slot labels ("AIP", "TP") of the blue force for `n` platoons.
std::vector<std::string> slot_labels(const Scenario& scenario, int n);

/// Distribution of one configuration: "AIP x1 -> box 8" lines grouped by box and type.
std::string configuration_report(const Configuration& c, const std::vector<std::string>& labels);

std::string clusters_csv(const std::vector<Cluster>& clusters, const RunManifest& m);
std::string allocation_csv(const std::vector<Cluster>& clusters, const RunManifest& m);
/// Per cluster: value statistics, then "type  mean  box" rows with two decimals.
std::string clusters_text(const std::vector<Cluster>& clusters, std::size_t k);

std::string clusters_svg(const std::vector<Cluster>& clusters, const std::vector<ClusterPoint>& points,
                         const RunManifest& m);

std::string sweep_csv(const std::vector<SweepRow>& rows, const RunManifest& m);

std::string simulation_json(const SimulationResult& r, const std::vector<std::string>& labels);
std::string battle_log_csv(const SimulationResult& r, const RunManifest& m);

std::string frame_svg(const Scenario& scenario, const Frame& frame, std::size_t index, const RunManifest& m);

std::string design_csv(const DesignMatrix& d, const RunManifest& m);

/// Formats with the given number of decimals.
std::string fixed(double v, int decimals);

}  // namespace coa

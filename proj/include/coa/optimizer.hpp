#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "coa/random.hpp"
#include "coa/scenario.hpp"
#include "coa/simulation.hpp"

namespace coa {

class OptimizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer levels 1..rows, stored row-major.
struct DesignMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> levels;

  int at(int r, int c) const { return levels[static_cast<std::size_t>(r * cols + c)]; }
  std::span<const int> row(int r) const {
    return {levels.data() + static_cast<std::size_t>(r * cols), static_cast<std::size_t>(cols)};
  }

  bool is_latin() const;
  double max_abs_correlation() const;

  /// Seeded random Latin hypercube, decorrelated by pairwise row swaps within
  /// columns until every column pair is within `bound`.
  static DesignMatrix generate(std::uint64_t seed, int cols = 16, int rows = 256, double bound = 0.05,
                               int max_swaps = 2'000'000);
  /// CSV with one row per design point; must be Latin.
  static DesignMatrix load_csv(const std::filesystem::path& path);
};

/// box = ceil(level * n_boxes / levels) for the first `slots` columns.
Configuration design_to_configuration(std::span<const int> levels, int n_boxes, std::size_t slots,
                                      int level_count = 256);

struct Member {
  Configuration config;  // value always set
  int iteration_found = 0;
};

/// Evaluated configurations, best (lowest x_value) first; ties keep insertion order.
class Population {
 public:
  explicit Population(std::size_t capacity = 256) : capacity_(capacity) {}

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const std::vector<Member>& members() const { return members_; }
  const Member& operator[](std::size_t i) const { return members_[i]; }
  bool contains(const std::vector<int>& assignment) const { return keys_.count(assignment) > 0; }

  /// Inserts every evaluated configuration not already present, then keeps the
  /// best `capacity`. Returns true when a newcomer entered the top `window`.
  bool update(const std::vector<Configuration>& evaluated, int iteration, std::size_t window = 40);

 private:
  std::size_t capacity_;
  std::vector<Member> members_;
  std::set<std::vector<int>> keys_;
};

enum class SelectionDirection : std::uint8_t {
  Fitness,  // lowest x_value gets weight m, highest gets 1
  Literal,  // highest x_value gets weight m
};

/// Index into the population drawn with linear rank weights.
std::size_t rank_order_select(const Population& pop, Rng& rng,
                              SelectionDirection dir = SelectionDirection::Fitness);

/// Moves one uniformly chosen slot to another box. Boxes are ranked by center
/// distance from the slot's current box (ties by id); the nearest of the N - 1
/// others has weight N - 1, the farthest 1.
Configuration search_move(const Configuration& config, const BattleGraph& graph, Rng& rng);

/// One uniform slot to a uniform other box.
Configuration ga_mutate(const Configuration& config, int box_count, Rng& rng);

/// Each slot from `a` or `b` with probability 1/2.
Configuration ga_crossover(const Configuration& a, const Configuration& b, Rng& rng);

struct OptimizerConfig {
  double p_method = 0.4;
  std::size_t batch_size = 12;
  double mutation_prob = 0.05;
  std::size_t population_size = 256;
  std::size_t top_window = 40;
  int stagnation_limit = 17;
  int retry_cap = 1000;
  int max_iterations = 100000;
  std::uint64_t seed = 1;
  SelectionDirection selection = SelectionDirection::Fitness;
  SimOptions sim;
  std::optional<DesignMatrix> design;  // generated from the seed when empty
  unsigned threads = 0;                // 0: COA_THREADS or the hardware count
};

struct ProposalStats {
  std::size_t search = 0;
  std::size_t mutate = 0;
  std::size_t crossover = 0;
  std::size_t rejected = 0;
};

/// Up to batch_size new configurations, unique and absent from the population.
/// Returns fewer when retry_cap draws in a row fail to find a new one.
std::vector<Configuration> propose_batch(const Population& pop, const BattleGraph& graph, Rng& rng,
                                         const OptimizerConfig& cfg, ProposalStats* stats = nullptr);

/// True once the last `limit` entries record no newcomer in the top window.
bool converged(const std::vector<bool>& top_changed, int limit = 17);

using Evaluator = std::function<double(const Configuration&, std::uint64_t seed)>;

/// Simulates with the given options, seed overridden per call.
Evaluator simulation_evaluator(const Scenario& scenario, std::size_t platoons, const SimOptions& options);

/// Evaluates all configurations, writing x_value in place. Seeds are derived
/// from `base_seed` and `first_index + i`, so results do not depend on threads.
void evaluate_all(std::vector<Configuration>& configs, const Evaluator& eval, std::uint64_t base_seed,
                  std::uint64_t first_index, unsigned threads);

/// COA_THREADS if set and positive, else the hardware count (at least 1).
unsigned default_threads();

struct TraceEntry {
  int iteration = 0;
  double best_x = 0.0;
  std::size_t evaluations = 0;
  bool top_changed = false;
};

struct OptimizeResult {
  Population population;
  Configuration best;
  std::vector<TraceEntry> trace;
  std::vector<bool> top_changed;
  std::size_t evaluations = 0;
  bool converged = false;
  ProposalStats stats;
};

/// Called after every iteration with the population so far.
using ProgressFn = std::function<void(const TraceEntry&, const Population&)>;

OptimizeResult optimize(const Scenario& scenario, int n_platoons, const OptimizerConfig& cfg,
                        const Evaluator& evaluator = {}, const ProgressFn& progress = {});

/// Count of distinct configurations, saturating at `cap`.
std::size_t search_space_size(int box_count, std::size_t slots, std::size_t cap);

struct SweepRow {
  int platoons = 0;
  std::vector<double> best_values;
  double mean = 0.0;
  std::optional<double> sdom;  // standard deviation of the mean; empty for one repetition
};

std::vector<SweepRow> sweep(const Scenario& scenario, int from, int to, int repetitions,
                            const OptimizerConfig& cfg);

/// Smallest platoon count whose mean best value is below zero.
std::optional<int> halt_threshold(const std::vector<SweepRow>& rows);

}  // namespace coa

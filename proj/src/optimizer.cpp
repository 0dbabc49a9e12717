#include "coa/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "coa/csv.hpp"
#include "coa/hash.hpp"

namespace coa {

bool DesignMatrix::is_latin() const {
  for (int c = 0; c < cols; ++c) {
    std::vector<bool> seen(static_cast<std::size_t>(rows) + 1, false);
    for (int r = 0; r < rows; ++r) {
      const int v = at(r, c);
      if (v < 1 || v > rows || seen[static_cast<std::size_t>(v)]) return false;
      seen[static_cast<std::size_t>(v)] = true;
    }
  }
  return true;
}

double DesignMatrix::max_abs_correlation() const {
  std::vector<double> mean(static_cast<std::size_t>(cols), 0.0), sd(static_cast<std::size_t>(cols), 0.0);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) mean[c] += at(r, c);
    mean[c] /= rows;
    for (int r = 0; r < rows; ++r) sd[c] += (at(r, c) - mean[c]) * (at(r, c) - mean[c]);
    sd[c] = std::sqrt(sd[c]);
  }
  double worst = 0.0;
  for (int a = 0; a < cols; ++a) {
    for (int b = a + 1; b < cols; ++b) {
      double s = 0.0;
      for (int r = 0; r < rows; ++r) s += (at(r, a) - mean[a]) * (at(r, b) - mean[b]);
      worst = std::max(worst, std::abs(s / (sd[a] * sd[b])));
    }
  }
  return worst;
}

DesignMatrix DesignMatrix::generate(std::uint64_t seed, int cols, int rows, double bound, int max_swaps) {
  if (cols < 1 || rows < 2) throw OptimizerError("design needs at least 1 column and 2 rows");
  Rng rng(seed);
  // Centered copies per column; doubled so the center stays integral.
  std::vector<std::vector<long long>> c(static_cast<std::size_t>(cols));
  for (auto& col : c) {
    std::vector<int> perm(static_cast<std::size_t>(rows));
    std::iota(perm.begin(), perm.end(), 1);
    rng.shuffle(std::span<int>(perm));
    col.reserve(perm.size());
    for (int v : perm) col.push_back(2LL * v - (rows + 1));
  }
  long long ss = 0;
  for (long long v : c[0]) ss += v * v;
  const auto ucols = static_cast<std::size_t>(cols);
  std::vector<long long> dot(ucols * ucols, 0);
  for (std::size_t a = 0; a < ucols; ++a) {
    for (std::size_t b = a + 1; b < ucols; ++b) {
      long long s = 0;
      for (std::size_t r = 0; r < c[a].size(); ++r) s += c[a][r] * c[b][r];
      dot[a * ucols + b] = dot[b * ucols + a] = s;
    }
  }
  const double limit = bound * static_cast<double>(ss);
  std::vector<long long> delta(ucols);
  for (int attempt = 0; attempt <= max_swaps; ++attempt) {
    std::size_t wa = 0, wb = 0;
    long long worst = -1;
    for (std::size_t a = 0; a < ucols; ++a) {
      for (std::size_t b = a + 1; b < ucols; ++b) {
        if (std::llabs(dot[a * ucols + b]) > worst) {
          worst = std::llabs(dot[a * ucols + b]);
          wa = a;
          wb = b;
        }
      }
    }
    if (static_cast<double>(worst) <= limit) break;
    if (attempt == max_swaps) {
      throw OptimizerError("design correlation bound not reached; supply an external design matrix");
    }
    const std::size_t j = rng.bernoulli(0.5) ? wa : wb;
    const std::size_t r1 = rng.index(static_cast<std::size_t>(rows));
    const std::size_t r2 = rng.index(static_cast<std::size_t>(rows));
    if (r1 == r2) continue;
    double before = 0.0, after = 0.0;
    for (std::size_t m = 0; m < ucols; ++m) {
      if (m == j) continue;
      delta[m] = (c[j][r2] - c[j][r1]) * (c[m][r1] - c[m][r2]);
      const double d0 = static_cast<double>(dot[j * ucols + m]);
      const double d1 = static_cast<double>(dot[j * ucols + m] + delta[m]);
      before += d0 * d0;
      after += d1 * d1;
    }
    if (after >= before) continue;
    std::swap(c[j][r1], c[j][r2]);
    for (std::size_t m = 0; m < ucols; ++m) {
      if (m == j) continue;
      dot[j * ucols + m] += delta[m];
      dot[m * ucols + j] = dot[j * ucols + m];
    }
  }
  DesignMatrix d;
  d.rows = rows;
  d.cols = cols;
  d.levels.resize(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r) {
    for (int col = 0; col < cols; ++col) {
      d.levels[static_cast<std::size_t>(r * cols + col)] =
          static_cast<int>((c[static_cast<std::size_t>(col)][static_cast<std::size_t>(r)] + rows + 1) / 2);
    }
  }
  return d;
}

DesignMatrix DesignMatrix::load_csv(const std::filesystem::path& path) {
  auto rows = csv::read_file(path);
  if (!rows.empty() && !rows.front().empty()) {
    int probe = 0;
    const auto& f = rows.front().front();
    if (std::from_chars(f.data(), f.data() + f.size(), probe).ec != std::errc{}) rows.erase(rows.begin());
  }
  if (rows.empty()) throw OptimizerError(path.string() + ": empty design matrix");
  DesignMatrix d;
  d.rows = static_cast<int>(rows.size());
  d.cols = static_cast<int>(rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(d.cols)) {
      throw OptimizerError(path.string() + ": row " + std::to_string(r + 1) + " has " +
                           std::to_string(rows[r].size()) + " columns, expected " + std::to_string(d.cols));
    }
    for (const auto& f : rows[r]) d.levels.push_back(csv::to_int(f, path.string()));
  }
  if (!d.is_latin()) throw OptimizerError(path.string() + ": every column must be a permutation of 1..rows");
  return d;
}

Configuration design_to_configuration(std::span<const int> levels, int n_boxes, std::size_t slots, int level_count) {
  if (slots > levels.size()) throw OptimizerError("design has fewer columns than platoon slots");
  Configuration c;
  c.assignment.reserve(slots);
  for (std::size_t i = 0; i < slots; ++i) {
    const long long l = levels[i];
    if (l < 1 || l > level_count) throw OptimizerError("design level out of range");
    c.assignment.push_back(static_cast<int>((l * n_boxes + level_count - 1) / level_count));
  }
  return c;
}

bool Population::update(const std::vector<Configuration>& evaluated, int iteration, std::size_t window) {
  std::set<std::vector<int>> old_top;
  for (std::size_t i = 0; i < std::min(window, members_.size()); ++i) old_top.insert(members_[i].config.assignment);
  for (const auto& c : evaluated) {
    if (!c.value) throw OptimizerError("population member without x_value");
    if (!keys_.insert(c.assignment).second) continue;
    members_.push_back({c, iteration});
  }
  std::stable_sort(members_.begin(), members_.end(),
                   [](const Member& a, const Member& b) { return *a.config.value < *b.config.value; });
  while (members_.size() > capacity_) {
    keys_.erase(members_.back().config.assignment);
    members_.pop_back();
  }
  for (std::size_t i = 0; i < std::min(window, members_.size()); ++i) {
    if (!old_top.count(members_[i].config.assignment)) return true;
  }
  return false;
}

std::size_t rank_order_select(const Population& pop, Rng& rng, SelectionDirection dir) {
  const std::size_t m = pop.size();
  if (m == 0) throw OptimizerError("selection from an empty population");
  const auto total = static_cast<std::int64_t>(m * (m + 1) / 2);
  std::int64_t t = rng.uniform_int(1, total);
  // Fitness: index i (0 = best) has weight m - i. Walk from the heaviest end.
  for (std::size_t i = 0; i < m; ++i) {
    const auto w = static_cast<std::int64_t>(m - i);
    if (t <= w) return dir == SelectionDirection::Fitness ? i : m - 1 - i;
    t -= w;
  }
  return dir == SelectionDirection::Fitness ? m - 1 : 0;
}

Configuration search_move(const Configuration& config, const BattleGraph& graph, Rng& rng) {
  const int n = graph.box_count();
  if (n < 2) throw OptimizerError("no alternative box");
  if (config.assignment.empty()) throw OptimizerError("empty configuration");
  Configuration out{config.assignment, std::nullopt};
  const std::size_t slot = rng.index(out.assignment.size());
  const int cur = out.assignment[slot];
  std::vector<int> others;
  for (int b = 1; b <= n; ++b) {
    if (b != cur) others.push_back(b);
  }
  std::stable_sort(others.begin(), others.end(), [&](int a, int b) {
    return graph.center_distance(cur, a) < graph.center_distance(cur, b);
  });
  const auto k = static_cast<std::int64_t>(others.size());
  std::int64_t t = rng.uniform_int(1, k * (k + 1) / 2);
  for (std::int64_t i = 0; i < k; ++i) {
    if (t <= k - i) {
      out.assignment[slot] = others[static_cast<std::size_t>(i)];
      return out;
    }
    t -= k - i;
  }
  out.assignment[slot] = others.back();
  return out;
}

Configuration ga_mutate(const Configuration& config, int box_count, Rng& rng) {
  if (box_count < 2) throw OptimizerError("no alternative box");
  if (config.assignment.empty()) throw OptimizerError("empty configuration");
  Configuration out{config.assignment, std::nullopt};
  const std::size_t slot = rng.index(out.assignment.size());
  int b = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(box_count - 1)));
  if (b >= out.assignment[slot]) ++b;
  out.assignment[slot] = b;
  return out;
}

Configuration ga_crossover(const Configuration& a, const Configuration& b, Rng& rng) {
  if (a.assignment.size() != b.assignment.size()) throw OptimizerError("crossover parents differ in length");
  Configuration out;
  out.assignment.reserve(a.assignment.size());
  for (std::size_t i = 0; i < a.assignment.size(); ++i) {
    out.assignment.push_back(rng.bernoulli(0.5) ? a.assignment[i] : b.assignment[i]);
  }
  return out;
}

std::vector<Configuration> propose_batch(const Population& pop, const BattleGraph& graph, Rng& rng,
                                         const OptimizerConfig& cfg, ProposalStats* stats) {
  std::vector<Configuration> batch;
  if (pop.empty()) return batch;
  std::set<std::vector<int>> taken;
  while (batch.size() < cfg.batch_size) {
    bool found = false;
    for (int attempt = 0; attempt < cfg.retry_cap && !found; ++attempt) {
      Configuration c;
      enum { Search, Mutate, Cross } kind;
      if (rng.bernoulli(cfg.p_method)) {
        kind = Search;
        c = search_move(pop[rank_order_select(pop, rng, cfg.selection)].config, graph, rng);
      } else if (rng.bernoulli(cfg.mutation_prob)) {
        kind = Mutate;
        c = ga_mutate(pop[rank_order_select(pop, rng, cfg.selection)].config, graph.box_count(), rng);
      } else {
        kind = Cross;
        const std::size_t ia = rank_order_select(pop, rng, cfg.selection);
        std::size_t ib = ia;
        while (pop.size() > 1 && ib == ia) ib = rank_order_select(pop, rng, cfg.selection);
        c = ga_crossover(pop[ia].config, pop[ib].config, rng);
      }
      if (pop.contains(c.assignment) || !taken.insert(c.assignment).second) {
        if (stats) ++stats->rejected;
        continue;
      }
      if (stats) ++(kind == Search ? stats->search : kind == Mutate ? stats->mutate : stats->crossover);
      batch.push_back(std::move(c));
      found = true;
    }
    if (!found) break;
  }
  return batch;
}

bool converged(const std::vector<bool>& top_changed, int limit) {
  if (limit <= 0) return true;
  int stagnant = 0;
  for (auto it = top_changed.rbegin(); it != top_changed.rend() && !*it; ++it) ++stagnant;
  return stagnant >= limit;
}

Evaluator simulation_evaluator(const Scenario& scenario, std::size_t platoons, const SimOptions& options) {
  auto slots = compose_blue_force(scenario, static_cast<int>(platoons));
  return [&scenario, slots = std::move(slots), options](const Configuration& c, std::uint64_t seed) {
    SimOptions o = options;
    o.seed = seed;
    o.record_log = false;
    return Simulator(scenario, slots, o).simulate(c).x_value;
  };
}

unsigned default_threads() {
  if (const char* env = std::getenv("COA_THREADS")) {
    int v = 0;
    const std::string_view s(env);
    if (std::from_chars(s.data(), s.data() + s.size(), v).ec == std::errc{} && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void evaluate_all(std::vector<Configuration>& configs, const Evaluator& eval, std::uint64_t base_seed,
                  std::uint64_t first_index, unsigned threads) {
  const std::size_t n = configs.size();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) configs[i].value = eval(configs[i], derive_seed(base_seed, first_index + i));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          configs[i].value = eval(configs[i], derive_seed(base_seed, first_index + i));
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::size_t search_space_size(int box_count, std::size_t slots, std::size_t cap) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < slots; ++i) {
    if (total > cap / static_cast<std::size_t>(std::max(box_count, 1))) return cap;
    total *= static_cast<std::size_t>(box_count);
  }
  return std::min(total, cap);
}

OptimizeResult optimize(const Scenario& scenario, int n_platoons, const OptimizerConfig& cfg,
                        const Evaluator& evaluator, const ProgressFn& progress) {
  if (n_platoons < 1 || n_platoons > 16) throw OptimizerError("platoon count must be within [1,16]");
  if (n_platoons > scenario.roster_size()) throw OptimizerError("platoon count exceeds the blue roster");
  if (!(cfg.p_method >= 0.0 && cfg.p_method <= 1.0) || !(cfg.mutation_prob >= 0.0 && cfg.mutation_prob <= 1.0)) {
    throw OptimizerError("probabilities must lie in [0,1]");
  }
  if (cfg.batch_size < 1) throw OptimizerError("batch size must be at least 1");

  const auto slots = static_cast<std::size_t>(n_platoons);
  const auto& graph = scenario.graph;
  const Evaluator eval = evaluator ? evaluator : simulation_evaluator(scenario, slots, cfg.sim);
  const unsigned threads = cfg.threads ? cfg.threads : default_threads();
  const DesignMatrix design = cfg.design ? *cfg.design : DesignMatrix::generate(derive_seed(cfg.seed, 0xde5));
  if (static_cast<std::size_t>(design.cols) < slots) throw OptimizerError("design has fewer columns than platoons");

  Rng rng(derive_seed(cfg.seed, 0x0b7));
  OptimizeResult res{Population(cfg.population_size), {}, {}, {}, 0, false, {}};

  // Seeding: distinct design rows, topped up with uniform random configurations
  // when the mapping collapses rows onto each other.
  const std::size_t want = std::min(cfg.population_size, search_space_size(graph.box_count(), slots, cfg.population_size));
  std::vector<Configuration> seed_configs;
  std::set<std::vector<int>> seen;
  for (int r = 0; r < design.rows && seed_configs.size() < want; ++r) {
    auto c = design_to_configuration(design.row(r), graph.box_count(), slots, design.rows);
    if (seen.insert(c.assignment).second) seed_configs.push_back(std::move(c));
  }
  for (std::size_t guard = 0; seed_configs.size() < want && guard < want * 1000; ++guard) {
    Configuration c;
    for (std::size_t i = 0; i < slots; ++i) c.assignment.push_back(1 + static_cast<int>(rng.index(static_cast<std::size_t>(graph.box_count()))));
    if (seen.insert(c.assignment).second) seed_configs.push_back(std::move(c));
  }
  evaluate_all(seed_configs, eval, cfg.seed, res.evaluations, threads);
  res.evaluations += seed_configs.size();
  res.population.update(seed_configs, 0, cfg.top_window);
  res.trace.push_back({0, *res.population[0].config.value, res.evaluations, true});
  if (progress) progress(res.trace.back(), res.population);

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    auto batch = propose_batch(res.population, graph, rng, cfg, &res.stats);
    if (batch.empty()) break;
    evaluate_all(batch, eval, cfg.seed, res.evaluations, threads);
    res.evaluations += batch.size();
    const bool changed = res.population.update(batch, it, cfg.top_window);
    res.top_changed.push_back(changed);
    res.trace.push_back({it, *res.population[0].config.value, res.evaluations, changed});
    if (progress) progress(res.trace.back(), res.population);
    if (converged(res.top_changed, cfg.stagnation_limit)) {
      res.converged = true;
      break;
    }
  }
  res.best = res.population[0].config;
  return res;
}

std::vector<SweepRow> sweep(const Scenario& scenario, int from, int to, int repetitions, const OptimizerConfig& cfg) {
  if (repetitions < 1) throw OptimizerError("need at least one repetition");
  std::vector<SweepRow> rows;
  for (int n = from; n <= to; ++n) {
    SweepRow row;
    row.platoons = n;
    for (int rep = 0; rep < repetitions; ++rep) {
      OptimizerConfig c = cfg;
      c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(n) * 1000 + static_cast<std::uint64_t>(rep));
      row.best_values.push_back(*optimize(scenario, n, c).best.value);
    }
    const double k = static_cast<double>(row.best_values.size());
    row.mean = std::accumulate(row.best_values.begin(), row.best_values.end(), 0.0) / k;
    if (row.best_values.size() > 1) {
      double ss = 0.0;
      for (double v : row.best_values) ss += (v - row.mean) * (v - row.mean);
      row.sdom = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<int> halt_threshold(const std::vector<SweepRow>& rows) {
  for (const auto& r : rows) {
    if (r.mean < 0.0) return r.platoons;
  }
  return std::nullopt;
}

}  // namespace coa

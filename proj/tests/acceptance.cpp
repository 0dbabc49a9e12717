// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "coa/cluster.hpp"
#include "coa/combat.hpp"
#include "coa/optimizer.hpp"
#include "coa/simulation.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace coa;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits.
constexpr double kTableTol = 0.0;
constexpr double kTableSeconds = 1.0;
constexpr double kRelTol = 1e-12;
constexpr double kValuationTol = 1e-12;
constexpr double kSigmas = 3.0;
constexpr std::size_t kDraws = 1'000'000;
constexpr double kMiniSeconds = 10.0;
constexpr int kStagnation = 17;
constexpr double kSpearmanMax = -0.9;
constexpr int kThresholdLo = 4;
constexpr int kThresholdHi = 12;
constexpr double kTenPlatoonSeconds = 1800.0;
constexpr int kSweepReps = 5;
constexpr std::size_t kSweepRolloutBudget = 300;
constexpr std::size_t kSimilarityPairs = 100'000;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

Platoon platoon(Side side, int type, double rel) {
  return Platoon{0, side, &find_unit_type(side, type), rel, PlatoonStatus::Active};
}

// 1 ----------------------------------------------------------------------
Verdict table_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  int bad = 0;
  // Named values, written out as literals.
  bad += platoon_value(find_unit_type(Side::Blue, 2)) != 0.0625;
  bad += platoon_value(find_unit_type(Side::Red, 4)) != 0.040625;
  bad += platoon_value(find_unit_type(Side::Red, 21)) != 0.08;
  for (Side side : {Side::Blue, Side::Red}) {
    for (const auto& spec : catalog(side)) bad += std::abs(platoon_value(spec) - oracle::value(spec.combatv, spec.size)) > kTableTol;
  }
  const auto& cols = oracle::ratio_columns();
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 7; ++c) {
      const auto f = loss_fractions(cols[c], all_typings()[r]);
      bad += std::abs(f.friendly - oracle::kLossPct[r][2 * c] / 100.0) > kTableTol;
      bad += std::abs(f.enemy - oracle::kLossPct[r][2 * c + 1] / 100.0) > kTableTol;
    }
  }
  // One ratio inside every band, each posture and attacker class.
  for (int band = 0; band < 9; ++band) {
    const double lo = band == 0 ? 1.0 : oracle::kBandHigh[band - 1];
    const double hi = band == 8 ? lo + 2.0 : oracle::kBandHigh[band];
    const double ratio = 0.5 * (lo + hi);
    for (int posture = 0; posture < 3; ++posture) {
      for (int cls = 0; cls < 4; ++cls) {
        const double got = advance_rate(ratio, static_cast<AttackerClass>(cls), static_cast<DefensePosture>(posture));
        bad += std::abs(got - oracle::kAdvance[band * 3 + posture][cls]) > kTableTol;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < kTableSeconds,
          std::to_string(bad) + " mismatches in catalog values, 63 loss cells and 27 advance rows; " + num(secs, 3) + " s"};
}

// 2 ----------------------------------------------------------------------
Verdict combat_oracle() {
  Rng rng(2);
  const int blue_types[] = {1, 2, 3, 8, 9};
  const int red_types[] = {2, 4, 11, 21, 30};
  int bad = 0, exact_03 = 0;
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    std::vector<Platoon> blue, red;
    const auto nb = 1 + rng.index(4), nr = 1 + rng.index(5);
    for (std::size_t i = 0; i < nb; ++i) blue.push_back(platoon(Side::Blue, blue_types[rng.index(5)], 0.4 + 0.6 * rng.uniform01()));
    for (std::size_t i = 0; i < nr; ++i) red.push_back(platoon(Side::Red, red_types[rng.index(5)], 0.4 + 0.6 * rng.uniform01()));
    const int row = k % 9;
    const auto typing = all_typings()[static_cast<std::size_t>(row)];
    oracle::Force ob, orr;
    for (const auto& p : blue) {
      ob.value.push_back(oracle::value(p.spec->combatv, p.spec->size));
      ob.rel.push_back(p.rel);
    }
    for (const auto& p : red) {
      orr.value.push_back(oracle::value(p.spec->combatv, p.spec->size));
      orr.rel.push_back(p.rel);
    }
    const int defender = is_defense(typing.blue) ? 1 : is_defense(typing.red) ? 2 : 0;
    const auto want = oracle::resolve(ob, orr, row, defender);
    const auto got = resolve_combat(blue, red, typing, BoxNode{1, 0, 0, 4.0e6});
    bool ok = static_cast<int>(got.winner) == want.winner && got.rounds == want.rounds;
    for (std::size_t i = 0; i < nb; ++i) worst = std::max(worst, std::abs(got.blue_rel_at_end[i] - want.blue_rel[i]));
    for (std::size_t i = 0; i < nr; ++i) worst = std::max(worst, std::abs(got.red_rel_at_end[i] - want.red_rel[i]));
    const auto& loser = got.winner == Winner::Blue ? got.red_rel_at_end : got.blue_rel_at_end;
    const double lowest = *std::min_element(loser.begin(), loser.end());
    exact_03 += lowest == 0.3;
    const auto& zeroed = got.winner == Winner::Blue ? got.red_rel : got.blue_rel;
    ok = ok && std::all_of(zeroed.begin(), zeroed.end(), [](double r) { return r == 0.0; });
    bad += !ok;
  }
  return {bad == 0 && worst <= kRelTol && exact_03 == 50,
          "50 instances, " + std::to_string(bad) + " winner/round mismatches, max rel error " + num(worst, 3) + ", " +
              std::to_string(exact_03) + "/50 losers end at exactly 0.3"};
}

// 3 ----------------------------------------------------------------------
Verdict valuation_consistency() {
  const auto& s = testutil::bundled();
  SimOptions opt;
  opt.rollout_budget = kSweepRolloutBudget;
  const Simulator sim(s, compose_blue_force(s, 7), opt);
  Rng rng(3);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t arg_full = 0, arg_reduced = 0;
  double best_full = lo, best_reduced = lo;
  for (std::size_t k = 0; k < 1000; ++k) {
    Configuration c;
    for (int i = 0; i < 7; ++i) c.assignment.push_back(1 + static_cast<int>(rng.index(14)));
    const auto r = sim.simulate(c);
    const double full = valuation_with_initials(r.blue_initial, r.blue_final, r.red_initial, r.red_final, r.illegal_moves, opt);
    const double reduced = valuation(r.blue_final, r.red_final, r.illegal_moves, opt);
    lo = std::min(lo, full - reduced);
    hi = std::max(hi, full - reduced);
    if (full < best_full) best_full = full, arg_full = k;
    if (reduced < best_reduced) best_reduced = reduced, arg_reduced = k;
  }
  return {hi - lo <= kValuationTol && arg_full == arg_reduced,
          "1000 simulations, spread of the difference " + num(hi - lo, 3) + ", argmin " + std::to_string(arg_full) + " vs " +
              std::to_string(arg_reduced)};
}

// 4 ----------------------------------------------------------------------
// Per-bin z-scores are reported; the verdict tests each distribution as a
// whole with a chi-square goodness-of-fit, turned into a normal deviate by the
// Wilson-Hilferty transform and held to the same 3 sigma.
struct BinCheck {
  int outside = 0;
  double worst_sigma = 0;
  double chi2 = 0;
  int bins = 0;

  double fit_sigma() const {
    const double k = bins - 1;
    return (std::cbrt(chi2 / k) - (1.0 - 2.0 / (9.0 * k))) / std::sqrt(2.0 / (9.0 * k));
  }
  bool pass() const { return fit_sigma() <= kSigmas; }
};

void check_bin(BinCheck& b, std::size_t count, double p, std::size_t n) {
  const double mean = p * double(n), sd = std::sqrt(double(n) * p * (1 - p));
  const double z = std::abs(double(count) - mean) / sd;
  b.worst_sigma = std::max(b.worst_sigma, z);
  b.outside += z > kSigmas;
  b.chi2 += (double(count) - mean) * (double(count) - mean) / mean;
  ++b.bins;
}

std::string describe(const char* name, const BinCheck& b) {
  return std::string(name) + " fit " + num(b.fit_sigma(), 3) + " sigma (" + std::to_string(b.outside) + "/" +
         std::to_string(b.bins) + " bins beyond 3 sigma, max " + num(b.worst_sigma, 3) + ")";
}

Verdict selection_distributions() {
  Population pop(256);
  std::vector<Configuration> members;
  for (int i = 0; i < 256; ++i) members.push_back(Configuration{{i / 16 + 1, i % 16 + 1}, double(i)});
  pop.update(members, 0);
  Rng rng(4);
  std::vector<std::size_t> rank(256, 0);
  for (std::size_t i = 0; i < kDraws; ++i) ++rank[rank_order_select(pop, rng)];
  BinCheck rb;
  for (std::size_t r = 0; r < 256; ++r) check_bin(rb, rank[r], double(256 - r) / 32896.0, kDraws);

  const auto& g = testutil::bundled().graph;
  const int cur = 7;
  std::vector<std::size_t> moved(15, 0), mutated(15, 0);
  const Configuration c{{cur}, std::nullopt};
  for (std::size_t i = 0; i < kDraws; ++i) {
    ++moved[static_cast<std::size_t>(search_move(c, g, rng).assignment[0])];
    ++mutated[static_cast<std::size_t>(ga_mutate(c, 14, rng).assignment[0])];
  }
  // Distance ranks from the current box: nearest other box gets 13/91.
  std::vector<int> others;
  for (int b = 1; b <= 14; ++b)
    if (b != cur) others.push_back(b);
  std::stable_sort(others.begin(), others.end(), [&](int a, int b) { return g.center_distance(cur, a) < g.center_distance(cur, b); });
  BinCheck sb, mb;
  for (std::size_t k = 0; k < others.size(); ++k) {
    check_bin(sb, moved[static_cast<std::size_t>(others[k])], double(13 - k) / 91.0, kDraws);
    check_bin(mb, mutated[static_cast<std::size_t>(others[k])], 1.0 / 13.0, kDraws);
  }
  const bool pass = rb.pass() && sb.pass() && mb.pass() && moved[cur] == 0 && mutated[cur] == 0;
  return {pass, describe("rank", rb) + "; " + describe("search", sb) + "; " + describe("mutate", mb) +
                    "; current box drawn " + std::to_string(moved[cur] + mutated[cur]) + " times"};
}

// 5 ----------------------------------------------------------------------
Verdict desk_scale() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& s = testutil::mini();
  OptimizerConfig cfg;
  cfg.sim.branching = false;
  double best = std::numeric_limits<double>::infinity();
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b) best = std::min(best, simulate(Configuration{{a, b}, std::nullopt}, s, cfg.sim).x_value);
  const auto r = optimize(s, 2, cfg);
  const double secs = seconds_since(t0);
  return {*r.best.value == best && secs < kMiniSeconds,
          "optimize " + num(*r.best.value, 10) + ", enumeration " + num(best, 10) + ", " + std::to_string(r.evaluations) +
              " evaluations, " + num(secs, 3) + " s"};
}

// 6 ----------------------------------------------------------------------
Verdict convergence() {
  const auto& s = testutil::bundled();
  const Evaluator frozen = [](const Configuration&, std::uint64_t) { return 1.0; };
  OptimizerConfig cfg;
  const auto r = optimize(s, 5, cfg, frozen);
  cfg.max_iterations = kStagnation - 1;
  const auto early = optimize(s, 5, cfg, frozen);
  const bool pass = r.converged && r.top_changed.size() == std::size_t(kStagnation) && !early.converged &&
                    !converged(std::vector<bool>(kStagnation - 1, false)) && converged(std::vector<bool>(kStagnation, false));
  return {pass, "converged after " + std::to_string(r.top_changed.size()) + " stagnant iterations; stopped at " +
                    std::to_string(early.top_changed.size()) + ": " + (early.converged ? "converged" : "not converged")};
}

// 7 ----------------------------------------------------------------------
Verdict anytime() {
  OptimizerConfig cfg;
  const auto r = optimize(testutil::bundled(), 7, cfg);
  int rises = 0;
  for (std::size_t i = 1; i < r.trace.size(); ++i) rises += r.trace[i].best_x > r.trace[i - 1].best_x;
  return {rises == 0 && r.trace.size() > 1, std::to_string(r.trace.size()) + " trace entries, " + std::to_string(rises) +
                                                 " increases, final best " + num(r.trace.back().best_x)};
}

// 8 ----------------------------------------------------------------------
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * double(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = double(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n, mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Verdict platoon_trend() {
  const auto& s = testutil::bundled();
  OptimizerConfig cfg;
  cfg.sim.rollout_budget = kSweepRolloutBudget;
  const auto t_sweep = std::chrono::steady_clock::now();
  const auto rows = sweep(s, 1, 16, kSweepReps, cfg);
  const double sweep_secs = seconds_since(t_sweep);
  std::vector<double> counts, means;
  std::string table;
  for (const auto& r : rows) {
    counts.push_back(r.platoons);
    means.push_back(r.mean);
    table += (table.empty() ? "" : " ") + std::to_string(r.platoons) + ":" + num(r.mean, 3);
  }
  const double rho = spearman(counts, means);
  const auto nstar = halt_threshold(rows);

  OptimizerConfig full;
  const auto t10 = std::chrono::steady_clock::now();
  optimize(s, 10, full);
  const double ten_secs = seconds_since(t10);

  const bool pass = rho <= kSpearmanMax && nstar && *nstar >= kThresholdLo && *nstar <= kThresholdHi &&
                    ten_secs < kTenPlatoonSeconds;
  return {pass, "spearman " + num(rho, 4) + ", n* " + (nstar ? std::to_string(*nstar) : std::string("none")) +
                    ", 10-platoon run " + num(ten_secs, 3) + " s on " + std::to_string(default_threads()) +
                    " threads, sweep " + num(sweep_secs, 3) + " s; means " + table};
}

// 9 ----------------------------------------------------------------------
Verdict clustering_properties() {
  Rng rng(9);
  auto random_config = [&](std::size_t n) {
    Configuration c;
    for (std::size_t i = 0; i < n; ++i) c.assignment.push_back(1 + static_cast<int>(rng.index(4)));
    c.value = std::round((rng.uniform01() - 0.5) * 20.0) / 20.0;  // coarse so equal values occur
    return c;
  };
  int bad = 0;
  const double lo = -0.5, hi = 0.5;
  for (std::size_t k = 0; k < kSimilarityPairs; ++k) {
    const auto a = random_config(3), b = random_config(3);
    const double s = similarity(a, b, lo, hi);
    bad += s != similarity(b, a, lo, hi);
    bad += s < 0.0 || s > 1.0;
    const bool same = a.assignment == b.assignment && *a.value == *b.value;
    bad += (s == 0.0) != same;
    bad += similarity(a, a, lo, hi) != 0.0;
  }
  std::vector<Configuration> configs;
  for (int k = 0; k < 400; ++k) configs.push_back(random_config(5));
  const double tau = 0.35;
  const auto clusters = cluster_all(configs, tau);
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (const auto& c : configs) {
    vmin = std::min(vmin, *c.value);
    vmax = std::max(vmax, *c.value);
  }
  int outside = 0;
  std::multiset<std::pair<std::vector<int>, double>> seen, all;
  for (const auto& cl : clusters) {
    for (const auto& a : cl.members) {
      seen.insert({a.assignment, *a.value});
      for (const auto& b : cl.members) outside += similarity(a, b, vmin, vmax) > tau;
    }
  }
  for (const auto& c : configs) all.insert({c.assignment, *c.value});
  const bool partition = seen == all;
  return {bad == 0 && outside == 0 && partition,
          std::to_string(kSimilarityPairs) + " pairs with " + std::to_string(bad) + " violations; " +
              std::to_string(clusters.size()) + " clusters, " + std::to_string(outside) + " member pairs beyond tau, " +
              (partition ? "each configuration in exactly one cluster" : "membership mismatch")};
}

// 10 ---------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict reproducibility() {
  const fs::path root = fs::temp_directory_path() / "coa_acceptance_repro";
  const fs::path out = root / "out";
  fs::remove_all(root);
  const std::string cli = COA_CLI;
  const std::string common = " --seed 11 --out \"" + out.string() + "\"";
  const std::vector<std::string> commands = {
      "\"" + cli + "\" optimize --platoons 6 --budget 300 --quiet" + common,
      "\"" + cli + "\" cluster" + common,
      "\"" + cli + "\" simulate --config 13,13,9,9,5,5 --budget 300" + common,
  };
  const std::vector<std::string> files = {"population.csv", "trace.csv",   "best.txt",       "clusters.csv",
                                          "clusters.txt",   "clusters.svg", "battle_log.csv", "result.json"};
  std::vector<std::vector<std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(out);
    fs::create_directories(root);
    for (const auto& cmd : commands) {
      if (std::system((cmd + " > \"" + (root / "log.txt").string() + "\"").c_str()) != 0) return {false, "CLI run failed: " + cmd};
    }
    std::vector<std::string> contents;
    for (const auto& f : files) contents.push_back(slurp(out / f));
    runs.push_back(std::move(contents));
  }
  int same = 0;
  std::string which;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!runs[0][i].empty() && runs[0][i] == runs[1][i]) ++same;
    else which += " " + files[i];
  }
  fs::remove_all(root);
  return {same == int(files.size()), std::to_string(same) + "/" + std::to_string(files.size()) +
                                         " files byte-identical" + (which.empty() ? "" : "; differing:" + which)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"table fidelity", table_fidelity},
      {"combat oracle equivalence", combat_oracle},
      {"valuation consistency", valuation_consistency},
      {"selection distributions", selection_distributions},
      {"optimizer at desk scale", desk_scale},
      {"convergence semantics", convergence},
      {"anytime trace", anytime},
      {"platoon-count trend", platoon_trend},
      {"clustering properties", clustering_properties},
      {"reproducibility", reproducibility},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!wanted.empty() && !wanted.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %2d %-28s %s  %s\n", id, criteria[i].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

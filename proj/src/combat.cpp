#include "coa/combat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coa/csv.hpp"
#include "coa/hash.hpp"

namespace coa {
namespace {

using E = Engagement;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxRounds = 10000;
constexpr std::size_t kMaxSideUnits = 64;

constexpr std::array<EngagementTyping, 9> kTypings = {{
    {E::DeliberateAttack, E::DeliberateDefense},
    {E::DeliberateAttack, E::HastyDefense},
    {E::DeliberateDefense, E::DeliberateAttack},
    {E::DeliberateDefense, E::HastyAttack},
    {E::HastyAttack, E::DeliberateDefense},
    {E::HastyAttack, E::HastyDefense},
    {E::HastyDefense, E::DeliberateAttack},
    {E::HastyDefense, E::HastyAttack},
    {E::MeetingEngagement, E::MeetingEngagement},
}};

// Percent losses, (friendly, enemy) per force-ratio column 1:4 .. 4:1.
// The "Deliberate Defense vs Hasty Attack" row is printed with one cell
// missing; it is restored as the mirror of "Hasty Attack vs Deliberate
// Defense" (the only reading consistent with the 13 printed cells).
constexpr int kLossPercent[9][14] = {
    {60, 10, 30, 15, 20, 20, 40, 15, 20, 20, 15, 30, 10, 60},
    {85, 5, 60, 5, 50, 10, 25, 25, 10, 50, 5, 60, 5, 85},
    {60, 10, 30, 15, 20, 20, 40, 15, 20, 20, 15, 30, 10, 60},
    {50, 20, 40, 25, 30, 25, 25, 50, 10, 50, 10, 35, 20, 50},
    {50, 20, 35, 10, 50, 10, 50, 25, 25, 30, 25, 40, 20, 50},
    {60, 10, 40, 10, 30, 15, 15, 15, 15, 30, 10, 50, 10, 60},
    {85, 5, 60, 5, 50, 10, 25, 25, 10, 50, 15, 50, 5, 85},
    {60, 10, 50, 10, 30, 15, 15, 15, 15, 30, 10, 40, 10, 60},
    {85, 50, 60, 10, 35, 15, 10, 10, 15, 35, 10, 60, 50, 85},
};

constexpr double kBandUpper[9] = {1.10, 1.25, 1.45, 1.75, 2.25, 3.0, 4.25, 6.0, kInf};
constexpr double kBandLower[9] = {1.00, 1.11, 1.26, 1.46, 1.76, 2.26, 3.01, 4.26, 6.00};

// Rows 1..27 of the standard advance-rate table, km/day:
// armored, mechanized, infantry, cavalry.
constexpr double kAdvanceRates[27][4] = {
    {4.0, 4.0, 4.0, 3.0},     {2.0, 2.0, 2.0, 1.6},     {1.0, 1.0, 1.0, 0.6},
    {5.0, 4.5, 4.5, 3.5},     {2.25, 2.25, 2.25, 1.5},  {1.25, 1.25, 1.25, 0.7},
    {6.0, 5.0, 5.0, 4.0},     {2.5, 2.5, 2.5, 2.0},     {1.5, 1.5, 1.5, 0.8},
    {9.0, 7.5, 6.5, 6.0},     {4.0, 3.5, 3.0, 2.5},     {2.0, 2.0, 1.75, 0.9},
    {12.0, 10.0, 8.0, 8.0},   {6.0, 5.0, 4.0, 3.0},     {3.0, 2.5, 2.0, 1.0},
    {16.0, 13.0, 10.0, 12.0}, {8.0, 7.0, 5.0, 6.0},     {4.0, 3.0, 2.5, 2.0},
    {20.0, 16.0, 12.0, 15.0}, {10.0, 8.0, 6.0, 7.0},    {5.0, 4.0, 3.0, 4.0},
    {40.0, 30.0, 18.0, 28.0}, {20.0, 16.0, 10.0, 14.0}, {10.0, 8.0, 6.0, 7.0},
    {60.0, 48.0, 24.0, 40.0}, {30.0, 24.0, 12.0, 12.0}, {30.0, 24.0, 12.0, 12.0},
};

int typing_row(EngagementTyping typing) {
  for (std::size_t i = 0; i < kTypings.size(); ++i) {
    if (kTypings[i] == typing) return static_cast<int>(i);
  }
  throw CombatError("illegal engagement typing " + typing_label(typing));
}

LossTable build_standard_loss_table() {
  LossTable t;
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t c = 0; c < 7; ++c) {
      t.rows[r][c] = {kLossPercent[r][2 * c] / 100.0, kLossPercent[r][2 * c + 1] / 100.0};
    }
  }
  return t;
}

AdvanceRateTable build_standard_advance_table() {
  AdvanceRateTable t;
  for (std::size_t i = 0; i < 27; ++i) {
    auto& row = t.rows[i];
    row.number = static_cast<int>(i + 1);
    row.pp_low = kBandLower[i / 3];
    row.pp_high = kBandUpper[i / 3];
    row.posture = static_cast<DefensePosture>(i % 3);
    for (std::size_t c = 0; c < 4; ++c) row.rates[c] = kAdvanceRates[i][c];
  }
  return t;
}

DefensePosture parse_posture(const std::string& text) {
  if (text.rfind("Hasty", 0) == 0) return DefensePosture::HastyDelay;
  if (text.rfind("Prepared", 0) == 0) return DefensePosture::Prepared;
  if (text.rfind("Fortified", 0) == 0) return DefensePosture::Fortified;
  throw CombatError("unknown defense posture '" + text + "'");
}

// Index of the unit whose rel is lowest (first on ties).
std::size_t trigger_index(std::span<const double> rel) {
  std::size_t idx = 0;
  for (std::size_t i = 1; i < rel.size(); ++i) {
    if (rel[i] < rel[idx]) idx = i;
  }
  return idx;
}

double side_value(std::span<const double> value, std::span<const double> rel) {
  double v = 0.0;
  for (std::size_t i = 0; i < value.size(); ++i) v += value[i] * rel[i];
  return v;
}

}  // namespace

const char* engagement_name(Engagement e) {
  switch (e) {
    case E::MeetingEngagement: return "Meeting Engagement";
    case E::DeliberateAttack: return "Deliberate Attack";
    case E::DeliberateDefense: return "Deliberate Defense";
    case E::HastyAttack: return "Hasty Attack";
    case E::HastyDefense: return "Hasty Defense";
  }
  return "?";
}

bool is_defense(Engagement e) { return e == E::DeliberateDefense || e == E::HastyDefense; }

bool is_legal(EngagementTyping typing) {
  return std::find(kTypings.begin(), kTypings.end(), typing) != kTypings.end();
}

std::string typing_label(EngagementTyping typing) {
  return std::string(engagement_name(typing.blue)) + " vs " + engagement_name(typing.red);
}

const std::array<EngagementTyping, 9>& all_typings() { return kTypings; }

const char* winner_name(Winner w) {
  switch (w) {
    case Winner::Blue: return "blue";
    case Winner::Red: return "red";
    case Winner::None: return "none";
  }
  return "?";
}

double platoon_value(const UnitTypeSpec& spec) { return spec.combatv / (16.0 * spec.size); }

double force_value(std::span<const Platoon> units) {
  double total = 0.0;
  for (const auto& p : units) {
    if (p.side != units.front().side) throw CombatError("force_value over mixed sides");
    if (p.active()) total += platoon_value(*p.spec) * p.rel;
  }
  return total;
}

EngagementTyping classify_engagement(double blue_arrival_s, double red_arrival_s,
                                     const EngagementParams& params) {
  const double delta = red_arrival_s - blue_arrival_s;  // > 0: blue was there first
  const double gap = std::abs(delta);
  if (gap <= params.t_meet_s) return {E::MeetingEngagement, E::MeetingEngagement};
  const bool deliberate = gap > params.t_hasty_s;
  const E defense = deliberate ? E::DeliberateDefense : E::HastyDefense;
  const E attack = deliberate ? E::DeliberateAttack : E::HastyAttack;
  return delta > 0 ? EngagementTyping{defense, attack} : EngagementTyping{attack, defense};
}

const LossTable& LossTable::standard() {
  static const LossTable table = build_standard_loss_table();
  return table;
}

LossTable LossTable::load_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.size() != 10) throw CombatError(path.string() + ": expected a header and 9 rows");
  LossTable t;
  for (std::size_t r = 0; r < 9; ++r) {
    const auto& row = rows[r + 1];
    const std::string where = path.filename().string() + " row " + std::to_string(r + 2);
    if (row.size() != 15) throw CombatError(where + ": expected 15 columns");
    if (row[0] != typing_label(kTypings[r])) throw CombatError(where + ": unexpected row label '" + row[0] + "'");
    for (std::size_t c = 0; c < 7; ++c) {
      t.rows[r][c] = {csv::to_double(row[1 + 2 * c], where) / 100.0,
                      csv::to_double(row[2 + 2 * c], where) / 100.0};
    }
  }
  if (t.digest() != kExpectedDigest) {
    throw CombatError(path.string() + ": loss table digest " + to_hex(t.digest()) + " does not match " +
                      to_hex(kExpectedDigest));
  }
  return t;
}

const LossTable::Row& LossTable::row(EngagementTyping typing) const {
  return rows[static_cast<std::size_t>(typing_row(typing))];
}

LossFractions LossTable::lookup(double ratio, EngagementTyping typing) const {
  if (!(ratio > 0.0)) throw CombatError("force ratio must be positive");
  const Row& r = row(typing);
  if (ratio <= kForceRatioAnchors.front()) return r.front();
  if (ratio >= kForceRatioAnchors.back()) return r.back();
  std::size_t i = 0;
  while (ratio >= kForceRatioAnchors[i + 1]) ++i;
  const double lo = kForceRatioAnchors[i];
  const double hi = kForceRatioAnchors[i + 1];
  const double t = (ratio - lo) / (hi - lo);
  const auto& a = r[i];
  const auto& b = r[i + 1];
  return {a.friendly + t * (b.friendly - a.friendly), a.enemy + t * (b.enemy - a.enemy)};
}

std::uint64_t LossTable::digest() const {
  std::string text;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    text += typing_label(kTypings[r]);
    for (const auto& cell : rows[r]) {
      text += ',' + csv::format_double(cell.friendly) + ',' + csv::format_double(cell.enemy);
    }
    text += '\n';
  }
  return fnv1a64(text);
}

LossFractions loss_fractions(double ratio, EngagementTyping typing) {
  return LossTable::standard().lookup(ratio, typing);
}

void apply_losses(std::span<Platoon> blue, std::span<Platoon> red, LossFractions fractions) {
  for (auto& p : blue) {
    if (p.active()) p.rel *= 1.0 - fractions.friendly;
  }
  for (auto& p : red) {
    if (p.active()) p.rel *= 1.0 - fractions.enemy;
  }
}

const AdvanceRateTable& AdvanceRateTable::standard() {
  static const AdvanceRateTable table = build_standard_advance_table();
  return table;
}

AdvanceRateTable AdvanceRateTable::load_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.size() != 28) throw CombatError(path.string() + ": expected a header and 27 rows");
  AdvanceRateTable t;
  for (std::size_t i = 0; i < 27; ++i) {
    const auto& row = rows[i + 1];
    const std::string where = path.filename().string() + " row " + std::to_string(i + 2);
    if (row.size() != 9) throw CombatError(where + ": expected 9 columns");
    auto& out = t.rows[i];
    out.number = csv::to_int(row[0], where);
    out.pp_low = csv::to_double(row[2], where);
    out.pp_high = row[3].empty() ? kInf : csv::to_double(row[3], where);
    out.posture = parse_posture(row[4]);
    for (std::size_t c = 0; c < 4; ++c) out.rates[c] = csv::to_double(row[5 + c], where);
  }
  if (t.digest() != kExpectedDigest) {
    throw CombatError(path.string() + ": advance-rate table digest " + to_hex(t.digest()) +
                      " does not match " + to_hex(kExpectedDigest));
  }
  return t;
}

int AdvanceRateTable::band(double pp_ratio) {
  if (!(pp_ratio > 0.0)) throw CombatError("P/P ratio must be positive");
  int b = 0;
  while (pp_ratio > kBandUpper[b]) ++b;
  return b;
}

const AdvanceRateTable::Row& AdvanceRateTable::row(double pp_ratio, DefensePosture posture) const {
  return rows[static_cast<std::size_t>(band(pp_ratio) * 3 + static_cast<int>(posture))];
}

double AdvanceRateTable::rate(double pp_ratio, AttackerClass cls, DefensePosture posture) const {
  return row(pp_ratio, posture).rates[static_cast<std::size_t>(cls)];
}

std::uint64_t AdvanceRateTable::digest() const {
  std::string text;
  for (const auto& r : rows) {
    text += std::to_string(r.number) + ',' + csv::format_double(r.pp_low) + ',' +
            (std::isinf(r.pp_high) ? std::string() : csv::format_double(r.pp_high)) + ',' +
            std::to_string(static_cast<int>(r.posture));
    for (double v : r.rates) text += ',' + csv::format_double(v);
    text += '\n';
  }
  return fnv1a64(text);
}

double advance_rate(double pp_ratio, AttackerClass cls, DefensePosture posture) {
  return AdvanceRateTable::standard().rate(pp_ratio, cls, posture);
}

double combat_duration(double box_area_m2, double rate_km_per_day) {
  if (!(rate_km_per_day > 0.0)) throw CombatError("advance rate must be positive");
  if (box_area_m2 < 0.0) throw CombatError("box area must be non-negative");
  const double rate_mps = rate_km_per_day * 1000.0 / 86400.0;
  return std::sqrt(box_area_m2) / rate_mps;
}

CombatTiming combat_timing(double blue_value, double blue_armor_value, double red_value,
                           double red_armor_value, EngagementTyping typing, const BoxNode& box) {
  CombatTiming t;
  // Meeting engagements count red, the advancing side, as the attacker.
  t.attacker = is_defense(typing.blue) || typing.blue == E::MeetingEngagement ? Side::Red : Side::Blue;
  const Engagement defense = t.attacker == Side::Red ? typing.blue : typing.red;
  t.posture = defense == E::DeliberateDefense ? DefensePosture::Prepared : DefensePosture::HastyDelay;
  const double att = t.attacker == Side::Red ? red_value : blue_value;
  const double att_armor = t.attacker == Side::Red ? red_armor_value : blue_armor_value;
  const double def = t.attacker == Side::Red ? blue_value : red_value;
  t.attacker_class = att > 0.0 && att_armor >= 0.5 * att ? AttackerClass::Armored : AttackerClass::Mechanized;
  t.pp_ratio = def > 0.0 ? att / def : kInf;
  if (!(t.pp_ratio > 0.0)) t.pp_ratio = std::numeric_limits<double>::min();
  t.rate_km_per_day = advance_rate(t.pp_ratio, t.attacker_class, t.posture);
  t.duration_s = combat_duration(box.area_m2, t.rate_km_per_day);
  return t;
}

RoundsResult run_rounds(std::span<const double> blue_value, std::span<double> blue_rel,
                        std::span<const double> red_value, std::span<double> red_rel,
                        EngagementTyping typing, const CombatParams& params) {
  if (blue_rel.empty() || red_rel.empty()) throw CombatError("combat needs units on both sides");
  const LossTable& table = params.table ? *params.table : LossTable::standard();
  const double thr = params.threshold;
  const bool aggregate = params.predicate == DefeatPredicate::SideAggregate;
  // Under SideAggregate the tracked level is the side's cumulative scale factor.
  double blue_scale = 1.0;
  double red_scale = 1.0;

  RoundsResult result;
  for (int round = 1; round <= kMaxRounds; ++round) {
    const double vb = side_value(blue_value, blue_rel);
    const double vr = side_value(red_value, red_rel);
    const LossFractions f = table.lookup(vb / vr, typing);
    if (f.friendly <= 0.0 && f.enemy <= 0.0) throw CombatError("stalemate table cell");

    const std::size_t bi = trigger_index(blue_rel);
    const std::size_t ri = trigger_index(red_rel);
    const double mb = aggregate ? blue_scale : blue_rel[bi];
    const double mr = aggregate ? red_scale : red_rel[ri];
    const double sb = f.friendly > 0.0 && mb * (1.0 - f.friendly) <= thr ? (1.0 - thr / mb) / f.friendly : kInf;
    const double sr = f.enemy > 0.0 && mr * (1.0 - f.enemy) <= thr ? (1.0 - thr / mr) / f.enemy : kInf;

    if (std::isinf(sb) && std::isinf(sr)) {
      for (auto& r : blue_rel) r *= 1.0 - f.friendly;
      for (auto& r : red_rel) r *= 1.0 - f.enemy;
      blue_scale *= 1.0 - f.friendly;
      red_scale *= 1.0 - f.enemy;
      continue;
    }

    result.rounds = round;
    Winner winner;
    if (sb < sr) {
      winner = Winner::Red;
    } else if (sr < sb) {
      winner = Winner::Blue;
    } else if (is_defense(typing.blue)) {
      winner = Winner::Blue;
    } else if (is_defense(typing.red)) {
      winner = Winner::Red;
    } else {
      winner = Winner::None;  // meeting engagement, decided on remaining force below
    }
    const double s = std::clamp(std::min(sb, sr), 0.0, 1.0);
    const bool blue_hits = sb <= sr;
    const bool red_hits = sr <= sb;
    // A side that hits the threshold is scaled so its trigger lands exactly on it.
    const double kb = blue_hits ? (mb > thr ? thr / mb : 1.0) : 1.0 - s * f.friendly;
    const double kr = red_hits ? (mr > thr ? thr / mr : 1.0) : 1.0 - s * f.enemy;
    for (auto& r : blue_rel) r *= kb;
    for (auto& r : red_rel) r *= kr;
    if (blue_hits && !aggregate && mb > thr) blue_rel[bi] = thr;
    if (red_hits && !aggregate && mr > thr) red_rel[ri] = thr;

    if (winner == Winner::None) {
      const double b_left = side_value(blue_value, blue_rel);
      const double r_left = side_value(red_value, red_rel);
      winner = b_left > r_left ? Winner::Blue : Winner::Red;
    }
    result.winner = winner;
    return result;
  }
  throw CombatError("combat did not terminate");
}

CombatOutcome resolve_combat(std::span<const Platoon> blue, std::span<const Platoon> red,
                             EngagementTyping typing, const BoxNode& box, const CombatParams& params) {
  if (blue.empty() || red.empty()) throw CombatError("combat needs units on both sides");
  if (blue.size() > kMaxSideUnits || red.size() > kMaxSideUnits) throw CombatError("too many units in one combat");
  std::vector<double> bv, rv;
  CombatOutcome out;
  double b_armor = 0.0, r_armor = 0.0;
  for (const auto& p : blue) {
    if (p.side != Side::Blue || !p.active()) throw CombatError("blue side must hold active blue platoons");
    bv.push_back(platoon_value(*p.spec));
    out.blue_rel_at_end.push_back(p.rel);
    if (is_armor(*p.spec)) b_armor += bv.back() * p.rel;
  }
  for (const auto& p : red) {
    if (p.side != Side::Red || !p.active()) throw CombatError("red side must hold active red platoons");
    rv.push_back(platoon_value(*p.spec));
    out.red_rel_at_end.push_back(p.rel);
    if (is_armor(*p.spec)) r_armor += rv.back() * p.rel;
  }
  out.timing = combat_timing(force_value(blue), b_armor, force_value(red), r_armor, typing, box);
  out.duration_s = out.timing.duration_s;
  const auto rr = run_rounds(bv, out.blue_rel_at_end, rv, out.red_rel_at_end, typing, params);
  out.winner = rr.winner;
  out.rounds = rr.rounds;
  out.blue_rel = out.blue_rel_at_end;
  out.red_rel = out.red_rel_at_end;
  auto& losers = out.winner == Winner::Blue ? out.red_rel : out.blue_rel;
  std::fill(losers.begin(), losers.end(), 0.0);
  return out;
}

}  // namespace coa

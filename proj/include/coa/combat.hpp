#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coa/scenario.hpp"

namespace coa {

class CombatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Engagement : std::uint8_t {
  MeetingEngagement,
  DeliberateAttack,
  DeliberateDefense,
  HastyAttack,
  HastyDefense,
};

const char* engagement_name(Engagement e);
bool is_defense(Engagement e);

struct EngagementTyping {
  Engagement blue = Engagement::MeetingEngagement;
  Engagement red = Engagement::MeetingEngagement;

  bool operator==(const EngagementTyping&) const = default;
};

/// Attack pairs with defense, meeting pairs with meeting.
bool is_legal(EngagementTyping typing);
std::string typing_label(EngagementTyping typing);

/// The nine legal pairings in loss-table row order (blue listed first).
const std::array<EngagementTyping, 9>& all_typings();

enum class Winner : std::uint8_t { None, Blue, Red };
const char* winner_name(Winner w);

/// Combat value of one platoon: combatv / (16 * size).
double platoon_value(const UnitTypeSpec& spec);

/// Sum of platoon_value * rel over active units. Throws CombatError on mixed sides.
double force_value(std::span<const Platoon> units);

/// Types a combat from the two sides' arrival times. The side that arrived
/// first defends; within t_meet_s of each other it is a meeting engagement.
EngagementTyping classify_engagement(double blue_arrival_s, double red_arrival_s,
                                     const EngagementParams& params);

struct LossFractions {
  double friendly = 0.0;
  double enemy = 0.0;

  bool operator==(const LossFractions&) const = default;
};

/// Force ratios (friendly:enemy) of the loss table columns.
inline constexpr std::array<double, 7> kForceRatioAnchors = {0.25, 1.0 / 3.0, 0.5, 1.0, 2.0, 3.0, 4.0};

class LossTable {
 public:
  using Row = std::array<LossFractions, 7>;

  static const LossTable& standard();
  /// Parses the CSV and rejects it unless its digest matches the built-in table.
  static LossTable load_csv(const std::filesystem::path& path);

  const Row& row(EngagementTyping typing) const;
  /// Exact cells at anchors, linear in the ratio between them, clamped
  /// to the 1:4 and 4:1 columns outside.
  LossFractions lookup(double ratio, EngagementTyping typing) const;

  std::uint64_t digest() const;
  static constexpr std::uint64_t kExpectedDigest = 0xef7480d40e2c4254ULL;

  std::array<Row, 9> rows{};
};

LossFractions loss_fractions(double ratio, EngagementTyping typing);

/// Scales every active blue rel by (1 - friendly) and every active red rel by
/// (1 - enemy).
void apply_losses(std::span<Platoon> blue, std::span<Platoon> red, LossFractions fractions);

enum class AttackerClass : std::uint8_t { Armored, Mechanized, Infantry, Cavalry };
enum class DefensePosture : std::uint8_t { HastyDelay, Prepared, Fortified };

class AdvanceRateTable {
 public:
  struct Row {
    int number = 0;
    double pp_low = 0.0;
    double pp_high = 0.0;  // infinity for the open-ended band
    DefensePosture posture = DefensePosture::HastyDelay;
    std::array<double, 4> rates{};
  };

  static const AdvanceRateTable& standard();
  static AdvanceRateTable load_csv(const std::filesystem::path& path);

  /// Resistance band 0..8 for an attacker/defender ratio; below 1.0 clamps to 0.
  static int band(double pp_ratio);
  const Row& row(double pp_ratio, DefensePosture posture) const;
  double rate(double pp_ratio, AttackerClass cls, DefensePosture posture) const;

  std::uint64_t digest() const;
  static constexpr std::uint64_t kExpectedDigest = 0x796c7d1309db0b52ULL;

  std::array<Row, 27> rows{};
};

/// km/day from the standard table.
double advance_rate(double pp_ratio, AttackerClass cls, DefensePosture posture);

/// Seconds to fight across a box: sqrt(area) / rate, with rate in m/s.
double combat_duration(double box_area_m2, double rate_km_per_day);

enum class DefeatPredicate : std::uint8_t {
  AnyPlatoon,     // a side falls when any of its platoons would drop below the threshold
  SideAggregate,  // a side falls when its value relative to the combat start would
};

struct CombatParams {
  double threshold = 0.3;
  DefeatPredicate predicate = DefeatPredicate::AnyPlatoon;
  const LossTable* table = nullptr;  // nullptr selects LossTable::standard()
};

/// Attacker, posture and duration of a combat, fixed at its start.
struct CombatTiming {
  Side attacker = Side::Red;
  double pp_ratio = 0.0;
  AttackerClass attacker_class = AttackerClass::Mechanized;
  DefensePosture posture = DefensePosture::HastyDelay;
  double rate_km_per_day = 0.0;
  double duration_s = 0.0;
};

/// `armor_value` is the part of a side's force value held by tank platoons.
CombatTiming combat_timing(double blue_value, double blue_armor_value, double red_value,
                           double red_armor_value, EngagementTyping typing, const BoxNode& box);

struct RoundsResult {
  Winner winner = Winner::None;
  int rounds = 0;
};

/// Round loop on raw arrays. `*_value` holds platoon_value per unit; the rels
/// are advanced in place to the end of the final (scaled) round, before the
/// loser is zeroed.
RoundsResult run_rounds(std::span<const double> blue_value, std::span<double> blue_rel,
                        std::span<const double> red_value, std::span<double> red_rel,
                        EngagementTyping typing, const CombatParams& params = {});

struct CombatOutcome {
  Winner winner = Winner::None;
  std::vector<double> blue_rel;         // after the loser is zeroed
  std::vector<double> red_rel;
  std::vector<double> blue_rel_at_end;  // end of the final round, before zeroing
  std::vector<double> red_rel_at_end;
  int rounds = 0;
  double duration_s = 0.0;
  bool interrupted = false;
  CombatTiming timing;
};

CombatOutcome resolve_combat(std::span<const Platoon> blue, std::span<const Platoon> red,
                             EngagementTyping typing, const BoxNode& box,
                             const CombatParams& params = {});

}  // namespace coa

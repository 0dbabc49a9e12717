#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "coa/scenario.hpp"

namespace coa {

class ClusterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Number of slots assigned to different boxes.
int struct_sim(const Configuration& a, const Configuration& b);

/// 1 - (1 - struct_sim/n) * (1 - |dx| / (v_max - v_min)). The value term is
/// 0 when v_max == v_min.
double similarity(const Configuration& a, const Configuration& b, double v_min, double v_max);

struct AllocationCell {
  int box = 0;
  std::string type;   // platoon label, e.g. "AIP"
  double mean = 0.0;  // average count per member
};

struct Cluster {
  std::vector<Configuration> members;
  Configuration best;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::vector<AllocationCell> allocation;  // by box, then type; zero cells omitted
};

/// Single pass in ascending x_value (stable). A configuration joins the
/// cluster whose members are all within tau and whose largest distance to it
/// is smallest; otherwise it founds a new cluster. Clusters come back in
/// founding order, so the first holds the global best. Stats are not filled.
std::vector<Cluster> cluster_all(const std::vector<Configuration>& configs, double tau);

/// Fills best, min/median/max and the mean allocation. `slot_types` holds the
/// label of every platoon slot.
void cluster_stats(Cluster& cluster, const std::vector<std::string>& slot_types);

struct ClusterPoint {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;  // proportional to member count, largest cluster = 1
  std::string color;    // "#rrggbb"
};

/// Blue below zero, white at zero, red above; linear and clipped at the
/// observed extremes.
std::string value_color(double v, double v_min, double v_max);

/// Planar positions for the first k clusters: classical scaling of the
/// pairwise distances between best members, refined by stress majorization,
/// centered on the centroid.
std::vector<ClusterPoint> layout_topk(const std::vector<Cluster>& clusters, std::size_t k, double v_min,
                                      double v_max);

/// Sum over pairs of (embedded distance - target distance)^2.
double layout_stress(const std::vector<ClusterPoint>& points, const std::vector<std::vector<double>>& target);

}  // namespace coa

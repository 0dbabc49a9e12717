#include "coa/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

namespace coa {
namespace {

double value_of(const Configuration& c) {
  if (!c.value) throw ClusterError("configuration has no x_value");
  return *c.value;
}

using Matrix = std::vector<std::vector<double>>;

const Configuration& best_of(const Cluster& c) {
  if (c.members.empty()) return c.best;
  return *std::min_element(c.members.begin(), c.members.end(),
                           [](const Configuration& a, const Configuration& b) { return value_of(a) < value_of(b); });
}

// Cyclic Jacobi rotations; returns eigenvalues and eigenvectors as columns.
void jacobi_eigen(Matrix a, std::vector<double>& values, Matrix& vectors) {
  const std::size_t n = a.size();
  vectors.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) vectors[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors[k][p], vkq = vectors[k][q];
          vectors[k][p] = c * vkp - s * vkq;
          vectors[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i][i];
}

}  // namespace

int struct_sim(const Configuration& a, const Configuration& b) {
  if (a.assignment.size() != b.assignment.size()) throw ClusterError("configurations differ in length");
  int d = 0;
  for (std::size_t i = 0; i < a.assignment.size(); ++i) d += a.assignment[i] != b.assignment[i] ? 1 : 0;
  return d;
}

double similarity(const Configuration& a, const Configuration& b, double v_min, double v_max) {
  const double va = value_of(a), vb = value_of(b);
  if (v_max < v_min) throw ClusterError("v_max below v_min");
  const double n = static_cast<double>(a.assignment.size());
  const double s = n > 0 ? static_cast<double>(struct_sim(a, b)) / n : 0.0;
  const double range = v_max - v_min;
  const double dv = range > 0.0 ? std::min(1.0, std::abs(va - vb) / range) : 0.0;
  return 1.0 - (1.0 - s) * (1.0 - dv);
}

std::vector<Cluster> cluster_all(const std::vector<Configuration>& configs, double tau) {
  if (configs.empty()) return {};
  double v_min = std::numeric_limits<double>::infinity(), v_max = -v_min;
  for (const auto& c : configs) {
    v_min = std::min(v_min, value_of(c));
    v_max = std::max(v_max, value_of(c));
  }
  std::vector<std::size_t> order(configs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return *configs[a].value < *configs[b].value; });

  std::vector<Cluster> clusters;
  for (std::size_t idx : order) {
    const auto& c = configs[idx];
    std::size_t chosen = clusters.size();
    double chosen_max = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      double worst = 0.0;
      for (const auto& m : clusters[k].members) {
        worst = std::max(worst, similarity(c, m, v_min, v_max));
        if (worst > tau) break;
      }
      if (worst <= tau && worst < chosen_max) {
        chosen = k;
        chosen_max = worst;
      }
    }
    if (chosen == clusters.size()) clusters.emplace_back();
    clusters[chosen].members.push_back(c);
  }
  return clusters;
}

void cluster_stats(Cluster& cluster, const std::vector<std::string>& slot_types) {
  if (cluster.members.empty()) throw ClusterError("empty cluster");
  std::vector<double> values;
  for (const auto& m : cluster.members) values.push_back(value_of(m));
  const auto best = std::min_element(values.begin(), values.end());
  cluster.best = cluster.members[static_cast<std::size_t>(best - values.begin())];
  std::sort(values.begin(), values.end());
  cluster.min = values.front();
  cluster.max = values.back();
  const std::size_t h = values.size() / 2;
  cluster.median = values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);

  std::map<std::pair<int, std::string>, double> counts;
  for (const auto& m : cluster.members) {
    if (m.assignment.size() != slot_types.size()) throw ClusterError("slot labels do not match configuration length");
    for (std::size_t i = 0; i < m.assignment.size(); ++i) counts[{m.assignment[i], slot_types[i]}] += 1.0;
  }
  cluster.allocation.clear();
  const double k = static_cast<double>(cluster.members.size());
  for (const auto& [key, count] : counts) cluster.allocation.push_back({key.first, key.second, count / k});
}

std::string value_color(double v, double v_min, double v_max) {
  double r = 1.0, g = 1.0, b = 1.0;
  if (v < 0.0 && v_min < 0.0) {
    const double t = std::clamp(v / v_min, 0.0, 1.0);
    r = g = 1.0 - t;
  } else if (v > 0.0 && v_max > 0.0) {
    const double t = std::clamp(v / v_max, 0.0, 1.0);
    g = b = 1.0 - t;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(r * 255)),
                static_cast<int>(std::lround(g * 255)), static_cast<int>(std::lround(b * 255)));
  return buf;
}

double layout_stress(const std::vector<ClusterPoint>& p, const Matrix& target) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double d = std::hypot(p[i].x - p[j].x, p[i].y - p[j].y);
      s += (d - target[i][j]) * (d - target[i][j]);
    }
  }
  return s;
}

std::vector<ClusterPoint> layout_topk(const std::vector<Cluster>& clusters, std::size_t k, double v_min,
                                      double v_max) {
  if (k < 1) throw ClusterError("k must be at least 1");
  const std::size_t n = std::min(k, clusters.size());
  std::vector<ClusterPoint> pts(n);
  if (n == 0) return pts;

  Matrix dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dist[i][j] = dist[j][i] = similarity(best_of(clusters[i]), best_of(clusters[j]), v_min, v_max);

  if (n > 1) {
    // Classical scaling start.
    Matrix b(n, std::vector<double>(n, 0.0));
    std::vector<double> row_mean(n, 0.0);
    double all_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) row_mean[i] += dist[i][j] * dist[i][j];
      all_mean += row_mean[i];
      row_mean[i] /= static_cast<double>(n);
    }
    all_mean /= static_cast<double>(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        b[i][j] = -0.5 * (dist[i][j] * dist[i][j] - row_mean[i] - row_mean[j] + all_mean);
    std::vector<double> ev;
    Matrix vec;
    jacobi_eigen(b, ev, vec);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t c) { return ev[a] > ev[c]; });
    for (int axis = 0; axis < 2 && static_cast<std::size_t>(axis) < n; ++axis) {
      const std::size_t e = idx[static_cast<std::size_t>(axis)];
      const double scale = ev[e] > 0.0 ? std::sqrt(ev[e]) : 0.0;
      // Fix the eigenvector sign so the layout does not depend on rotation order.
      double sign = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(vec[i][e]) > 1e-12) {
          sign = vec[i][e] < 0 ? -1.0 : 1.0;
          break;
        }
      }
      for (std::size_t i = 0; i < n; ++i) (axis == 0 ? pts[i].x : pts[i].y) = sign * scale * vec[i][e];
    }

    // Stress majorization (Guttman transform with unit weights).
    double stress = layout_stress(pts, dist);
    for (int it = 0; it < 5000 && stress > 0.0; ++it) {
      std::vector<ClusterPoint> next(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          const double d = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
          const double ratio = d > 1e-15 ? dist[i][j] / d : 0.0;
          next[i].x += ratio * (pts[i].x - pts[j].x) + pts[j].x;
          next[i].y += ratio * (pts[i].y - pts[j].y) + pts[j].y;
        }
        next[i].x /= static_cast<double>(n);
        next[i].y /= static_cast<double>(n);
      }
      const double s = layout_stress(next, dist);
      if (s >= stress) break;
      const bool done = stress - s < 1e-15;
      pts = std::move(next);
      stress = s;
      if (done) break;
    }
    double cx = 0.0, cy = 0.0;
    for (const auto& p : pts) {
      cx += p.x;
      cy += p.y;
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    for (auto& p : pts) {
      p.x -= cx;
      p.y -= cy;
    }
  }

  std::size_t largest = 1;
  for (std::size_t i = 0; i < n; ++i) largest = std::max(largest, clusters[i].members.size());
  for (std::size_t i = 0; i < n; ++i) {
    pts[i].radius = static_cast<double>(clusters[i].members.size()) / static_cast<double>(largest);
    pts[i].color = value_color(value_of(best_of(clusters[i])), v_min, v_max);
  }
  return pts;
}

}  // namespace coa

#pragma once

// Slow, independent reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "morseunc/grid.hpp"

namespace oracle {

using morseunc::ScalarGrid;
using morseunc::VertexId;

inline bool sos_less(const ScalarGrid& g, VertexId a, VertexId b) {
  return g[a] < g[b] || (g[a] == g[b] && a < b);
}

inline std::vector<std::pair<VertexId, bool>> neighbors(const ScalarGrid& g, VertexId v) {
  const long w = static_cast<long>(g.width()), h = static_cast<long>(g.height());
  const long r = v / w, c = v % w;
  static const int dr[6] = {0, 1, 1, 0, -1, -1};
  static const int dc[6] = {1, 1, 0, -1, -1, 0};
  std::vector<std::pair<VertexId, bool>> out;
  for (int s = 0; s < 6; ++s) {
    const long rr = r + dr[s], cc = c + dc[s];
    if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
    out.emplace_back(static_cast<VertexId>(rr * w + cc), dr[s] != 0 && dc[s] != 0);
  }
  return out;
}

// Steepest ascent by slope (diagonals are sqrt(2) long), ties to the SoS-greater neighbor.
inline VertexId step_up(const ScalarGrid& g, VertexId v) {
  VertexId best = v;
  double best_slope = -1.0;
  for (auto [u, diag] : neighbors(g, v)) {
    if (!sos_less(g, v, u)) continue;
    const double slope = (double(g[u]) - double(g[v])) / (diag ? std::sqrt(2.0) : 1.0);
    if (best == v || slope > best_slope || (slope == best_slope && sos_less(g, best, u))) {
      best = u;
      best_slope = slope;
    }
  }
  return best;
}

// Traces every vertex independently with no memoization.
inline std::vector<VertexId> trace_labels(const ScalarGrid& g) {
  std::vector<VertexId> out(g.size());
  for (VertexId v = 0; v < g.size(); ++v) {
    VertexId u = v;
    for (std::size_t steps = 0; steps <= g.size(); ++steps) {
      const VertexId next = step_up(g, u);
      if (next == u) break;
      u = next;
    }
    out[v] = u;
  }
  return out;
}

struct Pair {
  VertexId extremum;
  VertexId saddle;
  VertexId absorber;
  double persistence;
  auto operator<=>(const Pair&) const = default;
};

// Components of the superlevel set made of the `count` highest vertices, each
// reported as the set of its members' ids, recomputed from scratch by BFS.
inline std::vector<std::vector<VertexId>> superlevel_components(const ScalarGrid& g,
                                                                const std::vector<VertexId>& desc,
                                                                std::size_t count) {
  std::vector<char> in(g.size(), 0);
  for (std::size_t i = 0; i < count; ++i) in[desc[i]] = 1;
  std::vector<char> seen(g.size(), 0);
  std::vector<std::vector<VertexId>> comps;
  for (std::size_t i = 0; i < count; ++i) {
    const VertexId s = desc[i];
    if (seen[s]) continue;
    std::vector<VertexId> comp;
    std::queue<VertexId> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const VertexId v = q.front();
      q.pop();
      comp.push_back(v);
      for (auto [u, diag] : neighbors(g, v)) {
        if (in[u] && !seen[u]) {
          seen[u] = 1;
          q.push(u);
        }
      }
    }
    comps.push_back(std::move(comp));
  }
  return comps;
}

// Sweeps every threshold, recomputing components each time; at each merge the
// component with the SoS-highest maximum survives.
inline std::vector<Pair> superlevel_pairs(const ScalarGrid& g) {
  std::vector<VertexId> desc(g.size());
  std::iota(desc.begin(), desc.end(), 0);
  std::sort(desc.begin(), desc.end(), [&](VertexId a, VertexId b) { return sos_less(g, b, a); });
  auto top = [&](const std::vector<VertexId>& comp) {
    return *std::max_element(comp.begin(), comp.end(),
                             [&](VertexId a, VertexId b) { return sos_less(g, a, b); });
  };
  std::vector<Pair> out;
  std::vector<VertexId> prev_tops;
  for (std::size_t t = 1; t <= g.size(); ++t) {
    const VertexId v = desc[t - 1];
    const auto comps = superlevel_components(g, desc, t);
    // Previous tops that now share v's component (excluding v itself) merged at v.
    std::vector<VertexId> joined;
    for (const auto& comp : comps) {
      if (std::find(comp.begin(), comp.end(), v) == comp.end()) continue;
      for (VertexId m : prev_tops) {
        if (std::find(comp.begin(), comp.end(), m) != comp.end()) joined.push_back(m);
      }
    }
    if (joined.size() > 1) {
      const VertexId elder = *std::max_element(joined.begin(), joined.end(),
                                               [&](VertexId a, VertexId b) { return sos_less(g, a, b); });
      for (VertexId m : joined) {
        if (m != elder) out.push_back({m, v, elder, std::abs(double(g[m]) - double(g[v]))});
      }
    }
    prev_tops.clear();
    for (const auto& comp : comps) prev_tops.push_back(top(comp));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Vertex-level replay of a cancellation list: `steps` holds (dying, hint, fallback, persistence)
// in cancellation order. The receiver is the cell currently owning the hint vertex, or the fallback vertex
// when the hint already belongs to the dying cell.
// Each step adds the persistence to every vertex of the receiving cell, before or after the merge.
struct Step {
  VertexId dying;
  VertexId hint;
  VertexId fallback;
  double persistence;
};

inline std::vector<double> survival_replay(const std::vector<VertexId>& labels, const std::vector<Step>& steps,
                                           bool after_merge) {
  std::vector<VertexId> owner = labels;
  std::vector<double> beta(labels.size(), 0.0);
  for (const auto& s : steps) {
    VertexId target = owner[s.hint];
    if (target == s.dying) target = owner[s.fallback];
    if (!after_merge) {
      for (std::size_t v = 0; v < owner.size(); ++v)
        if (owner[v] == target) beta[v] += s.persistence;
    }
    for (auto& o : owner)
      if (o == s.dying) o = target;
    if (after_merge) {
      for (std::size_t v = 0; v < owner.size(); ++v)
        if (owner[v] == target) beta[v] += s.persistence;
    }
  }
  return beta;
}

// Cancellation steps derived from scratch: at each merge saddle the younger components
// join the elder one by one; the hint is the cell reached from the saddle's steepest
// upward neighbor inside the components joined so far. Sorted by persistence, then
// saddle (SoS ascending), then lower dying maximum first.
inline std::vector<Step> cancellation_steps(const ScalarGrid& g) {
  std::vector<VertexId> desc(g.size());
  std::iota(desc.begin(), desc.end(), 0);
  std::sort(desc.begin(), desc.end(), [&](VertexId a, VertexId b) { return sos_less(g, b, a); });
  const auto labels = trace_labels(g);
  struct Raw {
    Step step;
    VertexId saddle;
  };
  std::vector<Raw> raw;
  for (std::size_t t = 1; t < g.size(); ++t) {
    const VertexId v = desc[t];
    const auto comps = superlevel_components(g, desc, t);
    std::vector<int> of(g.size(), -1);
    for (std::size_t i = 0; i < comps.size(); ++i)
      for (VertexId x : comps[i]) of[x] = int(i);
    std::vector<std::pair<VertexId, int>> tops;  // (top vertex, component)
    for (auto [u, diag] : neighbors(g, v)) {
      if (of[u] < 0) continue;
      const auto& comp = comps[std::size_t(of[u])];
      const VertexId top = *std::max_element(comp.begin(), comp.end(),
                                             [&](VertexId a, VertexId b) { return sos_less(g, a, b); });
      if (std::find(tops.begin(), tops.end(), std::pair{top, of[u]}) == tops.end()) tops.emplace_back(top, of[u]);
    }
    if (tops.size() < 2) continue;
    std::sort(tops.begin(), tops.end(), [&](const auto& a, const auto& b) { return sos_less(g, b.first, a.first); });
    std::vector<int> joined{tops[0].second};
    for (std::size_t i = 1; i < tops.size(); ++i) {
      VertexId best = v;
      double best_slope = 0.0;
      for (auto [u, diag] : neighbors(g, v)) {
        if (of[u] < 0 || std::find(joined.begin(), joined.end(), of[u]) == joined.end()) continue;
        const double slope = (double(g[u]) - double(g[v])) / (diag ? std::sqrt(2.0) : 1.0);
        if (best == v || slope > best_slope || (slope == best_slope && sos_less(g, best, u))) {
          best = u;
          best_slope = slope;
        }
      }
      raw.push_back({{tops[i].first, labels[best], tops[0].first, double(g[tops[i].first]) - double(g[v])}, v});
      joined.push_back(tops[i].second);
    }
  }
  std::sort(raw.begin(), raw.end(), [&](const Raw& a, const Raw& b) {
    if (a.step.persistence != b.step.persistence) return a.step.persistence < b.step.persistence;
    if (a.saddle != b.saddle) return sos_less(g, a.saddle, b.saddle);
    return sos_less(g, a.step.dying, b.step.dying);
  });
  std::vector<Step> out;
  for (const auto& r : raw) out.push_back(r.step);
  return out;
}

inline ScalarGrid random_grid(std::mt19937_64& rng, std::size_t max_side = 16, int levels = 0) {
  std::uniform_int_distribution<std::size_t> side(2, max_side);
  const std::size_t w = side(rng), h = side(rng);
  std::vector<float> v(w * h);
  if (levels > 0) {
    std::uniform_int_distribution<int> d(0, levels - 1);
    for (auto& x : v) x = static_cast<float>(d(rng));
  } else {
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    for (auto& x : v) x = d(rng);
  }
  return ScalarGrid(w, h, std::move(v));
}

}  // namespace oracle

#include "morseunc/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include <json.hpp>

namespace morseunc {

namespace {

constexpr double kDiagonal = 1.4142135623730951;

// Superlevel sweeps visit vertices from the top of the order, sublevel from the bottom.
PersistenceHierarchy sweep(const ScalarGrid& grid, const GridTopology& topo, const Segmentation& seg,
                           Filtration filtration) {
  if (topo.width() != grid.width() || topo.height() != grid.height()) {
    throw ArgumentError("topology does not match grid dimensions");
  }
  const bool super = filtration == Filtration::superlevel;
  const std::size_t n = grid.size();
  auto earlier = [&](VertexId a, VertexId b) { return super ? grid.less(b, a) : grid.less(a, b); };

  std::vector<VertexId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), earlier);

  constexpr VertexId kUnseen = ~VertexId{0};
  std::vector<VertexId> parent(n, kUnseen);
  auto find = [&](VertexId v) {
    VertexId root = v;
    while (parent[root] != root) root = parent[root];
    while (parent[v] != root) v = std::exchange(parent[v], root);
    return root;
  };
  // A root's id is its birth extremum: the first vertex of the component in sweep order.

  PersistenceHierarchy h;
  h.filtration = filtration;
  h.width = grid.width();
  h.height = grid.height();

  struct Touch {
    VertexId root;
    VertexId vertex;
    int slot;
  };
  std::vector<Touch> touches;
  std::vector<VertexId> roots;
  for (VertexId v : order) {
    touches.clear();
    roots.clear();
    topo.for_each_neighbor(v, [&](VertexId u, int slot) {
      if (parent[u] == kUnseen) return;
      const VertexId r = find(u);
      touches.push_back({r, u, slot});
      if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
    });
    if (roots.empty()) {
      parent[v] = v;
      continue;
    }
    std::sort(roots.begin(), roots.end(), earlier);
    const VertexId elder = roots.front();
    std::vector<VertexId> merged{elder};
    for (std::size_t i = 1; i < roots.size(); ++i) {
      const VertexId young = roots[i];
      // Steepest touched neighbor among the components already joined at v.
      const Touch* best = nullptr;
      double best_slope = 0.0;
      for (const Touch& t : touches) {
        if (std::find(merged.begin(), merged.end(), t.root) == merged.end()) continue;
        const double rise = super ? double(grid[t.vertex]) - grid[v] : double(grid[v]) - grid[t.vertex];
        const double slope = GridTopology::diagonal(t.slot) ? rise / kDiagonal : rise;
        if (!best || slope > best_slope || (slope == best_slope && earlier(t.vertex, best->vertex))) {
          best = &t;
          best_slope = slope;
        }
      }
      h.pairs.push_back({young, v, elder, seg.labels[best->vertex],
                         std::abs(double(grid[young]) - double(grid[v]))});
      parent[young] = elder;
      merged.push_back(young);
    }
    parent[v] = elder;
  }

  h.global = order.front();
  const auto [lo, hi] = std::minmax_element(grid.values().begin(), grid.values().end());
  h.range = double(*hi) - double(*lo);

  std::sort(h.pairs.begin(), h.pairs.end(), [&](const PersistencePair& a, const PersistencePair& b) {
    if (a.persistence != b.persistence) return a.persistence < b.persistence;
    if (a.saddle != b.saddle) return grid.less(a.saddle, b.saddle);
    return earlier(b.extremum, a.extremum);
  });
  return h;
}

}  // namespace

PersistenceHierarchy superlevel_pairs(const ScalarGrid& grid, const GridTopology& topo) {
  return sweep(grid, topo, segment(grid, topo), Filtration::superlevel);
}

PersistenceHierarchy superlevel_pairs(const ScalarGrid& grid, const GridTopology& topo, const Segmentation& seg) {
  if (seg.labels.size() != grid.size()) throw ArgumentError("segmentation does not match grid");
  return sweep(grid, topo, seg, Filtration::superlevel);
}

PersistenceHierarchy sublevel_pairs(const ScalarGrid& grid, const GridTopology& topo) {
  return sweep(grid, topo, segment_descending(grid, topo), Filtration::sublevel);
}

std::vector<DiagramPoint> persistence_diagram(const ScalarGrid& grid, const PersistenceHierarchy& h) {
  std::vector<DiagramPoint> out;
  out.reserve(h.pairs.size() + 1);
  for (const auto& p : h.pairs) out.push_back({grid[p.extremum], grid[p.saddle], false});
  const double inf = h.filtration == Filtration::sublevel ? kInfinitePersistence : -kInfinitePersistence;
  out.push_back({grid[h.global], inf, true});
  return out;
}

double min_feature_persistence(const ScalarGrid& grid, const GridTopology& topo) {
  double best = kInfinitePersistence;
  for (const auto& h : {superlevel_pairs(grid, topo), sublevel_pairs(grid, topo)}) {
    if (!h.pairs.empty()) best = std::min(best, h.pairs.front().persistence);
  }
  return best;
}

std::vector<Cancellation> cancellation_sequence(const PersistenceHierarchy& h) {
  std::unordered_map<VertexId, VertexId> parent;
  parent.reserve(h.pairs.size() * 2 + 1);
  auto find = [&](VertexId v) {
    auto it = parent.find(v);
    if (it == parent.end()) return v;
    VertexId root = it->second;
    while (true) {
      auto jt = parent.find(root);
      if (jt == parent.end()) break;
      root = jt->second;
    }
    while (v != root) {
      auto& slot = parent[v];
      v = std::exchange(slot, root);
    }
    return root;
  };

  std::vector<Cancellation> out;
  out.reserve(h.pairs.size());
  for (const auto& p : h.pairs) {
    VertexId target = find(p.across);
    if (target == p.extremum) target = find(p.absorber);
    if (target == p.extremum) throw std::logic_error("cancellation would merge a cell into itself");
    out.push_back({p.saddle, p.extremum, target, p.persistence});
    parent[p.extremum] = target;
  }
  return out;
}

Segmentation simplify_to(const Segmentation& seg, const PersistenceHierarchy& h, std::size_t k) {
  const std::size_t count = seg.maxima.size();
  if (h.extremum_count() != count) {
    throw ArgumentError("hierarchy has " + std::to_string(h.extremum_count()) + " maxima, segmentation has " +
                        std::to_string(count));
  }
  if (k < 1 || k > count) {
    throw ArgumentError("simplification target " + std::to_string(k) + " outside [1, " + std::to_string(count) +
                        "]");
  }
  if (k == count) return seg;

  const auto steps = cancellation_sequence(h);
  std::unordered_map<VertexId, VertexId> target;
  target.reserve(count - k);
  for (std::size_t i = 0; i < count - k; ++i) target[steps[i].dying] = steps[i].absorber;

  // Resolve each original maximum to its surviving representative.
  std::unordered_map<VertexId, VertexId> resolved;
  resolved.reserve(count);
  for (VertexId m : seg.maxima) {
    VertexId r = m;
    for (auto it = target.find(r); it != target.end(); it = target.find(r)) r = it->second;
    resolved[m] = r;
  }
  std::vector<VertexId> labels(seg.labels.size());
  for (std::size_t v = 0; v < labels.size(); ++v) labels[v] = resolved.at(seg.labels[v]);
  return make_segmentation(seg.width, seg.height, std::move(labels));
}

std::string hierarchy_to_json(const PersistenceHierarchy& h, int indent) {
  nlohmann::json pairs = nlohmann::json::array();
  const char* key = h.filtration == Filtration::superlevel ? "max" : "min";
  for (const auto& p : h.pairs) {
    pairs.push_back({{"saddle", p.saddle},
                     {key, p.extremum},
                     {"absorber", p.absorber},
                     {"across", p.across},
                     {"persistence", p.persistence}});
  }
  nlohmann::json doc{{"pairs", std::move(pairs)},
                     {h.filtration == Filtration::superlevel ? "global_max" : "global_min", h.global},
                     {"range", h.range}};
  return doc.dump(indent);
}

}  // namespace morseunc

#include "morseunc/segmentation.hpp"

#include <algorithm>
#include <cmath>

namespace morseunc {

namespace {

constexpr double kDiagonal = 1.4142135623730951;

template <bool Ascending>
std::optional<VertexId> steepest(const ScalarGrid& grid, const GridTopology& topo, VertexId v) {
  if (v >= grid.size()) throw ArgumentError("vertex " + std::to_string(v) + " out of range");
  std::optional<VertexId> best;
  double best_slope = 0.0;
  const double fv = grid[v];
  topo.for_each_neighbor(v, [&](VertexId u, int slot) {
    const bool beyond = Ascending ? grid.less(v, u) : grid.less(u, v);
    if (!beyond) return;
    const double rise = Ascending ? grid[u] - fv : fv - grid[u];
    const double slope = GridTopology::diagonal(slot) ? rise / kDiagonal : rise;
    const bool better = !best || slope > best_slope ||
                        (slope == best_slope && (Ascending ? grid.less(*best, u) : grid.less(u, *best)));
    if (better) {
      best = u;
      best_slope = slope;
    }
  });
  return best;
}

template <bool Ascending>
Segmentation segment_impl(const ScalarGrid& grid, const GridTopology& topo) {
  if (topo.width() != grid.width() || topo.height() != grid.height()) {
    throw ArgumentError("topology does not match grid dimensions");
  }
  const std::size_t n = grid.size();
  constexpr VertexId kUnset = ~VertexId{0};
  std::vector<VertexId> next(n);
  for (VertexId v = 0; v < n; ++v) next[v] = steepest<Ascending>(grid, topo, v).value_or(v);

  // Follow pointers with path compression; the result depends only on `next`.
  std::vector<VertexId> labels(n, kUnset);
  std::vector<VertexId> path;
  for (VertexId v = 0; v < n; ++v) {
    VertexId u = v;
    path.clear();
    while (labels[u] == kUnset && next[u] != u) {
      path.push_back(u);
      u = next[u];
    }
    const VertexId root = labels[u] == kUnset ? u : labels[u];
    labels[u] = root;
    for (VertexId p : path) labels[p] = root;
  }
  return make_segmentation(grid.width(), grid.height(), std::move(labels));
}

}  // namespace

std::optional<VertexId> steepest_neighbor(const ScalarGrid& grid, const GridTopology& topo, VertexId v) {
  return steepest<true>(grid, topo, v);
}

std::optional<VertexId> steepest_descent_neighbor(const ScalarGrid& grid, const GridTopology& topo,
                                                  VertexId v) {
  return steepest<false>(grid, topo, v);
}

Segmentation segment(const ScalarGrid& grid, const GridTopology& topo) { return segment_impl<true>(grid, topo); }

Segmentation segment_descending(const ScalarGrid& grid, const GridTopology& topo) {
  return segment_impl<false>(grid, topo);
}

Segmentation make_segmentation(std::size_t width, std::size_t height, std::vector<VertexId> labels) {
  Segmentation seg;
  seg.width = width;
  seg.height = height;
  seg.maxima = labels;
  std::sort(seg.maxima.begin(), seg.maxima.end());
  seg.maxima.erase(std::unique(seg.maxima.begin(), seg.maxima.end()), seg.maxima.end());
  seg.labels = std::move(labels);
  return seg;
}

std::vector<std::pair<VertexId, VertexId>> cell_boundary(const Segmentation& seg, const GridTopology& topo) {
  std::vector<std::pair<VertexId, VertexId>> out;
  for (VertexId v = 0; v < seg.labels.size(); ++v) {
    topo.for_each_neighbor(v, [&](VertexId u, int) {
      if (v < u && seg.labels[v] != seg.labels[u]) out.emplace_back(v, u);
    });
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> cell_areas(const Segmentation& seg) {
  std::vector<std::size_t> areas(seg.maxima.size(), 0);
  for (VertexId label : seg.labels) {
    const auto it = std::lower_bound(seg.maxima.begin(), seg.maxima.end(), label);
    ++areas[static_cast<std::size_t>(it - seg.maxima.begin())];
  }
  return areas;
}

binary::Bytes save_segmentation(const Segmentation& seg) {
  binary::Writer w;
  w.reserve(12 + 4 * seg.labels.size());
  w.magic("MSG1");
  w.u32(static_cast<std::uint32_t>(seg.width));
  w.u32(static_cast<std::uint32_t>(seg.height));
  for (VertexId label : seg.labels) w.u32(label);
  return w.take();
}

Segmentation load_segmentation(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes);
  r.expect_magic("MSG1");
  const std::uint32_t width = r.u32();
  const std::uint32_t height = r.u32();
  const std::size_t count = static_cast<std::size_t>(width) * height;
  r.need(count * 4, "truncated payload");
  std::vector<VertexId> labels(count);
  for (auto& label : labels) {
    const std::size_t at = r.offset();
    label = r.u32();
    if (label >= count) throw FormatError("label out of range", at);
  }
  r.expect_end();
  return make_segmentation(width, height, std::move(labels));
}

}  // namespace morseunc

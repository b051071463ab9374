#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "morseunc/grid.hpp"

namespace morseunc {

/// Descending-manifold decomposition: every vertex labeled with the maximum
/// that terminates its discrete ascending integral line.
struct Segmentation {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<VertexId> labels;  // per vertex: vertex id of its maximum
  std::vector<VertexId> maxima;  // sorted, distinct

  std::size_t cell_count() const { return maxima.size(); }
  bool operator==(const Segmentation&) const = default;
};

/// Steepest upper neighbor of v: largest slope (value difference over Euclidean
/// distance in grid units), ties broken toward the ≺-greater neighbor.
/// Returns nullopt iff v is a local maximum.
std::optional<VertexId> steepest_neighbor(const ScalarGrid& grid, const GridTopology& topo, VertexId v);

/// Mirror of steepest_neighbor for descending flow (nullopt iff v is a local minimum).
std::optional<VertexId> steepest_descent_neighbor(const ScalarGrid& grid, const GridTopology& topo,
                                                  VertexId v);

Segmentation segment(const ScalarGrid& grid, const GridTopology& topo);

/// Ascending-manifold decomposition (labels are minima).
Segmentation segment_descending(const ScalarGrid& grid, const GridTopology& topo);

/// Adjacent vertex pairs (a < b) carrying different labels, sorted.
std::vector<std::pair<VertexId, VertexId>> cell_boundary(const Segmentation& seg, const GridTopology& topo);

/// Cell areas in vertices, aligned with seg.maxima.
std::vector<std::size_t> cell_areas(const Segmentation& seg);

/// Rebuild `maxima` from labels (used after relabeling).
Segmentation make_segmentation(std::size_t width, std::size_t height, std::vector<VertexId> labels);

// MSG1: "MSG1", u32 width, u32 height, u32 label per vertex.
binary::Bytes save_segmentation(const Segmentation& seg);
Segmentation load_segmentation(std::span<const std::uint8_t> bytes);

}  // namespace morseunc

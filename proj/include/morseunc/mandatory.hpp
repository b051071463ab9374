#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "morseunc/grid.hpp"
#include "morseunc/segmentation.hpp"

namespace morseunc {

/// A connected region guaranteed to hold a local maximum of every field g
/// with lower <= g <= upper.
///
/// For a vertex x, let D(x) be the component containing x of the vertices v
/// with (upper(v), v) >= (lower(x), x). x anchors a mandatory maximum when it
/// carries the largest (lower, index) key over D(x); the region is D(x).
/// Regions of distinct anchors are disjoint.
struct MandatoryMaximum {
  std::uint32_t label = 0;  // 0-based, by decreasing anchor value
  VertexId anchor = 0;
  std::vector<VertexId> region;  // sorted
  double low = 0.0;              // lower(anchor)
  double high = 0.0;             // max of upper over the region
  /// Drop in upper level below `low` at which the region joins one with a higher anchor.
  double margin = std::numeric_limits<double>::infinity();
};

std::vector<MandatoryMaximum> mandatory_maxima(const ScalarGrid& lower, const ScalarGrid& upper,
                                               const GridTopology& topo, double cleanup_persistence = 0.0);

/// Per-vertex label of the mandatory region containing it, or -1.
std::vector<std::int32_t> region_mask(const std::vector<MandatoryMaximum>& mandatory, std::size_t vertex_count);

/// Label of every maximum of `seg`: the region containing it, else the nearest
/// region (Euclidean distance in grid units), ties to the lower label.
std::map<VertexId, std::uint32_t> label_member_maxima(const Segmentation& seg,
                                                      const std::vector<MandatoryMaximum>& mandatory);

struct Point2 {
  double row, col;
};

struct Clustering {
  std::vector<Point2> centers;          // l centers, ordered by (row, col)
  std::vector<std::uint32_t> assignment;  // per input point, index into centers
};

/// Deterministic k-means over maximum positions: canonical point order,
/// seeded first center, farthest-point initialization, Lloyd iterations until
/// the assignment is stable or 100 rounds. Invariant under input permutation.
Clustering cluster_maxima_fallback(const std::vector<Point2>& points, std::size_t l, std::uint64_t seed);

/// [{label, anchor:[r,c], interval:[low,high], region_rle:[[start,length],...]}]
std::string mandatory_to_json(const std::vector<MandatoryMaximum>& mandatory, std::size_t width, int indent = -1);

/// Inverse of mandatory_to_json.
std::vector<MandatoryMaximum> mandatory_from_json(const std::string& text, std::size_t width);

}  // namespace morseunc

#pragma once

#include <span>
#include <vector>

#include "morseunc/mandatory.hpp"

namespace morseunc {

/// Ordered vertices in (row, col) grid coordinates.
using Polyline = std::vector<Point2>;

/// Marching-squares isocontour of a row-major field at `iso`, with linear
/// interpolation along grid edges. Vertices with value >= iso count as inside;
/// ambiguous cells are resolved by the cell-center average. Segments are
/// stitched into maximal polylines (closed loops repeat their first point).
std::vector<Polyline> isocontour(std::span<const double> values, std::size_t width, std::size_t height, double iso);

/// Union of the 0.5-isocontours of several indicator-like fields, with segments
/// shared by two fields (same pair of crossed grid edges) kept once.
std::vector<Polyline> merged_isocontours(const std::vector<std::vector<double>>& fields, std::size_t width,
                                         std::size_t height, double iso = 0.5);

/// Mean symmetric nearest-point distance between the vertex sets of two polyline
/// sets. Returns 0 when both are empty and +inf when exactly one is.
double mean_symmetric_distance(const std::vector<Polyline>& a, const std::vector<Polyline>& b);

}  // namespace morseunc

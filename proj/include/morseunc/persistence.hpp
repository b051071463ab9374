#pragma once

#include <limits>
#include <string>
#include <vector>

#include "morseunc/grid.hpp"
#include "morseunc/segmentation.hpp"

namespace morseunc {

enum class Filtration { superlevel, sublevel };

/// One extremum-saddle pair of 0-dimensional persistence.
///
/// `absorber` is the elder extremum of the component the saddle merges into.
/// `across` is the extremum whose cell lies on the other side of the saddle
/// (destination of the steepest flow from the saddle into the surviving
/// component); cancellations merge the dying cell into the live cell of `across`.
struct PersistencePair {
  VertexId extremum;
  VertexId saddle;
  VertexId absorber;
  VertexId across;
  double persistence;

  bool operator==(const PersistencePair&) const = default;
};

struct PersistenceHierarchy {
  Filtration filtration = Filtration::superlevel;
  std::size_t width = 0;
  std::size_t height = 0;
  /// Ascending persistence; ties by saddle (SoS ascending), then by dying extremum.
  std::vector<PersistencePair> pairs;
  VertexId global = 0;  // unpaired extremum
  double range = 0.0;   // max - min of the field; reported persistence of `global`

  std::size_t extremum_count() const { return pairs.size() + 1; }
};

struct DiagramPoint {
  double birth;
  double death;
  bool essential = false;
};

/// One step of hierarchical simplification.
struct Cancellation {
  VertexId saddle;
  VertexId dying;
  VertexId absorber;  // live representative receiving the dying cell
  double persistence;
};

inline constexpr double kInfinitePersistence = std::numeric_limits<double>::infinity();

/// Maximum-saddle pairs of the superlevel-set filtration (union-find sweep, elder rule).
PersistenceHierarchy superlevel_pairs(const ScalarGrid& grid, const GridTopology& topo);
PersistenceHierarchy superlevel_pairs(const ScalarGrid& grid, const GridTopology& topo, const Segmentation& seg);

/// Minimum-saddle pairs of the sublevel-set filtration.
PersistenceHierarchy sublevel_pairs(const ScalarGrid& grid, const GridTopology& topo);

std::vector<DiagramPoint> persistence_diagram(const ScalarGrid& grid, const PersistenceHierarchy& h);

/// Smallest finite persistence over both filtrations, kInfinitePersistence if none.
double min_feature_persistence(const ScalarGrid& grid, const GridTopology& topo);

/// Replays the hierarchy in ascending persistence order, resolving each
/// cancellation's receiving cell to its live representative.
std::vector<Cancellation> cancellation_sequence(const PersistenceHierarchy& h);

/// Cancel the (#maxima - k) least persistent pairs and relabel the segmentation.
Segmentation simplify_to(const Segmentation& seg, const PersistenceHierarchy& h, std::size_t k);

/// {pairs: [{saddle, max, absorber, across, persistence}], global_max, range}
std::string hierarchy_to_json(const PersistenceHierarchy& h, int indent = -1);

}  // namespace morseunc

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "morseunc/binary_io.hpp"

namespace morseunc {

using VertexId = std::uint32_t;

/// Rectangular scalar field, row-major, row 0 at the top.
///
/// Values are stored as float32 so that in-memory fields and MCF1 files are
/// interchangeable without rounding drift. All values are finite.
class ScalarGrid {
 public:
  ScalarGrid() = default;
  ScalarGrid(std::size_t width, std::size_t height, std::vector<float> values);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  std::span<const float> values() const { return values_; }
  float operator[](VertexId v) const { return values_[v]; }
  float at(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }

  VertexId index(std::size_t row, std::size_t col) const {
    return static_cast<VertexId>(row * width_ + col);
  }
  std::size_t row(VertexId v) const { return v / width_; }
  std::size_t col(VertexId v) const { return v % width_; }

  /// Simulation of simplicity: a ≺ b iff value(a) < value(b), or equal values and a < b.
  bool less(VertexId a, VertexId b) const {
    const float fa = values_[a];
    const float fb = values_[b];
    return fa < fb || (fa == fb && a < b);
  }

  bool same_shape(const ScalarGrid& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Copy with a constant added to every value.
  ScalarGrid shifted(float offset) const;
  /// Copy with every value negated.
  ScalarGrid negated() const;

  bool operator==(const ScalarGrid&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<float> values_;
};

/// Strict total order over vertex ids induced by a grid (usable as a sort comparator).
struct VertexOrder {
  const ScalarGrid* grid;
  bool operator()(VertexId a, VertexId b) const { return grid->less(a, b); }
};

/// Freudenthal triangulation of a width x height vertex lattice.
///
/// Vertex (r,c) links to (r,c+1), (r+1,c+1), (r+1,c), (r,c-1), (r-1,c-1), (r-1,c),
/// listed here in cyclic order around the vertex. Slots that fall outside the
/// grid are clipped; consecutive present slots bound a triangle.
class GridTopology {
 public:
  static constexpr int kSlots = 6;
  static constexpr std::array<int, kSlots> kRowOffset{0, 1, 1, 0, -1, -1};
  static constexpr std::array<int, kSlots> kColOffset{1, 1, 0, -1, -1, 0};

  struct Link {
    std::array<VertexId, kSlots> vertex{};
    std::array<bool, kSlots> present{};

    int count() const {
      int n = 0;
      for (bool p : present) n += p ? 1 : 0;
      return n;
    }
  };

  GridTopology() = default;
  GridTopology(std::size_t width, std::size_t height);
  explicit GridTopology(const ScalarGrid& grid) : GridTopology(grid.width(), grid.height()) {}

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return width_ * height_; }

  Link link(VertexId v) const;

  /// Present neighbors in cyclic order.
  std::vector<VertexId> neighbors(VertexId v) const;

  bool adjacent(VertexId a, VertexId b) const;

  /// True when slot is one of the two diagonal offsets (distance sqrt(2)).
  static constexpr bool diagonal(int slot) { return slot == 1 || slot == 4; }

  template <typename Fn>
  void for_each_neighbor(VertexId v, Fn&& fn) const {
    const std::size_t r = v / width_;
    const std::size_t c = v % width_;
    for (int s = 0; s < kSlots; ++s) {
      const long rr = static_cast<long>(r) + kRowOffset[s];
      const long cc = static_cast<long>(c) + kColOffset[s];
      if (rr < 0 || cc < 0 || rr >= static_cast<long>(height_) || cc >= static_cast<long>(width_)) {
        continue;
      }
      fn(static_cast<VertexId>(rr * static_cast<long>(width_) + cc), s);
    }
  }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
};

enum class CriticalKind { regular, minimum, saddle, maximum };

const char* to_string(CriticalKind kind);

struct Classification {
  CriticalKind kind = CriticalKind::regular;
  int multiplicity = 0;  // extra lower-link components for saddles, 1 for extrema, 0 if regular
};

struct CriticalPoint {
  VertexId vertex;
  CriticalKind kind;
  float value;
  int multiplicity;
};

/// Number of connected runs of link slots satisfying `upper` (true) or lower (false).
int link_components(const ScalarGrid& grid, const GridTopology& topo, VertexId v, bool upper);

/// PL critical point type of vertex v using its clipped link.
Classification classify(const ScalarGrid& grid, const GridTopology& topo, VertexId v);

/// All non-regular vertices, in vertex order.
std::vector<CriticalPoint> critical_points(const ScalarGrid& grid, const GridTopology& topo);

// MCF1: "MCF1", u32 width, u32 height, width*height float32, all little-endian.
binary::Bytes save_field(const ScalarGrid& grid);
ScalarGrid load_field(std::span<const std::uint8_t> bytes);

void write_field(const std::string& path, const ScalarGrid& grid);
ScalarGrid read_field(const std::string& path);

}  // namespace morseunc

#include "morseunc/grid.hpp"

#include <cmath>

namespace morseunc {

ScalarGrid::ScalarGrid(std::size_t width, std::size_t height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 2 || height < 2) throw ArgumentError("grid must be at least 2x2");
  if (values_.size() != width * height) {
    throw ArgumentError("grid has " + std::to_string(values_.size()) + " values, expected " +
                        std::to_string(width * height));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw ArgumentError("non-finite value at vertex " + std::to_string(i));
  }
}

ScalarGrid ScalarGrid::shifted(float offset) const {
  std::vector<float> v(values_);
  for (float& x : v) x += offset;
  return ScalarGrid(width_, height_, std::move(v));
}

ScalarGrid ScalarGrid::negated() const {
  std::vector<float> v(values_);
  for (float& x : v) x = -x;
  return ScalarGrid(width_, height_, std::move(v));
}

GridTopology::GridTopology(std::size_t width, std::size_t height) : width_(width), height_(height) {
  if (width < 2 || height < 2) throw ArgumentError("topology must be at least 2x2");
}

GridTopology::Link GridTopology::link(VertexId v) const {
  Link link;
  for_each_neighbor(v, [&](VertexId u, int slot) {
    link.vertex[slot] = u;
    link.present[slot] = true;
  });
  return link;
}

std::vector<VertexId> GridTopology::neighbors(VertexId v) const {
  std::vector<VertexId> out;
  out.reserve(kSlots);
  for_each_neighbor(v, [&](VertexId u, int) { out.push_back(u); });
  return out;
}

bool GridTopology::adjacent(VertexId a, VertexId b) const {
  bool found = false;
  for_each_neighbor(a, [&](VertexId u, int) { found = found || u == b; });
  return found;
}

const char* to_string(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::regular: return "regular";
    case CriticalKind::minimum: return "minimum";
    case CriticalKind::saddle: return "saddle";
    case CriticalKind::maximum: return "maximum";
  }
  return "?";
}

int link_components(const ScalarGrid& grid, const GridTopology& topo, VertexId v, bool upper) {
  const auto link = topo.link(v);
  std::array<bool, GridTopology::kSlots> hit{};
  int total = 0;
  for (int s = 0; s < GridTopology::kSlots; ++s) {
    hit[s] = link.present[s] && (grid.less(v, link.vertex[s]) == upper);
    total += hit[s] ? 1 : 0;
  }
  if (total == GridTopology::kSlots) return 1;
  int runs = 0;
  for (int s = 0; s < GridTopology::kSlots; ++s) {
    if (hit[s] && !hit[(s + GridTopology::kSlots - 1) % GridTopology::kSlots]) ++runs;
  }
  return runs;
}

Classification classify(const ScalarGrid& grid, const GridTopology& topo, VertexId v) {
  if (v >= grid.size()) throw ArgumentError("vertex " + std::to_string(v) + " out of range");
  if (topo.width() != grid.width() || topo.height() != grid.height()) {
    throw ArgumentError("topology does not match grid dimensions");
  }
  const int upper = link_components(grid, topo, v, true);
  const int lower = link_components(grid, topo, v, false);
  if (upper == 0) return {CriticalKind::maximum, 1};
  if (lower == 0) return {CriticalKind::minimum, 1};
  if (lower >= 2) return {CriticalKind::saddle, lower - 1};
  return {};
}

std::vector<CriticalPoint> critical_points(const ScalarGrid& grid, const GridTopology& topo) {
  std::vector<CriticalPoint> out;
  for (VertexId v = 0; v < grid.size(); ++v) {
    const auto c = classify(grid, topo, v);
    if (c.kind != CriticalKind::regular) out.push_back({v, c.kind, grid[v], c.multiplicity});
  }
  return out;
}

binary::Bytes save_field(const ScalarGrid& grid) {
  binary::Writer w;
  w.reserve(12 + 4 * grid.size());
  w.magic("MCF1");
  w.u32(static_cast<std::uint32_t>(grid.width()));
  w.u32(static_cast<std::uint32_t>(grid.height()));
  for (float v : grid.values()) w.f32(v);
  return w.take();
}

ScalarGrid load_field(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes);
  r.expect_magic("MCF1");
  const std::uint32_t width = r.u32();
  const std::uint32_t height = r.u32();
  if (width < 2 || height < 2) throw FormatError("grid dimensions below 2x2", 4);
  const std::size_t count = static_cast<std::size_t>(width) * height;
  r.need(count * 4, "truncated payload");
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    values[i] = r.f32();
    if (!std::isfinite(values[i])) throw FormatError("non-finite value", at);
  }
  r.expect_end();
  return ScalarGrid(width, height, std::move(values));
}

void write_field(const std::string& path, const ScalarGrid& grid) {
  binary::write_file(path, save_field(grid));
}

ScalarGrid read_field(const std::string& path) {
  const auto bytes = binary::read_file(path);
  try {
    return load_field(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.detail(), e.offset());
  }
}

}  // namespace morseunc

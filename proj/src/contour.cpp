#include "morseunc/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

namespace morseunc {

namespace {

struct Segment {
  std::uint64_t edge[2];
  Point2 point[2];
};

// Crossed edges per case, as pairs of cell sides: 0 top, 1 right, 2 bottom, 3 left.
// Ambiguous cases 5 and 10 are listed for "center outside"; the other split is chosen at runtime.
constexpr std::array<std::array<int, 4>, 16> kCases{{
    {-1, -1, -1, -1},
    {3, 2, -1, -1},
    {2, 1, -1, -1},
    {3, 1, -1, -1},
    {0, 1, -1, -1},
    {0, 1, 3, 2},
    {0, 2, -1, -1},
    {3, 0, -1, -1},
    {3, 0, -1, -1},
    {0, 2, -1, -1},
    {3, 0, 2, 1},
    {0, 1, -1, -1},
    {3, 1, -1, -1},
    {2, 1, -1, -1},
    {3, 2, -1, -1},
    {-1, -1, -1, -1},
}};

class Extractor {
 public:
  Extractor(std::span<const double> values, std::size_t width, std::size_t height, double iso)
      : v_(values), w_(width), h_(height), iso_(iso) {
    if (width < 2 || height < 2 || values.size() != width * height) {
      throw ArgumentError("contour field does not match its dimensions");
    }
  }

  void run(std::vector<Segment>& out) const {
    for (std::size_t r = 0; r + 1 < h_; ++r) {
      for (std::size_t c = 0; c + 1 < w_; ++c) {
        const int code = (in(r, c) << 3) | (in(r, c + 1) << 2) | (in(r + 1, c + 1) << 1) | in(r + 1, c);
        auto sides = kCases[code];
        if (code == 5 || code == 10) {
          const double center = 0.25 * (at(r, c) + at(r, c + 1) + at(r + 1, c) + at(r + 1, c + 1));
          if (center >= iso_) sides = code == 5 ? std::array<int, 4>{3, 0, 2, 1} : std::array<int, 4>{0, 1, 3, 2};
        }
        for (int k = 0; k < 4 && sides[k] >= 0; k += 2) {
          Segment s;
          for (int e = 0; e < 2; ++e) edge(r, c, sides[k + e], s.edge[e], s.point[e]);
          out.push_back(s);
        }
      }
    }
  }

 private:
  double at(std::size_t r, std::size_t c) const { return v_[r * w_ + c]; }
  int in(std::size_t r, std::size_t c) const { return at(r, c) >= iso_ ? 1 : 0; }

  Point2 lerp(std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1) const {
    const double a = at(r0, c0), b = at(r1, c1);
    const double t = a == b ? 0.5 : (iso_ - a) / (b - a);
    return {double(r0) + t * (double(r1) - double(r0)), double(c0) + t * (double(c1) - double(c0))};
  }

  void edge(std::size_t r, std::size_t c, int side, std::uint64_t& id, Point2& p) const {
    switch (side) {
      case 0: id = 2 * (r * w_ + c); p = lerp(r, c, r, c + 1); break;
      case 1: id = 2 * (r * w_ + c + 1) + 1; p = lerp(r, c + 1, r + 1, c + 1); break;
      case 2: id = 2 * ((r + 1) * w_ + c); p = lerp(r + 1, c, r + 1, c + 1); break;
      default: id = 2 * (r * w_ + c) + 1; p = lerp(r, c, r + 1, c); break;
    }
  }

  std::span<const double> v_;
  std::size_t w_, h_;
  double iso_;
};

std::vector<Polyline> stitch(const std::vector<Segment>& segs) {
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> at_edge;
  for (std::size_t i = 0; i < segs.size(); ++i)
    for (auto e : segs[i].edge) at_edge[e].push_back(i);

  std::vector<char> used(segs.size(), 0);
  std::vector<Polyline> out;
  auto walk = [&](std::size_t first, int start_side) {
    Polyline line{segs[first].point[start_side]};
    std::size_t cur = first;
    int side = start_side;
    while (true) {
      used[cur] = 1;
      const int exit = 1 - side;
      line.push_back(segs[cur].point[exit]);
      const std::uint64_t e = segs[cur].edge[exit];
      std::size_t next = segs.size();
      for (std::size_t j : at_edge[e]) {
        if (!used[j]) {
          next = j;
          break;
        }
      }
      if (next == segs.size()) break;
      side = segs[next].edge[0] == e ? 0 : 1;
      cur = next;
    }
    out.push_back(std::move(line));
  };

  // Open chains first, from their lowest free end, then closed loops.
  std::vector<std::pair<std::uint64_t, std::size_t>> ends;
  for (const auto& [e, list] : at_edge)
    if (list.size() == 1) ends.emplace_back(e, list[0]);
  std::sort(ends.begin(), ends.end());
  for (const auto& [e, i] : ends) {
    if (!used[i]) walk(i, segs[i].edge[0] == e ? 0 : 1);
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (!used[i]) walk(i, 0);
  }
  return out;
}

}  // namespace

std::vector<Polyline> isocontour(std::span<const double> values, std::size_t width, std::size_t height, double iso) {
  std::vector<Segment> segs;
  Extractor(values, width, height, iso).run(segs);
  return stitch(segs);
}

std::vector<Polyline> merged_isocontours(const std::vector<std::vector<double>>& fields, std::size_t width,
                                         std::size_t height, double iso) {
  std::vector<Segment> all;
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (const auto& f : fields) {
    std::vector<Segment> segs;
    Extractor(f, width, height, iso).run(segs);
    for (const auto& s : segs) {
      const auto key = std::minmax(s.edge[0], s.edge[1]);
      if (seen.insert(key).second) all.push_back(s);
    }
  }
  return stitch(all);
}

double mean_symmetric_distance(const std::vector<Polyline>& a, const std::vector<Polyline>& b) {
  std::vector<Point2> pa, pb;
  for (const auto& l : a) pa.insert(pa.end(), l.begin(), l.end());
  for (const auto& l : b) pb.insert(pb.end(), l.begin(), l.end());
  if (pa.empty() && pb.empty()) return 0.0;
  if (pa.empty() || pb.empty()) return std::numeric_limits<double>::infinity();
  auto one_way = [](const std::vector<Point2>& from, const std::vector<Point2>& to) {
    double sum = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) {
        const double dr = p.row - q.row, dc = p.col - q.col;
        best = std::min(best, dr * dr + dc * dc);
      }
      sum += std::sqrt(best);
    }
    return sum / double(from.size());
  };
  return 0.5 * (one_way(pa, pb) + one_way(pb, pa));
}

}  // namespace morseunc

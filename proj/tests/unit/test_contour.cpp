#include <doctest.h>

#include <vector>

#include "morseunc/contour.hpp"

using namespace morseunc;

namespace {

std::vector<double> step_field(std::size_t w, std::size_t h, std::size_t at) {
  std::vector<double> v(w * h);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) v[r * w + c] = c >= at ? 1.0 : 0.0;
  return v;
}

}  // namespace

TEST_CASE("step across a column gives a vertical contour at the midpoint") {
  const auto f = step_field(6, 4, 3);
  const auto lines = isocontour(f, 6, 4, 0.5);
  REQUIRE(lines.size() == 1);
  REQUIRE(lines[0].size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(lines[0][i].col == doctest::Approx(2.5));
    CHECK(lines[0][i].row == doctest::Approx(double(i)));
  }
}

TEST_CASE("interpolation follows the values along the edge") {
  std::vector<double> f{0.0, 0.2, 1.0, 0.0, 0.2, 1.0};
  const auto lines = isocontour(f, 3, 2, 0.5);
  REQUIRE(lines.size() == 1);
  for (const auto& p : lines[0]) CHECK(p.col == doctest::Approx(1.375));
}

TEST_CASE("isolated peak gives a closed loop") {
  std::vector<double> f(25, 0.0);
  f[12] = 1.0;
  const auto lines = isocontour(f, 5, 5, 0.5);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].size() == 5);
  CHECK(lines[0].front().row == lines[0].back().row);
  CHECK(lines[0].front().col == lines[0].back().col);
}

TEST_CASE("ambiguous cell follows the center average") {
  const std::vector<double> joined{1.0, 0.0, 0.0, 1.0};
  const auto a = isocontour(joined, 2, 2, 0.5);
  REQUIRE(a.size() == 2);
  // Center 0.5 counts as inside, so the two outside corners are cut off.
  for (const auto& line : a) {
    const double r = 0.5 * (line.front().row + line.back().row);
    const double c = 0.5 * (line.front().col + line.back().col);
    CHECK(((r < 0.5 && c > 0.5) || (r > 0.5 && c < 0.5)));
  }
  const std::vector<double> split{0.6, 0.0, 0.0, 0.6};
  for (const auto& line : isocontour(split, 2, 2, 0.5)) {
    const double r = 0.5 * (line.front().row + line.back().row);
    const double c = 0.5 * (line.front().col + line.back().col);
    CHECK(((r < 0.5 && c < 0.5) || (r > 0.5 && c > 0.5)));
  }
}

TEST_CASE("merged contours keep shared segments once") {
  const auto f = step_field(6, 4, 3);
  std::vector<double> g(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = 1.0 - f[i];
  const auto merged = merged_isocontours({f, g}, 6, 4);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].size() == 4);
}

TEST_CASE("flat field has no contour") {
  const std::vector<double> f(12, 0.25);
  CHECK(isocontour(f, 4, 3, 0.5).empty());
  CHECK(isocontour(f, 4, 3, 0.25).empty());
}

TEST_CASE("mean symmetric distance") {
  const Polyline a{{0, 0}, {1, 0}, {2, 0}};
  const Polyline b{{0, 1}, {1, 1}, {2, 1}};
  CHECK(mean_symmetric_distance({a}, {a}) == 0.0);
  CHECK(mean_symmetric_distance({a}, {b}) == doctest::Approx(1.0));
  const Polyline single{{0, 0}};
  // one way: (0 + 1 + 2) / 3, other way: 0
  CHECK(mean_symmetric_distance({a}, {single}) == doctest::Approx(0.5));
  CHECK(mean_symmetric_distance({}, {}) == 0.0);
  CHECK(mean_symmetric_distance({a}, {}) == std::numeric_limits<double>::infinity());
}

TEST_CASE("contour argument checks") {
  const std::vector<double> f(6, 0.0);
  CHECK_THROWS_AS(isocontour(f, 4, 2, 0.5), ArgumentError);
  CHECK_THROWS_AS(isocontour(f, 6, 1, 0.5), ArgumentError);
}

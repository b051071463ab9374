#include <doctest.h>

#include <queue>
#include <numeric>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "morseunc/ensemble.hpp"
#include "morseunc/mandatory.hpp"
#include "morseunc/persistence.hpp"
#include "oracles.hpp"

using namespace morseunc;

namespace {

bool region_connected(const MandatoryMaximum& m, const GridTopology& topo) {
  std::set<VertexId> in(m.region.begin(), m.region.end());
  std::set<VertexId> seen{m.anchor};
  std::queue<VertexId> q;
  q.push(m.anchor);
  while (!q.empty()) {
    const VertexId v = q.front();
    q.pop();
    for (VertexId u : topo.neighbors(v))
      if (in.count(u) && seen.insert(u).second) q.push(u);
  }
  return seen.size() == in.size();
}

void check_structure(const std::vector<MandatoryMaximum>& mm, const ScalarGrid& lo, const ScalarGrid& hi) {
  const GridTopology topo(lo);
  std::vector<int> owner(lo.size(), -1);
  for (std::size_t i = 0; i < mm.size(); ++i) {
    const auto& m = mm[i];
    CHECK(m.label == i);
    CHECK(std::binary_search(m.region.begin(), m.region.end(), m.anchor));
    CHECK(region_connected(m, topo));
    CHECK(m.low <= m.high);
    CHECK(m.low == lo[m.anchor]);
    for (VertexId v : m.region) {
      CHECK(owner[v] == -1);
      owner[v] = int(i);
      CHECK(!lo.less(m.anchor, v));
      CHECK(hi[v] <= m.high);
    }
    if (i > 0) CHECK(!lo.less(mm[i - 1].anchor, m.anchor));
  }
}

// Random g with lo <= g <= hi; each region must contain a local maximum of g.
void check_guarantee(const std::vector<MandatoryMaximum>& mm, const ScalarGrid& lo, const ScalarGrid& hi,
                     std::mt19937_64& rng) {
  const GridTopology topo(lo);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<float> v(lo.size());
    for (VertexId x = 0; x < v.size(); ++x) {
      const double pick = trial == 0 ? 0.0 : trial == 1 ? 1.0 : t(rng);
      v[x] = std::clamp(static_cast<float>(lo[x] + pick * (double(hi[x]) - lo[x])), lo[x], hi[x]);
    }
    const ScalarGrid g(lo.width(), lo.height(), v);
    for (const auto& m : mm) {
      const bool has_max = std::any_of(m.region.begin(), m.region.end(), [&](VertexId x) {
        return classify(g, topo, x).kind == CriticalKind::maximum;
      });
      CHECK(has_max);
    }
  }
}

}  // namespace

TEST_CASE("coinciding bounds give one mandatory maximum per local maximum") {
  const auto f = fixture::bumps(31, 25, {{6, 6, 3, 1.0}, {18, 20, 4, 0.7}, {5, 24, 2, 0.4}});
  const GridTopology topo(f);
  const auto mm = mandatory_maxima(f, f, topo);
  const auto seg = segment(f, topo);
  REQUIRE(mm.size() == seg.cell_count());
  std::set<VertexId> anchors;
  for (const auto& m : mm) {
    anchors.insert(m.anchor);
    CHECK(m.region == std::vector<VertexId>{m.anchor});
    CHECK(m.low == m.high);
  }
  CHECK(anchors == std::set<VertexId>(seg.maxima.begin(), seg.maxima.end()));
  CHECK(mm[0].anchor == superlevel_pairs(f, topo).global);
}

TEST_CASE("regions are disjoint, connected and always hold a maximum") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 60; ++trial) {
    const auto f = oracle::random_grid(rng, 14, trial % 3 == 0 ? 4 : 0);
    const double a = trial % 2 == 0 ? 0.2 : 0.6;
    const auto e = perturb(f, {NoiseKind::uniform_symmetric, a}, 5, std::uint64_t(trial));
    const auto [lo, hi] = bound_fields(e);
    const auto mm = mandatory_maxima(lo, hi, GridTopology(lo));
    REQUIRE(!mm.empty());
    check_structure(mm, lo, hi);
    check_guarantee(mm, lo, hi, rng);
  }
}

TEST_CASE("bounded noise below half the smallest feature keeps the count") {
  const auto f = fixture::bumps(40, 40, {{12, 12, 4, 1.0}, {28, 26, 5, 0.8}});
  const GridTopology topo(f);
  const double pf = min_feature_persistence(f, topo);
  REQUIRE(pf < kInfinitePersistence);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto e = perturb(f, {NoiseKind::uniform_signed_magnitude, 0.9 * pf / 2}, 20, seed);
    const auto [lo, hi] = bound_fields(e);
    CHECK(mandatory_maxima(lo, hi, topo).size() == segment(f, topo).cell_count());
  }
}

TEST_CASE("cleanup drops anchors with small margin") {
  const auto f = fixture::ridge({-1, 1.0f, 0.2f, 0.6f, 0.5f, 0.55f, -1}, -10);
  const GridTopology topo(f);
  const auto all = mandatory_maxima(f, f, topo);
  REQUIRE(all.size() == 3);
  CHECK(all[0].margin == std::numeric_limits<double>::infinity());
  const auto trimmed = mandatory_maxima(f, f, topo, 0.1);
  REQUIRE(trimmed.size() == 2);
  CHECK(trimmed[1].anchor == all[1].anchor);
  CHECK(mandatory_maxima(f, f, topo, 10.0).size() == 1);
}

TEST_CASE("mandatory maxima argument checks") {
  const auto f = fixture::bumps(8, 8, {{4, 4, 2, 1}});
  CHECK_THROWS_AS(mandatory_maxima(f, f.shifted(-1.0f), GridTopology(f)), ArgumentError);
  CHECK_THROWS_AS(mandatory_maxima(f, f, GridTopology(9, 8)), ArgumentError);
}

TEST_CASE("member maxima labels: containment, nearest region, ties") {
  // Two singleton regions at (2,2) and (2,8) on a 11x5 grid.
  MandatoryMaximum a, b;
  a.label = 0;
  a.anchor = 2 * 11 + 2;
  a.region = {a.anchor};
  b.label = 1;
  b.anchor = 2 * 11 + 8;
  b.region = {b.anchor};
  std::vector<VertexId> labels(55);
  for (VertexId v = 0; v < 55; ++v) labels[v] = (v % 11 < 4) ? 2 * 11 + 2 : (v % 11 < 7 ? 2 * 11 + 5 : 3 * 11 + 9);
  const auto seg = make_segmentation(11, 5, labels);
  const auto out = label_member_maxima(seg, {a, b});
  CHECK(out.at(2 * 11 + 2) == 0);  // inside region 0
  CHECK(out.at(2 * 11 + 5) == 0);  // equidistant, lower label
  CHECK(out.at(3 * 11 + 9) == 1);  // nearest is region 1
  CHECK_THROWS_AS(label_member_maxima(seg, {}), ArgumentError);
}

TEST_CASE("cluster fallback recovers blobs and ignores input order") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> jitter(0.0, 0.8);
  const std::vector<Point2> blobs{{10, 10}, {10, 50}, {50, 30}};
  std::vector<Point2> pts;
  std::vector<std::size_t> truth;
  for (int i = 0; i < 30; ++i) {
    for (std::size_t b = 0; b < blobs.size(); ++b) {
      pts.push_back({blobs[b].row + jitter(rng), blobs[b].col + jitter(rng)});
      truth.push_back(b);
    }
  }
  const auto c = cluster_maxima_fallback(pts, 3, 5);
  REQUIRE(c.centers.size() == 3);
  CHECK(c.centers[0].row == doctest::Approx(10).epsilon(0.05));
  CHECK(c.centers[0].col == doctest::Approx(10).epsilon(0.05));
  CHECK(c.centers[2].row == doctest::Approx(50).epsilon(0.05));
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(c.assignment[i] == c.assignment[truth[i]]);

  std::vector<std::size_t> perm(pts.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Point2> shuffled;
  for (std::size_t i : perm) shuffled.push_back(pts[i]);
  const auto d = cluster_maxima_fallback(shuffled, 3, 5);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(d.centers[j].row == c.centers[j].row);
    CHECK(d.centers[j].col == c.centers[j].col);
  }
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(d.assignment[i] == c.assignment[perm[i]]);

  CHECK_THROWS_AS(cluster_maxima_fallback({{0, 0}}, 2, 0), ArgumentError);
}

TEST_CASE("mandatory JSON round trip") {
  const auto f = fixture::bumps(20, 16, {{5, 5, 3, 1.0}, {10, 14, 3, 0.8}});
  const auto e = perturb(f, {NoiseKind::uniform_symmetric, 0.05}, 4, 1);
  const auto [lo, hi] = bound_fields(e);
  const auto mm = mandatory_maxima(lo, hi, GridTopology(lo));
  const auto text = mandatory_to_json(mm, 20);
  const auto back = mandatory_from_json(text, 20);
  REQUIRE(back.size() == mm.size());
  for (std::size_t i = 0; i < mm.size(); ++i) {
    CHECK(back[i].label == mm[i].label);
    CHECK(back[i].anchor == mm[i].anchor);
    CHECK(back[i].region == mm[i].region);
    CHECK(back[i].low == mm[i].low);
    CHECK(back[i].high == mm[i].high);
  }
  CHECK_THROWS_AS(mandatory_from_json("{\"x\":1}", 20), DataError);
}

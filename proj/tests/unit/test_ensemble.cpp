#include <doctest.h>

#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "morseunc/ensemble.hpp"
#include "morseunc/persistence.hpp"
#include "oracles.hpp"

using namespace morseunc;

namespace {

std::vector<VertexId> maxima(const ScalarGrid& g) {
  std::vector<VertexId> out;
  for (const auto& cp : critical_points(g, GridTopology(g)))
    if (cp.kind == CriticalKind::maximum) out.push_back(cp.vertex);
  return out;
}

std::vector<NoiseSpec> all_noise_kinds(double a) {
  NoiseSpec u{NoiseKind::uniform_symmetric, a};
  NoiseSpec s{NoiseKind::uniform_signed_magnitude, a};
  NoiseSpec g{NoiseKind::gaussian_truncated, a, a * 0.7};
  NoiseSpec m{NoiseKind::multimodal_mixture, a};
  m.components = {{0.6, -0.5, 0.6, 0.0}, {0.4, 0.8, 0.5, 2.0}};
  NoiseSpec mm = m;
  mm.selection = MixtureSelection::per_member;
  return {u, s, g, m, mm};
}

}  // namespace

TEST_CASE("ackley default domain has a 3x3 lattice of maxima") {
  const auto g = ackley(256, 256);
  const auto m = maxima(g);
  REQUIRE(m.size() == 9);
  for (long r : {42, 127, 212}) {
    for (long c : {42, 127, 212}) {
      CHECK(std::any_of(m.begin(), m.end(), [&](VertexId v) {
        return std::abs(long(g.row(v)) - r) <= 5 && std::abs(long(g.col(v)) - c) <= 5;
      }));
    }
  }
  const auto top = *std::max_element(m.begin(), m.end(), [&](VertexId a, VertexId b) { return g.less(a, b); });
  CHECK(top == g.index(127, 127));
  CHECK(min_feature_persistence(g, GridTopology(g)) > 0.0);

  for (std::size_t n : {64, 100, 129}) CHECK(maxima(ackley(n, n)).size() == 9);
  CHECK_THROWS_AS(ackley(6, 6), ArgumentError);
  CHECK_THROWS_AS(ackley(16, 16, Rect{1, 1, 0, 1}), ArgumentError);
}

TEST_CASE("himmelblau has four equal maxima with balanced cells") {
  const auto g = himmelblau(257, 257);
  const auto m = maxima(g);
  REQUIRE(m.size() == 4);
  for (VertexId v : m) CHECK(g[v] == 0.0f);
  const auto areas = cell_areas(segment(g, GridTopology(g)));
  const auto [lo, hi] = std::minmax_element(areas.begin(), areas.end());
  CHECK(double(*hi) <= 1.1 * double(*lo));
}

TEST_CASE("gaussian mixtures") {
  const auto one = gaussian_mixture(41, 41, {{0.25, 0.75, 0.1, 1.0}});
  const auto m = maxima(one);
  REQUIRE(m.size() == 1);
  CHECK(m[0] == one.index(10, 10));

  const auto four = gaussian_mixture(64, 64, four_gaussians());
  CHECK(maxima(four).size() == 4);
  double gap = kInfinitePersistence, dual = kInfinitePersistence;
  for (const auto& p : oracle::superlevel_pairs(four)) gap = std::min(gap, p.persistence);
  for (const auto& p : oracle::superlevel_pairs(four.negated())) dual = std::min(dual, p.persistence);
  CHECK(gap < dual);
  CHECK(min_feature_persistence(four, GridTopology(four)) == gap);
  CHECK_THROWS_AS(gaussian_mixture(8, 8, {}), ArgumentError);
  CHECK_THROWS_AS(gaussian_mixture(8, 8, {{0.5, 0.5, 0.0, 1.0}}), ArgumentError);
}

TEST_CASE("noise respects its bound for every kind") {
  const auto f = fixture::bumps(40, 30, {{10, 10, 5, 3}, {20, 30, 6, 2}});
  for (const auto& spec : all_noise_kinds(0.37)) {
    const auto e = perturb(f, spec, 6, 42);
    REQUIRE(e.size() == 6);
    double largest = 0.0;
    for (const auto& member : e.members) {
      for (VertexId x = 0; x < f.size(); ++x) {
        const double d = std::abs(double(member[x]) - double(f[x]));
        CHECK(d <= spec.amplitude);
        largest = std::max(largest, d);
      }
    }
    CHECK(largest > 0.1);
    const auto again = perturb(f, spec, 6, 42);
    CHECK(again.members == e.members);
    CHECK(perturb(f, spec, 6, 43).members != e.members);
  }
}

TEST_CASE("signed magnitude noise takes both signs") {
  const auto f = fixture::bumps(20, 20, {{10, 10, 5, 1}});
  const auto e = perturb(f, {NoiseKind::uniform_signed_magnitude, 0.2}, 1, 3);
  int above = 0, below = 0;
  for (VertexId x = 0; x < f.size(); ++x) (e.members[0][x] > f[x] ? above : below)++;
  CHECK(above > 150);
  CHECK(below > 150);
}

TEST_CASE("per-member mixture shares one mode per member") {
  const ScalarGrid flat(30, 30, std::vector<float>(900, 0.0f));
  NoiseSpec spec{NoiseKind::multimodal_mixture, 1.0};
  spec.components = {{0.5, -0.9, 0.05, 0.0}, {0.5, 0.9, 0.05, 0.0}};
  spec.selection = MixtureSelection::per_member;
  const auto e = perturb(flat, spec, 20, 9);
  int high = 0;
  for (const auto& m : e.members) {
    const bool up = m[0] > 0.0f;
    high += up ? 1 : 0;
    for (VertexId x = 0; x < m.size(); ++x) CHECK((m[x] > 0.0f) == up);
  }
  CHECK(high > 3);
  CHECK(high < 17);
}

TEST_CASE("perturb argument checks") {
  const auto f = fixture::bumps(8, 8, {{4, 4, 2, 1}});
  CHECK_THROWS_AS(perturb(f, {NoiseKind::uniform_symmetric, -0.1}, 3, 0), ArgumentError);
  CHECK_THROWS_AS(perturb(f, {NoiseKind::uniform_symmetric, 0.1}, 0, 0), ArgumentError);
  CHECK_THROWS_AS(perturb(f, {NoiseKind::multimodal_mixture, 0.1}, 2, 0), ArgumentError);
  const auto zero = perturb(f, {NoiseKind::uniform_signed_magnitude, 0.0}, 4, 1);
  for (const auto& m : zero.members) CHECK(m == f);
}

TEST_CASE("mean and bound fields") {
  const auto f = fixture::bumps(12, 9, {{4, 4, 2, 1}});
  Ensemble single;
  single.members = {f};
  CHECK(mean_field(single) == f);
  CHECK(bound_fields(single).first == f);
  CHECK(bound_fields(single).second == f);

  Ensemble pair;
  pair.members = {f, f.negated()};
  const auto zero_mean = mean_field(pair);
  for (float v : zero_mean.values()) CHECK(v == 0.0f);

  const auto e = perturb(f, {NoiseKind::uniform_symmetric, 0.3}, 7, 5);
  const auto mean = mean_field(e);
  const auto [lo, hi] = bound_fields(e);
  for (VertexId x = 0; x < f.size(); ++x) {
    CHECK(lo[x] <= mean[x]);
    CHECK(mean[x] <= hi[x]);
    for (const auto& m : e.members) {
      CHECK(lo[x] <= m[x]);
      CHECK(m[x] <= hi[x]);
    }
  }

  Ensemble bad;
  bad.members = {f, fixture::bumps(5, 5, {{2, 2, 1, 1}})};
  CHECK_THROWS_AS(mean_field(bad), DataError);
  CHECK_THROWS_AS(mean_field(Ensemble{}), DataError);
}

TEST_CASE("magnitude helper") {
  const ScalarGrid u(2, 2, {3, 0, 1, 0}), v(2, 2, {4, 2, 0, 0});
  CHECK(magnitude(u, v) == ScalarGrid(2, 2, {5, 2, 1, 0}));
}

TEST_CASE("manifest round trip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "morseunc_test_manifest";
  fs::remove_all(dir);
  const auto f = fixture::bumps(10, 8, {{4, 4, 2, 1}});
  const auto e = perturb(f, {NoiseKind::uniform_symmetric, 0.1}, 3, 11);
  write_ensemble(dir.string(), e);
  const auto back = read_ensemble((dir / "ensemble.json").string());
  CHECK(back.members == e.members);
  REQUIRE(back.ground_truth.has_value());
  CHECK(*back.ground_truth == f);
  CHECK(back.seed == 11);
  CHECK(back.generator == e.generator);

  write_field((dir / "members/member_001.mcf").string(), fixture::bumps(4, 4, {{1, 1, 1, 1}}));
  CHECK_THROWS_AS(read_ensemble((dir / "ensemble.json").string()), DataError);
  CHECK_THROWS_AS(read_ensemble((dir / "missing.json").string()), DataError);
  fs::remove_all(dir);
}

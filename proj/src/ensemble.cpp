#include "morseunc/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include <json.hpp>

namespace morseunc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in [0,1) keyed by (seed, a, b, draw).
double unit(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t draw) {
  const std::uint64_t h = mix(mix(mix(mix(seed) ^ a) ^ b) ^ draw);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t kMemberWide = 0xffffffffULL;
constexpr std::uint64_t kSeedWide = 0xfffffffeULL;

std::vector<float> sample(std::size_t width, std::size_t height, const Rect& d, auto&& fn) {
  const double dx = (d.x1 - d.x0) / double(width - 1);
  const double dy = (d.y1 - d.y0) / double(height - 1);
  std::vector<float> v(width * height);
  for (std::size_t r = 0; r < height; ++r) {
    const double y = d.y1 - double(r) * dy;
    for (std::size_t c = 0; c < width; ++c) v[r * width + c] = static_cast<float>(fn(d.x0 + double(c) * dx, y));
  }
  return v;
}

void check_dims(std::size_t width, std::size_t height) {
  if (width < 2 || height < 2) throw ArgumentError("grid must be at least 2x2");
}

void check_rect(const Rect& d) {
  if (!(d.x0 < d.x1) || !(d.y0 < d.y1) || !std::isfinite(d.x0) || !std::isfinite(d.x1) || !std::isfinite(d.y0) ||
      !std::isfinite(d.y1)) {
    throw ArgumentError("degenerate sampling domain");
  }
}

double ackley_value(double x, double y) {
  const double r = std::sqrt(0.5 * (x * x + y * y));
  const double a = -20.0 * std::exp(-0.2 * r);
  const double b = -std::exp(0.5 * (std::cos(kTwoPi * x) + std::cos(kTwoPi * y)));
  return a + b + std::numbers::e + 20.0;
}

double himmelblau_value(double x, double y) {
  const double a = x * x + y - 11.0;
  const double b = x + y * y - 7.0;
  return a * a + b * b;
}

// Wells at -1, 0, 1 land on vertices: m samples per unit, centered as far as the size allows.
std::pair<double, double> ackley_axis(std::size_t n) {
  const std::size_t m = (n - 1) / 3;
  if (m < 2) throw ArgumentError("grid too small for the Ackley lattice (need at least 7 samples per side)");
  const double start = -1.0 - double((n - 1 - 2 * m) / 2) / double(m);
  return {start, start + double(n - 1) / double(m)};
}

double wave(const NoiseSpec& spec, std::size_t component, std::uint64_t seed, VertexId vertex, std::size_t width,
            std::size_t height) {
  const double cycles = spec.components[component].wave_cycles;
  if (cycles == 0.0) return 1.0;
  const double theta = kTwoPi * unit(seed, kSeedWide, component, 1);
  const double phase = kTwoPi * unit(seed, kSeedWide, component, 2);
  const double x = double(vertex % width) / double(width - 1);
  const double y = double(vertex / width) / double(height - 1);
  return std::sin(kTwoPi * cycles * (x * std::cos(theta) + y * std::sin(theta)) + phase);
}

void check_noise(const NoiseSpec& spec) {
  if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude)) {
    throw ArgumentError("noise amplitude must be a finite value >= 0");
  }
  if (spec.kind == NoiseKind::gaussian_truncated && !(spec.sigma > 0.0)) {
    throw ArgumentError("gaussian noise needs sigma > 0");
  }
  if (spec.kind == NoiseKind::multimodal_mixture) {
    if (spec.components.empty()) throw ArgumentError("mixture noise needs at least one component");
    double total = 0.0;
    for (const auto& c : spec.components) {
      if (!(c.weight >= 0.0) || !(c.spread >= 0.0) || !std::isfinite(c.center) || !std::isfinite(c.wave_cycles)) {
        throw ArgumentError("invalid mixture component");
      }
      total += c.weight;
    }
    if (!(total > 0.0)) throw ArgumentError("mixture weights sum to zero");
  }
}

std::string describe(const NoiseSpec& spec, std::size_t n) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "perturb %s a=%.9g n=%zu", to_string(spec.kind), spec.amplitude, n);
  return buf;
}

}  // namespace

Rect ackley_default_domain(std::size_t width, std::size_t height) {
  check_dims(width, height);
  const auto [x0, x1] = ackley_axis(width);
  // Rows run downward, so mirror the axis to keep the wells on the same indices as columns.
  const auto [ylo, yhi] = ackley_axis(height);
  return {x0, x1, -yhi, -ylo};
}

ScalarGrid ackley(std::size_t width, std::size_t height) {
  return ackley(width, height, ackley_default_domain(width, height));
}

ScalarGrid ackley(std::size_t width, std::size_t height, const Rect& domain) {
  check_dims(width, height);
  check_rect(domain);
  return ScalarGrid(width, height, sample(width, height, domain, [](double x, double y) {
                      return -ackley_value(x, y);
                    }));
}

ScalarGrid himmelblau(std::size_t width, std::size_t height) {
  check_dims(width, height);
  const Rect d{-6.0, 6.0, -6.0, 6.0};
  auto v = sample(width, height, d, [](double x, double y) { return -himmelblau_value(x, y); });
  static constexpr double kMinima[4][2] = {
      {3.0, 2.0}, {-2.805118, 3.131312}, {-3.779310, -3.283186}, {3.584428, -1.848126}};
  const double dx = 12.0 / double(width - 1);
  const double dy = 12.0 / double(height - 1);
  for (const auto& m : kMinima) {
    // Grid square containing the minimum; snap the nearer end of its triangulated diagonal.
    const double fc = (m[0] - d.x0) / dx;
    const double fr = (d.y1 - m[1]) / dy;
    const std::size_t c = std::min<std::size_t>(static_cast<std::size_t>(fc), width - 2);
    const std::size_t r = std::min<std::size_t>(static_cast<std::size_t>(fr), height - 2);
    const double near = std::hypot(fc - double(c), fr - double(r));
    const double far = std::hypot(fc - double(c + 1), fr - double(r + 1));
    const std::size_t rr = near <= far ? r : r + 1;
    const std::size_t cc = near <= far ? c : c + 1;
    v[rr * width + cc] = 0.0f;
  }
  return ScalarGrid(width, height, std::move(v));
}

ScalarGrid gaussian_mixture(std::size_t width, std::size_t height, const std::vector<Gaussian>& components,
                            const Rect& domain) {
  check_dims(width, height);
  check_rect(domain);
  if (components.empty()) throw ArgumentError("gaussian mixture needs at least one component");
  for (const auto& g : components) {
    if (!(g.sigma > 0.0)) throw ArgumentError("gaussian sigma must be positive");
  }
  return ScalarGrid(width, height, sample(width, height, domain, [&](double x, double y) {
                      double s = 0.0;
                      for (const auto& g : components) {
                        const double ex = x - g.mx, ey = y - g.my;
                        s += g.amplitude * std::exp(-(ex * ex + ey * ey) / (2.0 * g.sigma * g.sigma));
                      }
                      return s;
                    }));
}

std::vector<Gaussian> four_gaussians() {
  return {{0.5, 0.8, 0.15, 1.0}, {0.8, 0.5, 0.15, 0.6}, {0.5, 0.2, 0.15, 0.9}, {0.2, 0.5, 0.15, 0.55}};
}

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::uniform_symmetric: return "uniform_symmetric";
    case NoiseKind::uniform_signed_magnitude: return "uniform_signed_magnitude";
    case NoiseKind::gaussian_truncated: return "gaussian_truncated";
    case NoiseKind::multimodal_mixture: return "multimodal_mixture";
  }
  return "?";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "uniform_symmetric" || name == "uniform-symmetric") return NoiseKind::uniform_symmetric;
  if (name == "uniform_signed_magnitude" || name == "uniform-signed") return NoiseKind::uniform_signed_magnitude;
  if (name == "gaussian_truncated" || name == "gaussian") return NoiseKind::gaussian_truncated;
  if (name == "multimodal_mixture" || name == "mixture") return NoiseKind::multimodal_mixture;
  throw ArgumentError("unknown noise kind \"" + name + "\"");
}

double noise_sample(const NoiseSpec& spec, std::uint64_t seed, std::uint32_t member, VertexId vertex,
                    std::size_t width, std::size_t height) {
  const double a = spec.amplitude;
  if (a == 0.0) return 0.0;
  switch (spec.kind) {
    case NoiseKind::uniform_symmetric:
      return a * (2.0 * unit(seed, member, vertex, 0) - 1.0);
    case NoiseKind::uniform_signed_magnitude: {
      const double magnitude = a * unit(seed, member, vertex, 0);
      return unit(seed, member, vertex, 1) < 0.5 ? -magnitude : magnitude;
    }
    case NoiseKind::gaussian_truncated: {
      for (std::uint64_t draw = 0; draw < 128; draw += 2) {
        const double u1 = 1.0 - unit(seed, member, vertex, draw);
        const double u2 = unit(seed, member, vertex, draw + 1);
        const double z = spec.sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
        if (std::abs(z) <= a) return z;
      }
      return 0.0;
    }
    case NoiseKind::multimodal_mixture: {
      double total = 0.0;
      for (const auto& c : spec.components) total += c.weight;
      const double pick = spec.selection == MixtureSelection::per_member
                              ? unit(seed, member, kMemberWide, 100)
                              : unit(seed, member, vertex, 100);
      std::size_t k = 0;
      double acc = spec.components[0].weight / total;
      while (k + 1 < spec.components.size() && pick >= acc) acc += spec.components[++k].weight / total;
      const auto& comp = spec.components[k];
      const double u = 2.0 * unit(seed, member, vertex, 101) - 1.0;
      const double t = comp.center * wave(spec, k, seed, vertex, width, height) + comp.spread * u;
      return a * std::clamp(t, -1.0, 1.0);
    }
  }
  return 0.0;
}

void Ensemble::validate() const {
  if (members.empty()) throw DataError("ensemble has no members");
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!members[i].same_shape(members[0])) {
      throw DataError("member " + std::to_string(i) + " has dimensions " + std::to_string(members[i].width()) +
                      "x" + std::to_string(members[i].height()) + ", expected " +
                      std::to_string(members[0].width()) + "x" + std::to_string(members[0].height()));
    }
  }
  if (ground_truth && !ground_truth->same_shape(members[0])) {
    throw DataError("ground truth dimensions differ from the members");
  }
}

Ensemble perturb(const ScalarGrid& ground_truth, const NoiseSpec& noise, std::size_t n, std::uint64_t seed) {
  check_noise(noise);
  if (n == 0) throw ArgumentError("ensemble size must be at least 1");
  Ensemble e;
  e.ground_truth = ground_truth;
  e.seed = seed;
  e.generator = describe(noise, n);
  e.members.reserve(n);
  const std::size_t w = ground_truth.width(), h = ground_truth.height();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> v(ground_truth.size());
    for (VertexId x = 0; x < v.size(); ++x) {
      const double f = ground_truth[x];
      const double eps = noise_sample(noise, seed, static_cast<std::uint32_t>(i), x, w, h);
      float m = static_cast<float>(f + eps);
      // Rounding to float may overshoot the bound by half an ulp.
      while (std::abs(double(m) - f) > noise.amplitude) m = std::nextafter(m, static_cast<float>(f));
      v[x] = m;
    }
    e.members.emplace_back(w, h, std::move(v));
  }
  return e;
}

ScalarGrid mean_field(const Ensemble& ensemble) {
  ensemble.validate();
  std::vector<double> acc(ensemble.members[0].size(), 0.0);
  for (const auto& m : ensemble.members) {
    for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += m[static_cast<VertexId>(x)];
  }
  std::vector<float> v(acc.size());
  const double n = double(ensemble.size());
  for (std::size_t x = 0; x < acc.size(); ++x) v[x] = static_cast<float>(acc[x] / n);
  return ScalarGrid(ensemble.width(), ensemble.height(), std::move(v));
}

std::pair<ScalarGrid, ScalarGrid> bound_fields(const Ensemble& ensemble) {
  ensemble.validate();
  const auto first = ensemble.members[0].values();
  std::vector<float> lo(first.begin(), first.end()), hi(first.begin(), first.end());
  for (const auto& m : ensemble.members) {
    for (std::size_t x = 0; x < lo.size(); ++x) {
      lo[x] = std::min(lo[x], m[static_cast<VertexId>(x)]);
      hi[x] = std::max(hi[x], m[static_cast<VertexId>(x)]);
    }
  }
  return {ScalarGrid(ensemble.width(), ensemble.height(), std::move(lo)),
          ScalarGrid(ensemble.width(), ensemble.height(), std::move(hi))};
}

ScalarGrid magnitude(const ScalarGrid& u, const ScalarGrid& v) {
  if (!u.same_shape(v)) throw ArgumentError("vector components differ in shape");
  std::vector<float> out(u.size());
  for (VertexId x = 0; x < out.size(); ++x) out[x] = static_cast<float>(std::hypot(double(u[x]), double(v[x])));
  return ScalarGrid(u.width(), u.height(), std::move(out));
}

void write_ensemble(const std::string& dir, const Ensemble& ensemble) {
  ensemble.validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "members");
  nlohmann::json members = nlohmann::json::array();
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "members/member_%03zu.mcf", i);
    write_field((fs::path(dir) / name).string(), ensemble.members[i]);
    members.push_back(name);
  }
  nlohmann::json doc{{"width", ensemble.width()},   {"height", ensemble.height()}, {"n", ensemble.size()},
                     {"members", std::move(members)}, {"seed", ensemble.seed},     {"generator", ensemble.generator}};
  if (ensemble.ground_truth) {
    write_field((fs::path(dir) / "truth.mcf").string(), *ensemble.ground_truth);
    doc["ground_truth"] = "truth.mcf";
  }
  binary::write_text((fs::path(dir) / "ensemble.json").string(), doc.dump(2) + "\n");
}

Ensemble read_ensemble(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  const fs::path base = fs::path(manifest_path).parent_path();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(binary::read_text(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path + ": invalid manifest JSON: " + e.what());
  }
  Ensemble e;
  try {
    const std::size_t width = doc.at("width").get<std::size_t>();
    const std::size_t height = doc.at("height").get<std::size_t>();
    const std::size_t n = doc.at("n").get<std::size_t>();
    const auto& members = doc.at("members");
    if (!members.is_array() || members.size() != n) {
      throw DataError(manifest_path + ": manifest lists " + std::to_string(members.size()) + " members, n = " +
                      std::to_string(n));
    }
    for (const auto& m : members) e.members.push_back(read_field((base / m.get<std::string>()).string()));
    if (doc.contains("ground_truth") && !doc["ground_truth"].is_null()) {
      e.ground_truth = read_field((base / doc["ground_truth"].get<std::string>()).string());
    }
    e.seed = doc.value("seed", std::uint64_t{0});
    e.generator = doc.value("generator", std::string{});
    e.validate();
    if (e.width() != width || e.height() != height) {
      throw DataError(manifest_path + ": member dimensions differ from the manifest");
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(manifest_path + ": malformed manifest: " + ex.what());
  }
  return e;
}

}  // namespace morseunc

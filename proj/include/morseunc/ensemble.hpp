#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "morseunc/grid.hpp"

namespace morseunc {

/// Axis-aligned sampling window. Column 0 maps to x0, row 0 (top) to y1.
struct Rect {
  double x0, x1, y0, y1;
};

/// Window spanning three units around the origin, aligned so that x = -1, 0, 1
/// fall on vertices and the origin is as central as the size allows. Exactly
/// the nine central wells of Ackley become interior maxima.
Rect ackley_default_domain(std::size_t width, std::size_t height);

/// Negated Ackley function.
ScalarGrid ackley(std::size_t width, std::size_t height);
ScalarGrid ackley(std::size_t width, std::size_t height, const Rect& domain);

/// Negated Himmelblau function on [-6,6]^2. The grid vertex nearest each of the
/// four analytic minima is set to exactly 0, so the four maxima have equal height.
ScalarGrid himmelblau(std::size_t width, std::size_t height);

struct Gaussian {
  double mx, my, sigma, amplitude;
};

/// Sum of isotropic Gaussians sampled over `domain` (default unit square).
ScalarGrid gaussian_mixture(std::size_t width, std::size_t height, const std::vector<Gaussian>& components,
                            const Rect& domain = {0.0, 1.0, 0.0, 1.0});

/// Four bumps of distinct height in a diamond on the unit square. Their smallest
/// peak-to-saddle drop is also the field's smallest feature over both filtrations.
std::vector<Gaussian> four_gaussians();

enum class NoiseKind { uniform_symmetric, uniform_signed_magnitude, gaussian_truncated, multimodal_mixture };

enum class MixtureSelection { per_vertex, per_member };

/// One mode of the mixture, in units of the amplitude:
/// eps = a * clamp(center * wave(x) + spread * U(-1,1), -1, 1).
/// wave(x) is 1 when wave_cycles is 0, otherwise a seeded planar sinusoid with
/// that many periods across the grid.
struct MixtureComponent {
  double weight = 1.0;
  double center = 0.0;
  double spread = 1.0;
  double wave_cycles = 0.0;
};

struct NoiseSpec {
  NoiseKind kind = NoiseKind::uniform_signed_magnitude;
  double amplitude = 0.0;  // |eps| <= amplitude for every sample
  double sigma = 1.0;      // gaussian_truncated only
  std::vector<MixtureComponent> components;
  MixtureSelection selection = MixtureSelection::per_vertex;
};

const char* to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// Deterministic noise value for (seed, member, vertex); |result| <= spec.amplitude.
double noise_sample(const NoiseSpec& spec, std::uint64_t seed, std::uint32_t member, VertexId vertex,
                    std::size_t width, std::size_t height);

struct Ensemble {
  std::vector<ScalarGrid> members;
  std::optional<ScalarGrid> ground_truth;
  std::uint64_t seed = 0;
  std::string generator;

  std::size_t size() const { return members.size(); }
  std::size_t width() const { return members.front().width(); }
  std::size_t height() const { return members.front().height(); }

  /// Throws DataError unless n >= 1 and every field has the same dimensions.
  void validate() const;
};

Ensemble perturb(const ScalarGrid& ground_truth, const NoiseSpec& noise, std::size_t n, std::uint64_t seed);

ScalarGrid mean_field(const Ensemble& ensemble);

/// Pointwise (minimum, maximum) over members.
std::pair<ScalarGrid, ScalarGrid> bound_fields(const Ensemble& ensemble);

/// Pointwise Euclidean norm of a two-component vector field.
ScalarGrid magnitude(const ScalarGrid& u, const ScalarGrid& v);

/// Writes `ensemble.json` plus `members/member_NNN.mcf` (and `truth.mcf` when present).
void write_ensemble(const std::string& dir, const Ensemble& ensemble);

/// Reads a manifest; member paths are relative to the manifest's directory.
Ensemble read_ensemble(const std::string& manifest_path);

}  // namespace morseunc

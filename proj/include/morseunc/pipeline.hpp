#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "morseunc/ensemble.hpp"
#include "morseunc/render.hpp"
#include "morseunc/summary_maps.hpp"

namespace morseunc {

struct GeneratorSpec {
  std::string fn = "ackley";  // ackley | himmelblau | four_gaussians
  std::size_t width = 256;
  std::size_t height = 256;
};

ScalarGrid generate(const GeneratorSpec& spec);

struct PipelineConfig {
  std::string manifest;                    // ensemble manifest; exclusive with `generator`
  std::optional<GeneratorSpec> generator;  // synthesize truth and perturb in memory
  NoiseSpec noise;
  std::optional<double> noise_scale;  // amplitude = scale * p_f / 2 of the ground truth
  std::size_t n = 50;
  std::uint64_t seed = 0;
  std::optional<std::size_t> l;  // switches labeling to clustering member maxima into l groups
  double cleanup_persistence = 0.0;
  Normalization normalization = Normalization::none;
  SurvivalMode survival_mode = SurvivalMode::pre_merge;
  std::uint32_t bins = 9;
  std::vector<double> thresholds{0.95, 0.80, 0.60};
  std::string output = "artifacts";
  bool render = true;

  /// Throws ArgumentError on any invalid value.
  void validate() const;
};

/// Strict parse: unknown keys, wrong types and bad values raise ArgumentError.
PipelineConfig config_from_json(const std::string& text);
std::string config_to_json(const PipelineConfig& config);

NoiseSpec noise_from_json(const std::string& text);

/// Ensemble named by the config: read from the manifest or synthesized and perturbed.
Ensemble load_ensemble(const PipelineConfig& config);

struct RunSummary {
  std::string json;  // contents of run_summary.json
  std::size_t l = 0;
  std::size_t mandatory_count = 0;
  std::optional<double> feature_persistence;
};

/// Runs the full pipeline and writes every artifact into config.output.
RunSummary compute(const PipelineConfig& config);
RunSummary compute(const PipelineConfig& config, const Ensemble& ensemble);

/// Re-renders the PNG artifacts of a run directory from its saved maps and
/// returns the written file names.
std::vector<std::string> render_artifacts(const std::string& dir, std::uint32_t bins,
                                          const std::vector<double>& thresholds);

/// File name of the agreement-cells image for threshold a, e.g. "cells_95.png".
std::string cells_png_name(double a);

/// Polylines as [[[row, col], ...], ...].
std::string polylines_to_json(const std::vector<Polyline>& lines);
std::vector<Polyline> polylines_from_json(const std::string& text);

/// Per-label anchors used for coloring and for labeling single fields.
std::vector<MandatoryMaximum> labels_from_json(const std::string& text, std::size_t width);

/// {"row", "col", "labels", "probabilities", "counts"}, shared by the CLI and the service.
std::string query_json(const ProbabilisticMap& p, std::size_t row, std::size_t col);

/// Run-length encoding of an agreement-cells image: [[label or null, length], ...].
std::string cells_json(const ProbabilisticMap& p, double a);

}  // namespace morseunc

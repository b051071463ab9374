#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "morseunc/contour.hpp"
#include "morseunc/ensemble.hpp"
#include "morseunc/mandatory.hpp"
#include "morseunc/persistence.hpp"

namespace morseunc {

/// Per-vertex label counts over the ensemble: P_i(x) = counts[x*l + i] / n.
struct ProbabilisticMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint32_t l = 0;
  std::uint32_t n = 0;
  std::vector<std::uint16_t> counts;

  std::size_t size() const { return width * height; }
  std::span<const std::uint16_t> at(VertexId v) const { return {counts.data() + std::size_t(v) * l, l}; }
  double probability(VertexId v, std::uint32_t label) const { return double(counts[std::size_t(v) * l + label]) / n; }
  /// P_label as a dense field.
  std::vector<double> layer(std::uint32_t label) const;

  bool operator==(const ProbabilisticMap&) const = default;
};

enum class Labeling { nearest_mandatory, cluster };

struct LabelingOptions {
  Labeling mode = Labeling::nearest_mandatory;
  std::size_t l = 0;        // cluster mode: number of clusters (0 = number of mandatory maxima)
  std::uint64_t seed = 0;   // cluster mode: first-center choice
};

/// Segment, simplify to min(l, #maxima) cells, and label each cell by its mandatory maximum.
std::vector<std::int32_t> member_labels(const ScalarGrid& member, const GridTopology& topo,
                                        const std::vector<MandatoryMaximum>& mandatory);

/// Build a map from per-member label fields (one entry per vertex, values in [0, l)).
ProbabilisticMap probabilistic_map_from_labels(const std::vector<std::vector<std::int32_t>>& labels,
                                               std::size_t width, std::size_t height, std::uint32_t l);

ProbabilisticMap probabilistic_map(const Ensemble& ensemble, const std::vector<MandatoryMaximum>& mandatory,
                                   const LabelingOptions& options = {});

/// Cluster-mode labels as anchors: one single-vertex region at the vertex nearest each center.
std::vector<MandatoryMaximum> cluster_anchors(const Ensemble& ensemble, std::size_t l, std::uint64_t seed);

struct CertaintyPartition {
  std::vector<std::int32_t> label;  // certain label per vertex, -1 if uncertain
  std::vector<VertexId> uncertain;
};

CertaintyPartition certainty_partition(const ProbabilisticMap& p);

/// 0.5-isocontour of P_label.
std::vector<Polyline> expected_boundary(const ProbabilisticMap& p, std::uint32_t label);

/// 0.5-isocontours of all labels, shared segments kept once.
std::vector<Polyline> expected_boundaries(const ProbabilisticMap& p);

/// Boundaries of a hard labeling, extracted the same way as expected boundaries.
std::vector<Polyline> label_boundaries(const std::vector<std::int32_t>& labels, std::size_t width, std::size_t height,
                                       std::uint32_t l);

/// Label i where P_i(x) >= a, else -1. Requires 0.5 < a <= 1.
std::vector<std::int32_t> agreement_cells(const ProbabilisticMap& p, double a);

struct QueryResult {
  std::vector<std::uint32_t> labels;
  std::vector<double> probabilities;
  std::vector<std::uint16_t> counts;
};

QueryResult query(const ProbabilisticMap& p, std::size_t row, std::size_t col);

enum class SurvivalMode { pre_merge, post_merge };

struct SurvivalMember {
  std::vector<double> beta;  // per vertex
  double total = 0.0;        // sum of cancelled persistence
};

/// Replays the member's cancellations in ascending persistence; each adds the
/// pair's persistence to every vertex of the receiving cell (before or after the merge).
SurvivalMember survival_member(const ScalarGrid& grid, const GridTopology& topo,
                               SurvivalMode mode = SurvivalMode::pre_merge);

enum class Normalization { none, by_member_total };

const char* to_string(Normalization n);
Normalization normalization_from_string(const std::string& name);

struct SurvivalMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;
  Normalization normalization = Normalization::none;
  std::vector<double> member_totals;
};

/// Mean of per-member survival fields. Each vertex sums its member values in
/// ascending order, so the result does not depend on member order.
SurvivalMap survival_map(const Ensemble& ensemble, Normalization normalization = Normalization::none,
                         SurvivalMode mode = SurvivalMode::pre_merge);
SurvivalMap survival_map_from_members(const std::vector<SurvivalMember>& members, std::size_t width,
                                      std::size_t height, Normalization normalization);

/// Equal-width bins over [min, max]; the maximum falls in bin k-1; a constant field maps to bin 0.
std::vector<std::uint32_t> quantize(std::span<const double> values, std::uint32_t k);

// PMP1: "PMP1", u32 width, u32 height, u16 l, u16 n, then l u16 counts per vertex.
binary::Bytes save_probabilistic_map(const ProbabilisticMap& p);
ProbabilisticMap load_probabilistic_map(std::span<const std::uint8_t> bytes);

// SVM1: "SVM1", u32 width, u32 height, f32 per vertex; sidecar JSON {normalization, member_totals}.
binary::Bytes save_survival_map(const SurvivalMap& s);
std::string survival_sidecar_json(const SurvivalMap& s);
SurvivalMap load_survival_map(std::span<const std::uint8_t> bytes, const std::string& sidecar_json);

}  // namespace morseunc

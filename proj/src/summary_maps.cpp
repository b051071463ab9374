#include "morseunc/summary_maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace morseunc {

namespace {

std::size_t maximum_index(const Segmentation& seg, VertexId m) {
  return static_cast<std::size_t>(std::lower_bound(seg.maxima.begin(), seg.maxima.end(), m) - seg.maxima.begin());
}

Segmentation simplified(const ScalarGrid& member, const GridTopology& topo, std::size_t l) {
  const auto seg = segment(member, topo);
  const auto h = superlevel_pairs(member, topo, seg);
  return simplify_to(seg, h, std::min(l, seg.cell_count()));
}

struct ClusterRun {
  std::vector<Segmentation> segs;
  Clustering clusters;
};

ClusterRun cluster_members(const Ensemble& ensemble, const GridTopology& topo, std::size_t l, std::uint64_t seed) {
  if (l == 0) throw ArgumentError("cluster labeling needs a positive label count");
  ClusterRun run;
  std::vector<Point2> points;
  for (const auto& m : ensemble.members) {
    run.segs.push_back(simplified(m, topo, l));
    for (VertexId x : run.segs.back().maxima) points.push_back({double(x / m.width()), double(x % m.width())});
  }
  run.clusters = cluster_maxima_fallback(points, l, seed);
  return run;
}

}  // namespace

std::vector<double> ProbabilisticMap::layer(std::uint32_t label) const {
  if (label >= l) throw ArgumentError("label " + std::to_string(label) + " out of range");
  std::vector<double> out(size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = double(counts[v * l + label]) / n;
  return out;
}

std::vector<std::int32_t> member_labels(const ScalarGrid& member, const GridTopology& topo,
                                        const std::vector<MandatoryMaximum>& mandatory) {
  if (mandatory.empty()) throw ArgumentError("no mandatory maxima to label against");
  for (const auto& m : mandatory) {
    if (m.anchor >= member.size()) throw ArgumentError("mandatory maxima do not match the member dimensions");
  }
  const auto seg = simplified(member, topo, mandatory.size());
  const auto labels = label_member_maxima(seg, mandatory);
  std::vector<std::int32_t> out(member.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = static_cast<std::int32_t>(labels.at(seg.labels[v]));
  return out;
}

ProbabilisticMap probabilistic_map_from_labels(const std::vector<std::vector<std::int32_t>>& labels,
                                               std::size_t width, std::size_t height, std::uint32_t l) {
  if (labels.empty()) throw ArgumentError("no member labelings");
  if (l == 0 || l > 0xffff) throw ArgumentError("label count must be in [1, 65535]");
  if (labels.size() > 0xffff) throw ArgumentError("ensemble too large for 16-bit counts");
  ProbabilisticMap p;
  p.width = width;
  p.height = height;
  p.l = l;
  p.n = static_cast<std::uint32_t>(labels.size());
  p.counts.assign(width * height * l, 0);
  for (const auto& member : labels) {
    if (member.size() != width * height) throw ArgumentError("member labeling has the wrong size");
    for (std::size_t v = 0; v < member.size(); ++v) {
      if (member[v] < 0 || std::uint32_t(member[v]) >= l) throw ArgumentError("label out of range");
      ++p.counts[v * l + std::size_t(member[v])];
    }
  }
  return p;
}

ProbabilisticMap probabilistic_map(const Ensemble& ensemble, const std::vector<MandatoryMaximum>& mandatory,
                                   const LabelingOptions& options) {
  ensemble.validate();
  const GridTopology topo(ensemble.width(), ensemble.height());
  std::vector<std::vector<std::int32_t>> labels;
  labels.reserve(ensemble.size());
  if (options.mode == Labeling::nearest_mandatory) {
    for (const auto& m : ensemble.members) labels.push_back(member_labels(m, topo, mandatory));
    return probabilistic_map_from_labels(labels, ensemble.width(), ensemble.height(),
                                         static_cast<std::uint32_t>(mandatory.size()));
  }

  const std::size_t l = options.l ? options.l : mandatory.size();
  const auto run = cluster_members(ensemble, topo, l, options.seed);
  std::size_t next = 0;
  for (const auto& seg : run.segs) {
    std::vector<std::uint32_t> of_max(seg.maxima.size());
    for (auto& c : of_max) c = run.clusters.assignment[next++];
    std::vector<std::int32_t> out(seg.labels.size());
    for (std::size_t v = 0; v < out.size(); ++v) {
      out[v] = static_cast<std::int32_t>(of_max[maximum_index(seg, seg.labels[v])]);
    }
    labels.push_back(std::move(out));
  }
  return probabilistic_map_from_labels(labels, ensemble.width(), ensemble.height(), static_cast<std::uint32_t>(l));
}

std::vector<MandatoryMaximum> cluster_anchors(const Ensemble& ensemble, std::size_t l, std::uint64_t seed) {
  ensemble.validate();
  const GridTopology topo(ensemble.width(), ensemble.height());
  const auto run = cluster_members(ensemble, topo, l, seed);
  std::vector<MandatoryMaximum> out;
  for (std::size_t j = 0; j < l; ++j) {
    const auto& c = run.clusters.centers[j];
    const auto r = std::min<std::size_t>(ensemble.height() - 1, static_cast<std::size_t>(std::floor(c.row + 0.5)));
    const auto q = std::min<std::size_t>(ensemble.width() - 1, static_cast<std::size_t>(std::floor(c.col + 0.5)));
    MandatoryMaximum m;
    m.label = static_cast<std::uint32_t>(j);
    m.anchor = static_cast<VertexId>(r * ensemble.width() + q);
    m.region = {m.anchor};
    m.low = m.high = std::numeric_limits<double>::quiet_NaN();
    out.push_back(std::move(m));
  }
  return out;
}

CertaintyPartition certainty_partition(const ProbabilisticMap& p) {
  CertaintyPartition out;
  out.label.assign(p.size(), -1);
  for (VertexId v = 0; v < p.size(); ++v) {
    const auto c = p.at(v);
    for (std::uint32_t i = 0; i < p.l; ++i) {
      if (c[i] == p.n) out.label[v] = static_cast<std::int32_t>(i);
    }
    if (out.label[v] < 0) out.uncertain.push_back(v);
  }
  return out;
}

std::vector<Polyline> expected_boundary(const ProbabilisticMap& p, std::uint32_t label) {
  if (p.l < 2) throw ArgumentError("expected boundaries need at least two labels");
  return isocontour(p.layer(label), p.width, p.height, 0.5);
}

std::vector<Polyline> expected_boundaries(const ProbabilisticMap& p) {
  if (p.l < 2) return {};
  std::vector<std::vector<double>> layers;
  for (std::uint32_t i = 0; i < p.l; ++i) layers.push_back(p.layer(i));
  return merged_isocontours(layers, p.width, p.height, 0.5);
}

std::vector<Polyline> label_boundaries(const std::vector<std::int32_t>& labels, std::size_t width, std::size_t height,
                                       std::uint32_t l) {
  return expected_boundaries(probabilistic_map_from_labels({labels}, width, height, l));
}

std::vector<std::int32_t> agreement_cells(const ProbabilisticMap& p, double a) {
  if (!(a > 0.5 && a <= 1.0)) throw ArgumentError("agreement threshold must lie in (0.5, 1]");
  std::vector<std::int32_t> out(p.size(), -1);
  const double need = a * double(p.n) - 1e-9 * double(p.n);
  for (VertexId v = 0; v < p.size(); ++v) {
    const auto c = p.at(v);
    for (std::uint32_t i = 0; i < p.l; ++i) {
      if (double(c[i]) >= need) out[v] = static_cast<std::int32_t>(i);
    }
  }
  return out;
}

QueryResult query(const ProbabilisticMap& p, std::size_t row, std::size_t col) {
  if (row >= p.height || col >= p.width) {
    throw ArgumentError("query point (" + std::to_string(row) + ", " + std::to_string(col) + ") outside " +
                        std::to_string(p.height) + "x" + std::to_string(p.width) + " grid");
  }
  const auto v = static_cast<VertexId>(row * p.width + col);
  QueryResult q;
  const auto c = p.at(v);
  for (std::uint32_t i = 0; i < p.l; ++i) {
    q.labels.push_back(i);
    q.counts.push_back(c[i]);
    q.probabilities.push_back(double(c[i]) / p.n);
  }
  return q;
}

SurvivalMember survival_member(const ScalarGrid& grid, const GridTopology& topo, SurvivalMode mode) {
  const auto seg = segment(grid, topo);
  const auto h = superlevel_pairs(grid, topo, seg);
  const auto steps = cancellation_sequence(h);
  const std::size_t m = seg.maxima.size();
  std::vector<std::vector<std::size_t>> cells(m);
  for (std::size_t i = 0; i < m; ++i) cells[i] = {i};
  std::vector<double> beta_max(m, 0.0);
  SurvivalMember out;
  for (const auto& s : steps) {
    const std::size_t k = maximum_index(seg, s.absorber);
    const std::size_t d = maximum_index(seg, s.dying);
    if (mode == SurvivalMode::pre_merge) {
      for (std::size_t o : cells[k]) beta_max[o] += s.persistence;
    }
    cells[k].insert(cells[k].end(), cells[d].begin(), cells[d].end());
    cells[d].clear();
    cells[d].shrink_to_fit();
    if (mode == SurvivalMode::post_merge) {
      for (std::size_t o : cells[k]) beta_max[o] += s.persistence;
    }
    out.total += s.persistence;
  }
  out.beta.resize(grid.size());
  for (std::size_t v = 0; v < grid.size(); ++v) out.beta[v] = beta_max[maximum_index(seg, seg.labels[v])];
  return out;
}

const char* to_string(Normalization n) { return n == Normalization::none ? "none" : "by_member_total"; }

Normalization normalization_from_string(const std::string& name) {
  if (name == "none") return Normalization::none;
  if (name == "by_member_total") return Normalization::by_member_total;
  throw ArgumentError("unknown survival normalization \"" + name + "\"");
}

SurvivalMap survival_map_from_members(const std::vector<SurvivalMember>& members, std::size_t width,
                                      std::size_t height, Normalization normalization) {
  if (members.empty()) throw ArgumentError("survival map needs at least one member");
  SurvivalMap s;
  s.width = width;
  s.height = height;
  s.normalization = normalization;
  s.values.assign(width * height, 0.0);
  for (const auto& m : members) {
    if (m.beta.size() != width * height) throw ArgumentError("member survival field has the wrong size");
    s.member_totals.push_back(m.total);
  }
  std::vector<double> column(members.size());
  for (std::size_t v = 0; v < s.values.size(); ++v) {
    for (std::size_t i = 0; i < members.size(); ++i) {
      const auto& m = members[i];
      column[i] = normalization == Normalization::none ? m.beta[v] : (m.total > 0.0 ? m.beta[v] / m.total : 0.0);
    }
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double x : column) sum += x;
    s.values[v] = sum / double(members.size());
  }
  return s;
}

SurvivalMap survival_map(const Ensemble& ensemble, Normalization normalization, SurvivalMode mode) {
  ensemble.validate();
  const GridTopology topo(ensemble.width(), ensemble.height());
  std::vector<SurvivalMember> members;
  members.reserve(ensemble.size());
  for (const auto& m : ensemble.members) members.push_back(survival_member(m, topo, mode));
  return survival_map_from_members(members, ensemble.width(), ensemble.height(), normalization);
}

std::vector<std::uint32_t> quantize(std::span<const double> values, std::uint32_t k) {
  if (k == 0) throw ArgumentError("quantization needs at least one bin");
  std::vector<std::uint32_t> out(values.size(), 0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, span = *hi - *lo;
  if (!(span > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = (values[i] - min) / span * double(k);
    out[i] = std::min<std::uint32_t>(k - 1, static_cast<std::uint32_t>(t));
  }
  return out;
}

binary::Bytes save_probabilistic_map(const ProbabilisticMap& p) {
  binary::Writer w;
  w.reserve(16 + 2 * p.counts.size());
  w.magic("PMP1");
  w.u32(static_cast<std::uint32_t>(p.width));
  w.u32(static_cast<std::uint32_t>(p.height));
  w.u16(static_cast<std::uint16_t>(p.l));
  w.u16(static_cast<std::uint16_t>(p.n));
  for (auto c : p.counts) w.u16(c);
  return w.take();
}

ProbabilisticMap load_probabilistic_map(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes);
  r.expect_magic("PMP1");
  ProbabilisticMap p;
  p.width = r.u32();
  p.height = r.u32();
  const std::size_t dims_at = r.offset();
  p.l = r.u16();
  p.n = r.u16();
  if (p.l == 0 || p.n == 0) throw FormatError("label count and ensemble size must be positive", dims_at);
  const std::size_t count = p.width * p.height * p.l;
  r.need(count * 2, "truncated payload");
  p.counts.resize(count);
  for (std::size_t v = 0; v < p.width * p.height; ++v) {
    const std::size_t at = r.offset();
    std::uint32_t sum = 0;
    for (std::uint32_t i = 0; i < p.l; ++i) sum += p.counts[v * p.l + i] = r.u16();
    if (sum != p.n) throw FormatError("vertex counts do not sum to n", at);
  }
  r.expect_end();
  return p;
}

binary::Bytes save_survival_map(const SurvivalMap& s) {
  binary::Writer w;
  w.reserve(12 + 4 * s.values.size());
  w.magic("SVM1");
  w.u32(static_cast<std::uint32_t>(s.width));
  w.u32(static_cast<std::uint32_t>(s.height));
  for (double v : s.values) w.f32(static_cast<float>(v));
  return w.take();
}

std::string survival_sidecar_json(const SurvivalMap& s) {
  nlohmann::json doc{{"normalization", to_string(s.normalization)}, {"member_totals", s.member_totals}};
  return doc.dump(2) + "\n";
}

SurvivalMap load_survival_map(std::span<const std::uint8_t> bytes, const std::string& sidecar_json) {
  binary::Reader r(bytes);
  r.expect_magic("SVM1");
  SurvivalMap s;
  s.width = r.u32();
  s.height = r.u32();
  const std::size_t count = s.width * s.height;
  r.need(count * 4, "truncated payload");
  s.values.resize(count);
  for (auto& v : s.values) {
    const std::size_t at = r.offset();
    v = r.f32();
    if (!std::isfinite(v) || v < 0.0) throw FormatError("survival value must be finite and >= 0", at);
  }
  r.expect_end();
  try {
    const auto doc = nlohmann::json::parse(sidecar_json);
    s.normalization = normalization_from_string(doc.at("normalization").get<std::string>());
    s.member_totals = doc.at("member_totals").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed survival sidecar: ") + e.what());
  } catch (const ArgumentError& e) {
    throw DataError(std::string("malformed survival sidecar: ") + e.what());
  }
  return s;
}

}  // namespace morseunc

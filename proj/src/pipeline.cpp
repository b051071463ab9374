#include "morseunc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <set>

#include <json.hpp>

namespace morseunc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ArgumentError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ArgumentError("unknown key \"" + key + "\" in " + where);
  }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ArgumentError("bad value for \"" + std::string(key) + "\" in " + where);
  }
}

std::size_t get_count(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ArgumentError("\"" + std::string(key) + "\" in " + where + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

double get_real(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ArgumentError("\"" + std::string(key) + "\" in " + where + " must be a number");
  return v.get<double>();
}

NoiseSpec parse_noise(const json& j, std::optional<double>* scale) {
  const std::string where = "noise";
  only_keys(j, {"kind", "amplitude", "scale", "sigma", "selection", "components"}, where);
  NoiseSpec spec;
  if (j.contains("kind")) spec.kind = noise_kind_from_string(get<std::string>(j, "kind", where));
  if (j.contains("amplitude")) spec.amplitude = get_real(j, "amplitude", where);
  if (j.contains("scale")) {
    if (!scale) throw ArgumentError("noise scale needs a ground truth; give an amplitude");
    *scale = get_real(j, "scale", where);
  }
  if (j.contains("amplitude") && j.contains("scale")) throw ArgumentError("noise takes amplitude or scale, not both");
  if (j.contains("sigma")) spec.sigma = get_real(j, "sigma", where);
  if (j.contains("selection")) {
    const auto s = get<std::string>(j, "selection", where);
    if (s == "per_vertex") spec.selection = MixtureSelection::per_vertex;
    else if (s == "per_member") spec.selection = MixtureSelection::per_member;
    else throw ArgumentError("unknown mixture selection \"" + s + "\"");
  }
  if (j.contains("components")) {
    if (!j["components"].is_array()) throw ArgumentError("noise components must be an array");
    for (const auto& c : j["components"]) {
      only_keys(c, {"weight", "center", "spread", "wave_cycles"}, "noise component");
      MixtureComponent m;
      if (c.contains("weight")) m.weight = get_real(c, "weight", "noise component");
      if (c.contains("center")) m.center = get_real(c, "center", "noise component");
      if (c.contains("spread")) m.spread = get_real(c, "spread", "noise component");
      if (c.contains("wave_cycles")) m.wave_cycles = get_real(c, "wave_cycles", "noise component");
      spec.components.push_back(m);
    }
  }
  return spec;
}

json noise_to_json(const NoiseSpec& spec, const std::optional<double>& scale) {
  json j{{"kind", to_string(spec.kind)}};
  if (scale) j["scale"] = *scale;
  else j["amplitude"] = spec.amplitude;
  if (spec.kind == NoiseKind::gaussian_truncated) j["sigma"] = spec.sigma;
  if (spec.kind == NoiseKind::multimodal_mixture) {
    j["selection"] = spec.selection == MixtureSelection::per_vertex ? "per_vertex" : "per_member";
    j["components"] = json::array();
    for (const auto& c : spec.components) {
      j["components"].push_back(
          {{"weight", c.weight}, {"center", c.center}, {"spread", c.spread}, {"wave_cycles", c.wave_cycles}});
    }
  }
  return j;
}

json polylines_json(const std::vector<Polyline>& lines) {
  json out = json::array();
  for (const auto& line : lines) {
    json pts = json::array();
    for (const auto& p : line) pts.push_back({p.row, p.col});
    out.push_back(std::move(pts));
  }
  return out;
}

json nullable(double d) { return std::isfinite(d) ? json(d) : json(nullptr); }

void write_json(const fs::path& path, const json& doc) { binary::write_text(path.string(), doc.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  const auto text = binary::read_text(path.string());
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

ScalarGrid generate(const GeneratorSpec& spec) {
  if (spec.width < 2 || spec.height < 2) throw ArgumentError("generator grid must be at least 2x2");
  if (spec.fn == "ackley") return ackley(spec.width, spec.height);
  if (spec.fn == "himmelblau") return himmelblau(spec.width, spec.height);
  if (spec.fn == "four_gaussians" || spec.fn == "four-gaussians") {
    return gaussian_mixture(spec.width, spec.height, four_gaussians());
  }
  throw ArgumentError("unknown generator \"" + spec.fn + "\"");
}

void PipelineConfig::validate() const {
  if (manifest.empty() == !generator.has_value()) {
    throw ArgumentError("config needs exactly one input: a manifest or a generator");
  }
  if (generator) {
    if (generator->width < 2 || generator->height < 2) throw ArgumentError("generator grid must be at least 2x2");
    const auto& fn = generator->fn;
    if (fn != "ackley" && fn != "himmelblau" && fn != "four_gaussians" && fn != "four-gaussians") {
      throw ArgumentError("unknown generator \"" + fn + "\"");
    }
    if (n < 1 || n > 0xffff) throw ArgumentError("n must be in [1, 65535]");
  }
  if (!(std::isfinite(noise.amplitude) && noise.amplitude >= 0.0)) throw ArgumentError("noise amplitude must be >= 0");
  if (noise_scale && !(std::isfinite(*noise_scale) && *noise_scale >= 0.0)) {
    throw ArgumentError("noise scale must be >= 0");
  }
  if (noise_scale && !generator) throw ArgumentError("noise scale applies to generator input only");
  if (noise.kind == NoiseKind::multimodal_mixture && noise.components.empty()) {
    throw ArgumentError("mixture noise needs at least one component");
  }
  if (l && *l == 0) throw ArgumentError("l must be positive");
  if (!(std::isfinite(cleanup_persistence) && cleanup_persistence >= 0.0)) {
    throw ArgumentError("cleanup_persistence must be >= 0");
  }
  if (bins < 1 || bins > 256) throw ArgumentError("bins must be in [1, 256]");
  for (double a : thresholds) {
    if (!(a > 0.5 && a <= 1.0)) throw ArgumentError("agreement thresholds must lie in (0.5, 1]");
  }
  if (output.empty()) throw ArgumentError("output directory must not be empty");
}

PipelineConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config is not valid JSON: ") + e.what());
  }
  const std::string where = "config";
  only_keys(j,
            {"manifest", "generator", "noise", "n", "seed", "l", "cleanup_persistence", "normalization",
             "survival_mode", "bins", "thresholds", "output", "render"},
            where);
  PipelineConfig c;
  if (j.contains("manifest")) c.manifest = get<std::string>(j, "manifest", where);
  if (j.contains("generator")) {
    const auto& g = j["generator"];
    only_keys(g, {"fn", "size", "width", "height"}, "generator");
    GeneratorSpec spec;
    if (g.contains("fn")) spec.fn = get<std::string>(g, "fn", "generator");
    if (g.contains("size")) spec.width = spec.height = get_count(g, "size", "generator");
    if (g.contains("width")) spec.width = get_count(g, "width", "generator");
    if (g.contains("height")) spec.height = get_count(g, "height", "generator");
    c.generator = spec;
  }
  if (j.contains("noise")) c.noise = parse_noise(j["noise"], &c.noise_scale);
  if (j.contains("n")) c.n = get_count(j, "n", where);
  if (j.contains("seed")) c.seed = get_count(j, "seed", where);
  if (j.contains("l") && !j["l"].is_null()) c.l = get_count(j, "l", where);
  if (j.contains("cleanup_persistence")) c.cleanup_persistence = get_real(j, "cleanup_persistence", where);
  if (j.contains("normalization")) c.normalization = normalization_from_string(get<std::string>(j, "normalization", where));
  if (j.contains("survival_mode")) {
    const auto m = get<std::string>(j, "survival_mode", where);
    if (m == "pre_merge") c.survival_mode = SurvivalMode::pre_merge;
    else if (m == "post_merge") c.survival_mode = SurvivalMode::post_merge;
    else throw ArgumentError("unknown survival mode \"" + m + "\"");
  }
  if (j.contains("bins")) c.bins = static_cast<std::uint32_t>(std::min<std::size_t>(get_count(j, "bins", where), 1u << 20));
  if (j.contains("thresholds")) {
    if (!j["thresholds"].is_array()) throw ArgumentError("thresholds must be an array");
    c.thresholds.clear();
    for (const auto& a : j["thresholds"]) {
      if (!a.is_number()) throw ArgumentError("thresholds must be numbers");
      c.thresholds.push_back(a.get<double>());
    }
  }
  if (j.contains("output")) c.output = get<std::string>(j, "output", where);
  if (j.contains("render")) c.render = get<bool>(j, "render", where);
  c.validate();
  return c;
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  if (!c.manifest.empty()) j["manifest"] = c.manifest;
  if (c.generator) {
    j["generator"] = {{"fn", c.generator->fn}, {"width", c.generator->width}, {"height", c.generator->height}};
    j["noise"] = noise_to_json(c.noise, c.noise_scale);
    j["n"] = c.n;
    j["seed"] = c.seed;
  }
  j["l"] = c.l ? json(*c.l) : json(nullptr);
  j["cleanup_persistence"] = c.cleanup_persistence;
  j["normalization"] = to_string(c.normalization);
  j["survival_mode"] = c.survival_mode == SurvivalMode::pre_merge ? "pre_merge" : "post_merge";
  j["bins"] = c.bins;
  j["thresholds"] = c.thresholds;
  j["output"] = c.output;
  j["render"] = c.render;
  return j.dump(2) + "\n";
}

NoiseSpec noise_from_json(const std::string& text) {
  try {
    return parse_noise(json::parse(text), nullptr);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("noise spec is not valid JSON: ") + e.what());
  }
}

Ensemble load_ensemble(const PipelineConfig& config) {
  config.validate();
  if (!config.manifest.empty()) return read_ensemble(config.manifest);
  const auto truth = generate(*config.generator);
  NoiseSpec noise = config.noise;
  if (config.noise_scale) {
    const double pf = min_feature_persistence(truth, GridTopology(truth));
    if (!std::isfinite(pf)) throw DataError("ground truth has no finite feature persistence to scale noise by");
    noise.amplitude = *config.noise_scale * pf / 2.0;
  }
  return perturb(truth, noise, config.n, config.seed);
}

RunSummary compute(const PipelineConfig& config) { return compute(config, load_ensemble(config)); }

RunSummary compute(const PipelineConfig& config, const Ensemble& e) {
  config.validate();
  e.validate();
  Stopwatch clock;
  json timings;
  const fs::path out(config.output);
  fs::create_directories(out);
  const std::size_t w = e.width(), h = e.height();
  const GridTopology topo(w, h);
  timings["load"] = clock.lap();

  std::optional<double> pf;
  if (e.ground_truth) {
    const double d = min_feature_persistence(*e.ground_truth, topo);
    if (std::isfinite(d)) pf = d;
  }
  const auto [lo, hi] = bound_fields(e);
  const auto mandatory = mandatory_maxima(lo, hi, topo, config.cleanup_persistence);
  timings["mandatory"] = clock.lap();

  std::vector<MandatoryMaximum> anchors = mandatory;
  ProbabilisticMap p;
  if (config.l) {
    anchors = cluster_anchors(e, *config.l, config.seed);
    p = probabilistic_map(e, mandatory, {Labeling::cluster, *config.l, config.seed});
  } else {
    p = probabilistic_map(e, mandatory);
  }
  timings["probabilistic"] = clock.lap();

  const auto s = survival_map(e, config.normalization, config.survival_mode);
  timings["survival"] = clock.lap();

  const auto mean = mean_field(e);
  const auto mean_seg = segment(mean, topo);
  const auto mean_h = superlevel_pairs(mean, topo, mean_seg);
  const auto expected = expected_boundaries(p);
  const auto mean_lines = label_boundaries(member_labels(mean, topo, anchors), w, h, p.l);
  std::optional<std::vector<Polyline>> truth_lines;
  std::optional<Segmentation> truth_seg;
  std::optional<PersistenceHierarchy> truth_h;
  if (e.ground_truth) {
    truth_seg = segment(*e.ground_truth, topo);
    truth_h = superlevel_pairs(*e.ground_truth, topo, *truth_seg);
    truth_lines = label_boundaries(member_labels(*e.ground_truth, topo, anchors), w, h, p.l);
  }
  timings["boundaries"] = clock.lap();

  std::set<std::string> artifacts;
  auto put_bytes = [&](const std::string& name, const binary::Bytes& bytes) {
    binary::write_file((out / name).string(), bytes);
    artifacts.insert(name);
  };
  auto put_json = [&](const std::string& name, const json& doc) {
    write_json(out / name, doc);
    artifacts.insert(name);
  };
  auto put_text = [&](const std::string& name, const std::string& text) {
    binary::write_text((out / name).string(), text);
    artifacts.insert(name);
  };

  put_text("config.json", config_to_json(config));
  put_text("mandatory.json", mandatory_to_json(mandatory, w, 2) + "\n");
  const auto palette = label_palette(p.l);
  json labels = json::array();
  for (const auto& a : anchors) {
    const Rgb c = palette.colors[a.label];
    labels.push_back({{"label", a.label}, {"anchor", {a.anchor / w, a.anchor % w}}, {"color", {c.r, c.g, c.b}}});
  }
  put_json("labels.json", labels);
  put_bytes("pmap.pmp", save_probabilistic_map(p));
  put_bytes("survival.svm", save_survival_map(s));
  put_text("survival.json", survival_sidecar_json(s));
  put_bytes("meanfield.mcf", save_field(mean));
  put_bytes("meanfield.msg", save_segmentation(mean_seg));
  put_text("meanfield_hierarchy.json", hierarchy_to_json(mean_h, 2) + "\n");
  json boundaries{{"expected", polylines_json(expected)}, {"meanfield", polylines_json(mean_lines)}};
  if (truth_seg) {
    put_bytes("truth.msg", save_segmentation(*truth_seg));
    put_text("truth_hierarchy.json", hierarchy_to_json(*truth_h, 2) + "\n");
    boundaries["truth"] = polylines_json(*truth_lines);
  }
  put_json("boundaries.json", boundaries);

  const auto part = certainty_partition(p);
  json agreement = json::array();
  for (double a : config.thresholds) {
    const auto cells = agreement_cells(p, a);
    agreement.push_back({{"a", a}, {"assigned", cells.size() - std::size_t(std::count(cells.begin(), cells.end(), -1))}});
  }
  const auto bins = quantize(s.values, config.bins);
  std::vector<std::size_t> bin_counts(config.bins, 0);
  for (auto b : bins) ++bin_counts[b];
  const auto [smin, smax] = std::minmax_element(s.values.begin(), s.values.end());

  json summary{{"width", w},
               {"height", h},
               {"n", e.size()},
               {"l", p.l},
               {"mandatory_count", mandatory.size()},
               {"labeling", config.l ? "cluster" : "nearest_mandatory"},
               {"feature_persistence", pf ? json(*pf) : json(nullptr)},
               {"certain", p.size() - part.uncertain.size()},
               {"uncertain", part.uncertain.size()},
               {"agreement", agreement},
               {"survival",
                {{"min", *smin},
                 {"max", *smax},
                 {"normalization", to_string(s.normalization)},
                 {"mode", config.survival_mode == SurvivalMode::pre_merge ? "pre_merge" : "post_merge"},
                 {"bins", config.bins},
                 {"bin_counts", bin_counts}}},
               {"meanfield_maxima", mean_seg.cell_count()},
               {"truth_maxima", truth_seg ? json(truth_seg->cell_count()) : json(nullptr)}};
  if (truth_lines) {
    summary["boundary_distance"] = {{"expected_to_truth", nullable(mean_symmetric_distance(expected, *truth_lines))},
                                    {"meanfield_to_truth", nullable(mean_symmetric_distance(mean_lines, *truth_lines))}};
  } else {
    summary["boundary_distance"] = nullptr;
  }
  timings["summary"] = clock.lap();

  if (config.render) {
    for (const auto& name : render_artifacts(out.string(), config.bins, config.thresholds)) artifacts.insert(name);
  }
  timings["render"] = clock.lap();
  artifacts.insert("run_summary.json");
  summary["artifacts"] = std::vector<std::string>(artifacts.begin(), artifacts.end());
  write_json(out / "run_summary.json", summary);
  write_json(out / "timings.json", timings);

  RunSummary r;
  r.json = summary.dump(2) + "\n";
  r.l = p.l;
  r.mandatory_count = mandatory.size();
  r.feature_persistence = pf;
  return r;
}

std::string cells_png_name(double a) {
  return "cells_" + std::to_string(static_cast<int>(std::floor(a * 100.0 + 0.5))) + ".png";
}

std::vector<std::string> render_artifacts(const std::string& dir, std::uint32_t bins,
                                          const std::vector<double>& thresholds) {
  if (bins < 1 || bins > 256) throw ArgumentError("bins must be in [1, 256]");
  const fs::path base(dir);
  const auto p = load_probabilistic_map(binary::read_file((base / "pmap.pmp").string()));
  const auto s = load_survival_map(binary::read_file((base / "survival.svm").string()),
                                   binary::read_text((base / "survival.json").string()));
  if (s.width != p.width || s.height != p.height) throw DataError("survival and probabilistic maps differ in size");
  const auto expected = polylines_from_json(read_json(base / "boundaries.json").at("expected").dump());
  const auto palette = label_palette(p.l);

  std::vector<std::string> written;
  auto save = [&](const std::string& name, const RGBImage& img) {
    write_png(img, (base / name).string());
    written.push_back(name);
  };
  const auto blended = blend(p, palette);
  save("probabilistic.png", blended);
  save("probabilistic_boundaries.png", overlay_contours(blended, expected));
  save("survival.png", heatmap(s.values, s.width, s.height));
  const auto q = quantize(s.values, bins);
  const std::vector<std::int32_t> qi(q.begin(), q.end());
  save("survival_quantized.png", categorical(qi, s.width, s.height, quantized_palette(bins)));
  for (double a : thresholds) save(cells_png_name(a), categorical(agreement_cells(p, a), p.width, p.height, palette));
  return written;
}

std::string polylines_to_json(const std::vector<Polyline>& lines) { return polylines_json(lines).dump(); }

std::vector<Polyline> polylines_from_json(const std::string& text) {
  std::vector<Polyline> out;
  try {
    for (const auto& line : json::parse(text)) {
      Polyline pl;
      for (const auto& pt : line) pl.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
      out.push_back(std::move(pl));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed polyline JSON: ") + e.what());
  }
  return out;
}

std::vector<MandatoryMaximum> labels_from_json(const std::string& text, std::size_t width) {
  std::vector<MandatoryMaximum> out;
  try {
    for (const auto& item : json::parse(text)) {
      MandatoryMaximum m;
      m.label = item.at("label").get<std::uint32_t>();
      m.anchor = static_cast<VertexId>(item.at("anchor").at(0).get<std::size_t>() * width +
                                       item.at("anchor").at(1).get<std::size_t>());
      m.region = {m.anchor};
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed labels JSON: ") + e.what());
  }
  return out;
}

std::string query_json(const ProbabilisticMap& p, std::size_t row, std::size_t col) {
  const auto q = query(p, row, col);
  return json{{"row", row}, {"col", col}, {"labels", q.labels}, {"probabilities", q.probabilities}, {"counts", q.counts}}
      .dump();
}

std::string cells_json(const ProbabilisticMap& p, double a) {
  const auto cells = agreement_cells(p, a);
  json runs = json::array();
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < cells.size();) {
    std::size_t j = i + 1;
    while (j < cells.size() && cells[j] == cells[i]) ++j;
    runs.push_back({cells[i] < 0 ? json(nullptr) : json(cells[i]), j - i});
    if (cells[i] >= 0) assigned += j - i;
    i = j;
  }
  return json{{"width", p.width}, {"height", p.height}, {"a", a}, {"assigned", assigned}, {"runs", std::move(runs)}}
      .dump();
}

}  // namespace morseunc

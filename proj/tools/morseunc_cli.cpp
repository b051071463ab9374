#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "morseunc/pipeline.hpp"
#include "morseunc/service.hpp"

using namespace morseunc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kData = 3 };

int fail(Exit code, const std::string& message) {
  std::cerr << json{{"error", code == kConfig ? "config" : "data"}, {"message", message}}.dump() << "\n";
  return code;
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("bad threshold \"" + item + "\"");
    }
  }
  return out;
}

struct Options {
  std::string dir = ".";
  std::string fn = "ackley";
  std::size_t size = 256, width = 0, height = 0;
  std::string out, field, manifest, artifacts, config_path, noise = "uniform_signed_magnitude", noise_json;
  std::optional<double> scale, amplitude, sigma, cleanup;
  std::optional<std::size_t> n, l;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> bins;
  std::string normalization, survival_mode, thresholds, host = "127.0.0.1", static_dir;
  bool no_render = false;
  std::optional<int> port;
  std::size_t row = 0, col = 0;
};

fs::path artifacts_dir(const Options& o) { return o.artifacts.empty() ? fs::path(o.dir) / "artifacts" : fs::path(o.artifacts); }

NoiseSpec noise_spec(const Options& o) {
  NoiseSpec spec = o.noise_json.empty() ? NoiseSpec{} : noise_from_json(binary::read_text(o.noise_json));
  if (o.noise_json.empty() || o.noise != "uniform_signed_magnitude") spec.kind = noise_kind_from_string(o.noise);
  if (o.amplitude) spec.amplitude = *o.amplitude;
  if (o.sigma) spec.sigma = *o.sigma;
  return spec;
}

int cmd_synth(const Options& o) {
  GeneratorSpec g{o.fn, o.width ? o.width : o.size, o.height ? o.height : o.size};
  const auto f = generate(g);
  const fs::path out = o.out.empty() ? fs::path(o.dir) / "truth.mcf" : fs::path(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_field(out.string(), f);
  const GridTopology topo(f);
  const double pf = min_feature_persistence(f, topo);
  std::cout << json{{"path", out.string()},
                    {"width", f.width()},
                    {"height", f.height()},
                    {"maxima", segment(f, topo).cell_count()},
                    {"feature_persistence", std::isfinite(pf) ? json(pf) : json(nullptr)}}
                   .dump()
            << "\n";
  return kOk;
}

int cmd_perturb(const Options& o) {
  const fs::path field = o.field.empty() ? fs::path(o.dir) / "truth.mcf" : fs::path(o.field);
  const auto truth = read_field(field.string());
  auto spec = noise_spec(o);
  if (o.scale && o.amplitude) throw ArgumentError("give --scale or --amplitude, not both");
  if (o.scale) {
    const double pf = min_feature_persistence(truth, GridTopology(truth));
    if (!std::isfinite(pf)) throw DataError("field has a single extremum; --scale is undefined");
    spec.amplitude = *o.scale * pf / 2.0;
  }
  const std::size_t n = o.n.value_or(50);
  if (n < 1 || n > 0xffff) throw ArgumentError("--n must be in [1, 65535]");
  const auto e = perturb(truth, spec, n, o.seed.value_or(0));
  write_ensemble(o.dir, e);
  std::cout << json{{"manifest", (fs::path(o.dir) / "ensemble.json").string()}, {"n", n}, {"amplitude", spec.amplitude},
                    {"generator", e.generator}}
                   .dump()
            << "\n";
  return kOk;
}

int cmd_compute(const Options& o, const CLI::App& sub) {
  PipelineConfig c = o.config_path.empty() ? PipelineConfig{} : config_from_json(binary::read_text(o.config_path));
  if (sub.count("--fn") || sub.count("--size")) {
    c.manifest.clear();
    c.generator = GeneratorSpec{o.fn, o.size, o.size};
  }
  if (!o.manifest.empty()) {
    c.manifest = o.manifest;
    c.generator.reset();
  }
  if (c.manifest.empty() && !c.generator) c.manifest = (fs::path(o.dir) / "ensemble.json").string();
  if (!c.manifest.empty() && !fs::exists(c.manifest)) throw DataError("manifest " + c.manifest + " not found");
  if (sub.count("--noise") || sub.count("--noise-json")) c.noise = noise_spec(o);
  if (o.amplitude) {
    c.noise.amplitude = *o.amplitude;
    c.noise_scale.reset();
  }
  if (o.scale) c.noise_scale = *o.scale;
  if (o.n) c.n = *o.n;
  if (o.seed) c.seed = *o.seed;
  if (o.l) c.l = *o.l;
  if (o.cleanup) c.cleanup_persistence = *o.cleanup;
  if (!o.normalization.empty()) c.normalization = normalization_from_string(o.normalization);
  if (o.survival_mode == "pre_merge") c.survival_mode = SurvivalMode::pre_merge;
  else if (o.survival_mode == "post_merge") c.survival_mode = SurvivalMode::post_merge;
  else if (!o.survival_mode.empty()) throw ArgumentError("unknown survival mode \"" + o.survival_mode + "\"");
  if (o.bins) c.bins = *o.bins;
  if (!o.thresholds.empty()) c.thresholds = parse_thresholds(o.thresholds);
  if (!o.artifacts.empty() || o.config_path.empty()) c.output = artifacts_dir(o).string();
  if (o.no_render) c.render = false;
  c.validate();
  std::cout << compute(c).json;
  return kOk;
}

int cmd_render(const Options& o) {
  const auto dir = artifacts_dir(o);
  std::uint32_t bins = 9;
  std::vector<double> thresholds{0.95, 0.80, 0.60};
  if (fs::exists(dir / "config.json")) {
    const auto c = config_from_json(binary::read_text((dir / "config.json").string()));
    bins = c.bins;
    thresholds = c.thresholds;
  }
  if (o.bins) bins = *o.bins;
  if (!o.thresholds.empty()) thresholds = parse_thresholds(o.thresholds);
  std::cout << json(render_artifacts(dir.string(), bins, thresholds)).dump() << "\n";
  return kOk;
}

int cmd_query(const Options& o) {
  const auto p = load_probabilistic_map(binary::read_file((artifacts_dir(o) / "pmap.pmp").string()));
  std::cout << query_json(p, o.row, o.col) << "\n";
  return kOk;
}

int cmd_serve(const Options& o) {
  const int port = o.port ? *o.port : default_port();
  if (port < 1 || port > 65535) throw ArgumentError("--port must be in [1, 65535]");
  const Service service(artifacts_dir(o).string(), o.static_dir);
  std::cerr << "serving " << artifacts_dir(o).string() << " on http://" << o.host << ":" << port << "\n";
  serve(service, o.host, port);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic and survival maps of Morse complexes over scalar-field ensembles"};
  app.require_subcommand(1);
  Options o;
  auto dir_opt = [&](CLI::App* s) { s->add_option("--dir", o.dir, "Working directory")->capture_default_str(); };

  auto* synth = app.add_subcommand("synth", "Sample an analytic test field");
  dir_opt(synth);
  synth->add_option("--fn", o.fn, "ackley | himmelblau | four-gaussians")->capture_default_str();
  synth->add_option("--size", o.size, "Square grid side")->capture_default_str();
  synth->add_option("--width", o.width, "Grid width (overrides --size)");
  synth->add_option("--height", o.height, "Grid height (overrides --size)");
  synth->add_option("--out", o.out, "Output field (default DIR/truth.mcf)");

  auto noise_opts = [&](CLI::App* s) {
    s->add_option("--noise", o.noise, "Noise kind")->capture_default_str();
    s->add_option("--noise-json", o.noise_json, "Noise spec JSON file (mixture components)");
    s->add_option("--scale", o.scale, "Amplitude as a multiple of p_f/2");
    s->add_option("--amplitude", o.amplitude, "Absolute noise bound");
    s->add_option("--sigma", o.sigma, "Truncated gaussian sigma, in amplitude units");
    s->add_option("--n", o.n, "Ensemble size");
    s->add_option("--seed", o.seed, "Noise seed");
  };
  auto* perturb_cmd = app.add_subcommand("perturb", "Build an ensemble from a field with bounded noise");
  dir_opt(perturb_cmd);
  perturb_cmd->add_option("--field", o.field, "Input field (default DIR/truth.mcf)");
  noise_opts(perturb_cmd);

  auto* compute_cmd = app.add_subcommand("compute", "Compute maps and artifacts");
  dir_opt(compute_cmd);
  compute_cmd->add_option("--config", o.config_path, "Pipeline config JSON");
  compute_cmd->add_option("--manifest", o.manifest, "Ensemble manifest (default DIR/ensemble.json)");
  compute_cmd->add_option("--fn", o.fn, "Synthesize the ensemble from a generator instead");
  compute_cmd->add_option("--size", o.size, "Generator grid side");
  noise_opts(compute_cmd);
  compute_cmd->add_option("--artifacts,--out", o.artifacts, "Output directory (default DIR/artifacts)");
  compute_cmd->add_option("--l", o.l, "Cluster member maxima into l labels");
  compute_cmd->add_option("--cleanup", o.cleanup, "Drop mandatory maxima with smaller margin");
  compute_cmd->add_option("--normalization", o.normalization, "none | by_member_total");
  compute_cmd->add_option("--survival-mode", o.survival_mode, "pre_merge | post_merge");
  compute_cmd->add_option("--bins", o.bins, "Survival quantization bins");
  compute_cmd->add_option("--thresholds", o.thresholds, "Comma-separated agreement thresholds");
  compute_cmd->add_flag("--no-render", o.no_render, "Skip PNG output");

  auto* render_cmd = app.add_subcommand("render", "Re-render PNGs from saved maps");
  dir_opt(render_cmd);
  render_cmd->add_option("--artifacts", o.artifacts, "Run directory (default DIR/artifacts)");
  render_cmd->add_option("--bins", o.bins, "Survival quantization bins");
  render_cmd->add_option("--thresholds", o.thresholds, "Comma-separated agreement thresholds");

  auto* query_cmd = app.add_subcommand("query", "Print the label distribution at a grid point");
  dir_opt(query_cmd);
  query_cmd->add_option("--artifacts", o.artifacts, "Run directory (default DIR/artifacts)");
  query_cmd->add_option("--r", o.row, "Row")->required();
  query_cmd->add_option("--c", o.col, "Column")->required();

  auto* serve_cmd = app.add_subcommand("serve", "Serve a run over HTTP");
  dir_opt(serve_cmd);
  serve_cmd->add_option("--artifacts", o.artifacts, "Run directory (default DIR/artifacts)");
  serve_cmd->add_option("--port", o.port, "Port (default MORSE_UNC_PORT or 8765)");
  serve_cmd->add_option("--host", o.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--static", o.static_dir, "Directory with the UI bundle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kConfig, e.what());
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*perturb_cmd) return cmd_perturb(o);
    if (*compute_cmd) return cmd_compute(o, *compute_cmd);
    if (*render_cmd) return cmd_render(o);
    if (*query_cmd) return cmd_query(o);
    if (*serve_cmd) return cmd_serve(o);
  } catch (const ArgumentError& e) {
    return fail(kConfig, e.what());
  } catch (const FormatError& e) {
    return fail(kData, e.what());
  } catch (const DataError& e) {
    return fail(kData, e.what());
  } catch (const std::exception& e) {
    return fail(kData, e.what());
  }
  return kOk;
}

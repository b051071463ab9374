#include "morseunc/service.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>

#include <httplib.h>
#include <json.hpp>

namespace morseunc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

HttpResponse json_response(int status, std::string body) { return {status, "application/json", std::move(body)}; }

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, json{{"error", message}}.dump());
}

HttpResponse png_response(std::string body) { return {200, "image/png", std::move(body)}; }

std::string as_string(const binary::Bytes& b) { return std::string(b.begin(), b.end()); }

const std::string& param(const QueryParams& params, const std::string& name) {
  const auto it = params.find(name);
  if (it == params.end()) throw ArgumentError("missing parameter \"" + name + "\"");
  return it->second;
}

std::size_t parse_index(const std::string& name, const std::string& text) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw ArgumentError("parameter \"" + name + "\" must be a non-negative integer");
  }
  return v;
}

double parse_real(const std::string& name, const std::string& text) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size() || !std::isfinite(v)) {
    throw ArgumentError("parameter \"" + name + "\" must be a number");
  }
  return v;
}

std::string content_type(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

}  // namespace

Service::Service(const std::string& artifact_dir, const std::string& static_dir)
    : dir_(artifact_dir), static_dir_(static_dir) {
  const fs::path base(artifact_dir);
  if (!fs::is_directory(base)) throw DataError("artifact directory " + artifact_dir + " does not exist");
  if (fs::exists(base / "pmap.pmp")) {
    pmap_ = load_probabilistic_map(binary::read_file((base / "pmap.pmp").string()));
    probabilistic_png_ = as_string(encode_png(blend(*pmap_, label_palette(pmap_->l))));
  }
  if (fs::exists(base / "survival.svm") && fs::exists(base / "survival.json")) {
    survival_ = load_survival_map(binary::read_file((base / "survival.svm").string()),
                                  binary::read_text((base / "survival.json").string()));
    survival_png_ = as_string(encode_png(heatmap(survival_->values, survival_->width, survival_->height)));
  }
  if (fs::exists(base / "boundaries.json")) boundaries_ = binary::read_text((base / "boundaries.json").string());
  if (pmap_) {
    std::vector<double> thresholds{0.95, 0.80, 0.60};
    if (fs::exists(base / "config.json")) thresholds = config_from_json(binary::read_text((base / "config.json").string())).thresholds;
    json labels = json::array();
    const auto palette = label_palette(pmap_->l);
    if (fs::exists(base / "labels.json")) {
      labels = json::parse(binary::read_text((base / "labels.json").string()));
    } else {
      for (std::uint32_t i = 0; i < pmap_->l; ++i) {
        const Rgb c = palette.colors[i];
        labels.push_back({{"label", i}, {"anchor", nullptr}, {"color", {c.r, c.g, c.b}}});
      }
    }
    json colors = json::array();
    for (std::uint32_t i = 0; i < pmap_->l; ++i) {
      const Rgb c = palette.colors[i];
      colors.push_back({c.r / 255.0, c.g / 255.0, c.b / 255.0});
    }
    meta_ = json{{"width", pmap_->width}, {"height", pmap_->height}, {"n", pmap_->n},       {"l", pmap_->l},
                 {"labels", labels},      {"palette", colors},      {"thresholds", thresholds}}
                .dump();
  }
}

const ProbabilisticMap& Service::pmap() const {
  if (!pmap_) throw NotFound("probabilistic map artifact not found");
  return *pmap_;
}

const SurvivalMap& Service::survival() const {
  if (!survival_) throw NotFound("survival map artifact not found");
  return *survival_;
}

HttpResponse Service::handle(const std::string& method, const std::string& path, const QueryParams& params) const {
  if (method != "GET" && method != "HEAD") return error_response(405, "method not allowed");
  try {
    return dispatch(path, params);
  } catch (const ArgumentError& e) {
    return error_response(400, e.what());
  } catch (const NotFound& e) {
    return error_response(404, e.what());
  } catch (const DataError& e) {
    return error_response(404, e.what());
  } catch (const FormatError& e) {
    return error_response(404, e.what());
  } catch (const json::exception& e) {
    return error_response(404, std::string("unreadable artifact: ") + e.what());
  }
}

HttpResponse Service::dispatch(const std::string& path, const QueryParams& params) const {
  if (path == "/api/meta") {
    pmap();
    return json_response(200, meta_);
  }
  if (path == "/api/query") {
    const auto r = parse_index("r", param(params, "r"));
    const auto c = parse_index("c", param(params, "c"));
    return json_response(200, query_json(pmap(), r, c));
  }
  if (path == "/api/cells") {
    const double a = parse_real("a", param(params, "a"));
    const auto it = params.find("format");
    const std::string format = it == params.end() ? "json" : it->second;
    if (format == "json") return json_response(200, cells_json(pmap(), a));
    if (format == "png") {
      const auto& p = pmap();
      return png_response(as_string(encode_png(categorical(agreement_cells(p, a), p.width, p.height, label_palette(p.l)))));
    }
    throw ArgumentError("format must be json or png");
  }
  if (path == "/api/survival") {
    const auto k = parse_index("bins", param(params, "bins"));
    if (k < 1 || k > 256) throw ArgumentError("bins must be in [1, 256]");
    const auto& s = survival();
    const auto q = quantize(s.values, static_cast<std::uint32_t>(k));
    const std::vector<std::int32_t> qi(q.begin(), q.end());
    return png_response(as_string(encode_png(categorical(qi, s.width, s.height, quantized_palette(std::uint32_t(k))))));
  }
  if (path == "/api/maps/probabilistic") {
    pmap();
    return png_response(probabilistic_png_);
  }
  if (path == "/api/maps/survival") {
    survival();
    return png_response(survival_png_);
  }
  if (path == "/api/boundaries") {
    const auto& kind = param(params, "kind");
    if (kind != "expected" && kind != "meanfield" && kind != "truth") {
      throw ArgumentError("kind must be expected, meanfield or truth");
    }
    if (boundaries_.empty()) throw NotFound("boundaries artifact not found");
    const auto doc = json::parse(boundaries_);
    if (!doc.contains(kind)) throw NotFound("no " + kind + " boundary in this run");
    return json_response(200, doc[kind].dump());
  }
  if (path.rfind("/api/", 0) == 0) throw NotFound("unknown endpoint " + path);
  return static_file(path);
}

HttpResponse Service::static_file(const std::string& path) const {
  if (static_dir_.empty()) throw NotFound("no static files are served");
  fs::path rel = fs::path(path == "/" ? "/index.html" : path).relative_path();
  for (const auto& part : rel) {
    if (part == "..") throw ArgumentError("path escapes the static root");
  }
  const fs::path file = fs::path(static_dir_) / rel;
  if (!fs::is_regular_file(file)) throw NotFound("no such file " + path);
  return {200, content_type(file), binary::read_text(file.string())};
}

int default_port() {
  const char* env = std::getenv("MORSE_UNC_PORT");
  if (!env || !*env) return 8765;
  const std::string text(env);
  const auto port = parse_index("MORSE_UNC_PORT", text);
  if (port < 1 || port > 65535) throw ArgumentError("MORSE_UNC_PORT must be in [1, 65535]");
  return static_cast<int>(port);
}

void serve(const Service& service, const std::string& host, int port) {
  httplib::Server server;
  server.Get(".*", [&](const httplib::Request& req, httplib::Response& res) {
    QueryParams params(req.params.begin(), req.params.end());
    const auto out = service.handle("GET", req.path, params);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  });
  if (!server.listen(host, port)) throw DataError("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace morseunc

#include <doctest.h>

#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "morseunc/service.hpp"

using namespace morseunc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& run_dir() {
  static const fs::path dir = [] {
    const auto p = fs::temp_directory_path() / ("morseunc_service_" + std::to_string(::getpid()));
    fs::remove_all(p);
    PipelineConfig c;
    c.generator = GeneratorSpec{"four_gaussians", 40, 32};
    c.noise_scale = 0.8;
    c.n = 10;
    c.seed = 2;
    c.output = (p / "run").string();
    compute(c);
    fs::create_directories(p / "ui");
    binary::write_text((p / "ui" / "index.html").string(), "<html></html>");
    return p;
  }();
  return dir;
}

const Service& service() {
  static const Service s((run_dir() / "run").string(), (run_dir() / "ui").string());
  return s;
}

HttpResponse get(const std::string& path, const QueryParams& params = {}) { return service().handle("GET", path, params); }

}  // namespace

TEST_CASE("meta") {
  const auto r = get("/api/meta");
  REQUIRE(r.status == 200);
  const auto m = json::parse(r.body);
  CHECK(m["width"] == 40);
  CHECK(m["height"] == 32);
  CHECK(m["n"] == 10);
  CHECK(m["labels"].size() == m["l"].get<std::size_t>());
  CHECK(m["palette"].size() == m["l"].get<std::size_t>());
  CHECK(m["thresholds"] == json::array({0.95, 0.8, 0.6}));
}

TEST_CASE("query matches the shared JSON and rejects bad input") {
  const auto p = load_probabilistic_map(binary::read_file((run_dir() / "run" / "pmap.pmp").string()));
  for (std::size_t r : {0, 7, 31})
    for (std::size_t c : {0, 13, 39}) {
      const auto res = get("/api/query", {{"r", std::to_string(r)}, {"c", std::to_string(c)}});
      CHECK(res.status == 200);
      CHECK(res.body == query_json(p, r, c));
    }
  CHECK(get("/api/query", {{"r", "32"}, {"c", "0"}}).status == 400);
  CHECK(get("/api/query", {{"r", "-1"}, {"c", "0"}}).status == 400);
  CHECK(get("/api/query", {{"r", "1x"}, {"c", "0"}}).status == 400);
  CHECK(get("/api/query", {{"r", ""}, {"c", "0"}}).status == 400);
  CHECK(get("/api/query", {{"r", "99999999999999999999999"}, {"c", "0"}}).status == 400);
  CHECK(get("/api/query", {{"c", "0"}}).status == 400);
}

TEST_CASE("cells sweep never shrinks") {
  std::size_t prev = 0;
  for (const char* a : {"1", "0.95", "0.8", "0.6", "0.51"}) {
    const auto r = get("/api/cells", {{"a", a}});
    REQUIRE(r.status == 200);
    const auto assigned = json::parse(r.body)["assigned"].get<std::size_t>();
    CHECK(assigned >= prev);
    prev = assigned;
  }
  const auto png = get("/api/cells", {{"a", "0.8"}, {"format", "png"}});
  CHECK(png.status == 200);
  CHECK(png.content_type == "image/png");
  CHECK(decode_png(std::vector<std::uint8_t>(png.body.begin(), png.body.end())).width == 40);
  for (const char* a : {"0.5", "0.2", "1.5", "nan", "inf", "abc"}) CHECK(get("/api/cells", {{"a", a}}).status == 400);
  CHECK(get("/api/cells", {{"a", "0.9"}, {"format", "gif"}}).status == 400);
}

TEST_CASE("survival and map images") {
  const auto q = get("/api/survival", {{"bins", "9"}});
  CHECK(q.status == 200);
  CHECK(q.content_type == "image/png");
  for (const char* bins : {"0", "257", "x", "3.5"}) CHECK(get("/api/survival", {{"bins", bins}}).status == 400);
  const auto pm = get("/api/maps/probabilistic");
  CHECK(pm.status == 200);
  CHECK(pm.body == binary::read_text((run_dir() / "run" / "probabilistic.png").string()));
  const auto sm = get("/api/maps/survival");
  CHECK(sm.body == binary::read_text((run_dir() / "run" / "survival.png").string()));
}

TEST_CASE("boundaries") {
  for (const char* kind : {"expected", "meanfield", "truth"}) {
    const auto r = get("/api/boundaries", {{"kind", kind}});
    CHECK(r.status == 200);
    CHECK(json::parse(r.body).is_array());
  }
  CHECK(get("/api/boundaries", {{"kind", "median"}}).status == 400);
  CHECK(get("/api/boundaries").status == 400);
}

TEST_CASE("missing artifacts, unknown routes, static files") {
  const auto empty = run_dir() / "empty";
  fs::create_directories(empty);
  const Service bare(empty.string());
  for (const char* path : {"/api/meta", "/api/maps/probabilistic", "/api/maps/survival", "/api/boundaries"}) {
    CHECK(bare.handle("GET", path, {{"kind", "truth"}}).status == 404);
  }
  CHECK(bare.handle("GET", "/api/query", {{"r", "0"}, {"c", "0"}}).status == 404);
  CHECK(bare.handle("GET", "/", {}).status == 404);
  CHECK(get("/api/nothing").status == 404);
  CHECK(get("/").status == 200);
  CHECK(get("/").content_type == "text/html");
  CHECK(get("/missing.js").status == 404);
  CHECK(get("/../run/pmap.pmp").status == 400);
  CHECK(service().handle("POST", "/api/meta", {}).status == 405);
  CHECK_THROWS_AS(Service((run_dir() / "absent").string()), DataError);
}

TEST_CASE("port from the environment") {
  ::unsetenv("MORSE_UNC_PORT");
  CHECK(default_port() == 8765);
  ::setenv("MORSE_UNC_PORT", "9123", 1);
  CHECK(default_port() == 9123);
  ::setenv("MORSE_UNC_PORT", "99999", 1);
  CHECK_THROWS_AS(default_port(), ArgumentError);
  ::unsetenv("MORSE_UNC_PORT");
}

TEST_CASE("HTTP round trip") {
  httplib::Server server;
  server.Get(".*", [](const httplib::Request& req, httplib::Response& res) {
    const auto out = service().handle("GET", req.path, QueryParams(req.params.begin(), req.params.end()));
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  const auto q = client.Get("/api/query?r=3&c=4");
  REQUIRE(q);
  CHECK(q->status == 200);
  CHECK(q->body == get("/api/query", {{"r", "3"}, {"c", "4"}}).body);
  const auto bad = client.Get("/api/query?r=3&c=400");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  const auto cells = client.Get("/api/cells?a=0.8");
  REQUIRE(cells);
  CHECK(cells->status == 200);
  server.stop();
  t.join();
}

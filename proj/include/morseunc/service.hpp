#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morseunc/pipeline.hpp"

namespace morseunc {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

using QueryParams = std::multimap<std::string, std::string>;

/// Read-only view over a run directory. Artifacts are loaded once; requests never mutate state.
class Service {
 public:
  explicit Service(const std::string& artifact_dir, const std::string& static_dir = "");

  HttpResponse handle(const std::string& method, const std::string& path, const QueryParams& params) const;

 private:
  HttpResponse dispatch(const std::string& path, const QueryParams& params) const;
  HttpResponse static_file(const std::string& path) const;
  const ProbabilisticMap& pmap() const;
  const SurvivalMap& survival() const;

  std::string dir_;
  std::string static_dir_;
  std::optional<ProbabilisticMap> pmap_;
  std::optional<SurvivalMap> survival_;
  std::string meta_;
  std::string boundaries_;
  std::string probabilistic_png_;
  std::string survival_png_;
};

/// MORSE_UNC_PORT, or 8765.
int default_port();

/// Blocks serving `service` over HTTP.
void serve(const Service& service, const std::string& host, int port);

}  // namespace morseunc

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bd/config.hpp"
#include "bd/curation.hpp"
#include "bd/generation_cache.hpp"
#include "bd/index.hpp"
#include "bd/rag.hpp"
#include "bd/scatter.hpp"

namespace bd {

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

using Params = std::multimap<std::string, std::string>;

// Request handling for the HTTP API, independent of any socket. The index,
// curated list and configuration are read-only after construction.
class Service {
 public:
  Service(AppConfig config, InvertedIndex index, std::vector<CuratedTerm> curated,
          GenerationCache& cache, LlmBackend& backend, PromptTemplates templates);

  Response Handle(const std::string& path, const Params& params);

  const AppConfig& config() const { return config_; }
  const InvertedIndex& index() const { return index_; }

 private:
  Response Health() const;
  Response Stats(const Params& params) const;
  Response Single(GenerationKind kind, const Params& params);
  Response Alternatives(const Params& params);
  Response Scatter(const Params& params) const;
  Response Samples(const Params& params) const;
  Response Curated() const;
  Response Edition();

  nlohmann::json Names() const;
  GenerationRequest Request(GenerationKind kind, const std::string& term,
                            std::vector<SampleSet> samples, uint64_t seed) const;

  AppConfig config_;
  InvertedIndex index_;
  std::vector<CuratedTerm> curated_;
  GenerationCache& cache_;
  BoundedBackend backend_;
  GenerationSettings generation_;
  HashedTfidfEmbedder embedder_;

  std::mutex edition_mu_;
  std::optional<std::string> edition_html_;
};

// Snapshot at config.paths.index; the curated file when present, otherwise
// curation computed from the snapshot.
std::vector<CuratedTerm> CuratedForService(const AppConfig& config, const InvertedIndex& index);

// Binds, serves until SIGINT or SIGTERM, then drains in-flight requests.
// Throws kBindFailure when the address cannot be bound.
void RunServer(Service& service);

}  // namespace bd

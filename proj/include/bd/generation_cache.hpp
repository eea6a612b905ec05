#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "bd/rag.hpp"

struct sqlite3;

namespace bd {

// Persistent generation store backed by SQLite. Safe for concurrent use;
// concurrent misses on the same key share one computation.
class GenerationCache {
 public:
  // ":memory:" opens a private in-memory store. A file that is not a valid
  // database is moved aside to "<path>.corrupt" and replaced.
  explicit GenerationCache(const std::filesystem::path& path);
  ~GenerationCache();
  GenerationCache(const GenerationCache&) = delete;
  GenerationCache& operator=(const GenerationCache&) = delete;

  // Unreadable entries are deleted and reported as misses.
  std::optional<GenerationResult> Get(const std::string& key);
  void Put(const std::string& key, const GenerationResult& result);
  std::size_t size();
  std::size_t dropped_entries() const { return dropped_; }

  GenerationResult GetOrCompute(const std::string& key,
                                const std::function<GenerationResult()>& compute);

 private:
  void OpenDatabase(const std::filesystem::path& path);
  std::optional<GenerationResult> GetLocked(const std::string& key);

  std::mutex db_mu_;
  sqlite3* db_ = nullptr;
  std::size_t dropped_ = 0;

  std::mutex inflight_mu_;
  std::unordered_map<std::string, std::shared_future<GenerationResult>> inflight_;
};

// Digest of everything that determines a generation: kind, term, community
// positions with their sorted document ids, model, seed and template version.
std::string CacheKey(const GenerationRequest& request, int template_version);

GenerationResult CachedGenerate(GenerationCache& cache, LlmBackend& backend,
                                const GenerationRequest& request,
                                const GenerationSettings& settings);

}  // namespace bd

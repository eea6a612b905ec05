#include "bd/generation_cache.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <system_error>

#include <spdlog/spdlog.h>

#include "bd/error.hpp"
#include "bd/text.hpp"

namespace bd {
namespace {

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw Error(ErrorKind::kCorruptArtifact,
                  std::string("generation cache: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  void Bind(int i, const std::string& s) {
    sqlite3_bind_text(stmt_, i, s.data(), static_cast<int>(s.size()), SQLITE_TRANSIENT);
  }
  int Step() { return sqlite3_step(stmt_); }
  std::string Column(int i) {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, i));
    return p == nullptr ? std::string() : std::string(p, sqlite3_column_bytes(stmt_, i));
  }
  sqlite3_int64 Int(int i) { return sqlite3_column_int64(stmt_, i); }

 private:
  sqlite3_stmt* stmt_ = nullptr;
};

constexpr const char* kSchema =
    "CREATE TABLE IF NOT EXISTS generations ("
    " key TEXT PRIMARY KEY,"
    " body TEXT NOT NULL,"
    " checksum TEXT NOT NULL)";

}  // namespace

GenerationCache::GenerationCache(const std::filesystem::path& path) {
  try {
    OpenDatabase(path);
  } catch (const Error& e) {
    if (path == ":memory:") throw;
    spdlog::warn("generation cache {} unusable ({}); starting a fresh one", path.string(),
                 e.what());
    if (db_ != nullptr) sqlite3_close(db_);
    db_ = nullptr;
    auto aside = path;
    aside += ".corrupt";
    std::error_code ec;
    std::filesystem::rename(path, aside, ec);
    OpenDatabase(path);
  }
}

GenerationCache::~GenerationCache() {
  if (db_ != nullptr) sqlite3_close(db_);
}

void GenerationCache::OpenDatabase(const std::filesystem::path& path) {
  if (path != ":memory:" && path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.string().c_str(), &db_, flags, nullptr) != SQLITE_OK) {
    throw Error(ErrorKind::kCorruptArtifact,
                "cannot open generation cache: " + std::string(sqlite3_errmsg(db_)));
  }
  sqlite3_busy_timeout(db_, 5000);
  char* err = nullptr;
  if (sqlite3_exec(db_, kSchema, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err != nullptr ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorKind::kCorruptArtifact, "generation cache schema: " + msg);
  }
  sqlite3_exec(db_, "PRAGMA journal_mode=WAL", nullptr, nullptr, nullptr);
}

std::optional<GenerationResult> GenerationCache::Get(const std::string& key) {
  std::lock_guard lock(db_mu_);
  return GetLocked(key);
}

std::optional<GenerationResult> GenerationCache::GetLocked(const std::string& key) {
  std::string body;
  std::string checksum;
  {
    Statement select(db_, "SELECT body, checksum FROM generations WHERE key = ?1");
    select.Bind(1, key);
    if (select.Step() != SQLITE_ROW) return std::nullopt;
    body = select.Column(0);
    checksum = select.Column(1);
  }
  if (text::Sha256Hex(body) == checksum) {
    try {
      return GenerationResultFromJson(nlohmann::json::parse(body));
    } catch (const std::exception&) {
      // fall through to drop
    }
  }
  spdlog::warn("generation cache entry {} is corrupt; dropping it", key.substr(0, 16));
  Statement del(db_, "DELETE FROM generations WHERE key = ?1");
  del.Bind(1, key);
  del.Step();
  ++dropped_;
  return std::nullopt;
}

void GenerationCache::Put(const std::string& key, const GenerationResult& result) {
  const std::string body = ToJson(result).dump();
  std::lock_guard lock(db_mu_);
  Statement insert(db_,
                   "INSERT OR REPLACE INTO generations (key, body, checksum) VALUES (?1, ?2, ?3)");
  insert.Bind(1, key);
  insert.Bind(2, body);
  insert.Bind(3, text::Sha256Hex(body));
  if (insert.Step() != SQLITE_DONE) {
    spdlog::warn("generation cache write failed: {}", sqlite3_errmsg(db_));
  }
}

std::size_t GenerationCache::size() {
  std::lock_guard lock(db_mu_);
  Statement count(db_, "SELECT COUNT(*) FROM generations");
  return count.Step() == SQLITE_ROW ? static_cast<std::size_t>(count.Int(0)) : 0;
}

GenerationResult GenerationCache::GetOrCompute(const std::string& key,
                                               const std::function<GenerationResult()>& compute) {
  std::promise<GenerationResult> promise;
  {
    std::unique_lock lock(inflight_mu_);
    if (auto it = inflight_.find(key); it != inflight_.end()) {
      auto shared = it->second;
      lock.unlock();
      return shared.get();
    }
    if (auto hit = Get(key)) return *hit;
    inflight_.emplace(key, promise.get_future().share());
  }

  auto finish = [&] {
    std::lock_guard lock(inflight_mu_);
    inflight_.erase(key);
  };
  try {
    GenerationResult result = compute();
    Put(key, result);
    promise.set_value(result);
    finish();
    return result;
  } catch (...) {
    promise.set_exception(std::current_exception());
    finish();
    throw;
  }
}

std::string CacheKey(const GenerationRequest& request, int template_version) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& s : request.samples) {
    auto ids = s.doc_ids;
    std::sort(ids.begin(), ids.end());
    groups.push_back({{"position", Slot(s.community)}, {"doc_ids", ids}});
  }
  const nlohmann::json material = {
      {"kind", KindName(request.kind)}, {"term", request.term},
      {"groups", groups},               {"model_id", request.model_id},
      {"seed", request.seed},           {"template_version", template_version},
  };
  return text::Sha256Hex(material.dump());
}

GenerationResult CachedGenerate(GenerationCache& cache, LlmBackend& backend,
                                const GenerationRequest& request,
                                const GenerationSettings& settings) {
  for (const auto& s : request.samples) {
    if (s.doc_ids.empty()) {
      throw Error(ErrorKind::kInsufficientData, "insufficient data for generation");
    }
  }
  return cache.GetOrCompute(CacheKey(request, settings.templates.version),
                            [&] { return Generate(backend, request, settings); });
}

}  // namespace bd

#include "bd/service.hpp"

#include <pthread.h>
#include <signal.h>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <thread>

#include <spdlog/spdlog.h>

#include "bd/edition.hpp"
#include "bd/error.hpp"
#include "bd/text.hpp"
#include "httplib.h"

namespace bd {
namespace {

using nlohmann::json;

// Errors that carry their HTTP status and machine-readable code.
struct ApiError {
  int status;
  std::string code;
  std::string message;
};

Response JsonResponse(int status, const json& body) {
  return {status, "application/json", body.dump()};
}

Response ErrorResponse(const ApiError& e) {
  return JsonResponse(e.status, {{"error", e.message}, {"code", e.code}});
}

ApiError FromError(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kInsufficientData: return {422, "insufficient_data", e.what()};
    case ErrorKind::kGenerationFailure: return {502, "generation_failed", e.what()};
    case ErrorKind::kInvalidArgument: return {400, "bad_request", e.what()};
    default: return {500, "internal", e.what()};
  }
}

std::optional<std::string> Param(const Params& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

json Optional(const std::optional<double>& v, int decimals) {
  return v ? json(text::RoundTo(*v, decimals)) : json(nullptr);
}

}  // namespace

Service::Service(AppConfig config, InvertedIndex index, std::vector<CuratedTerm> curated,
                 GenerationCache& cache, LlmBackend& backend, PromptTemplates templates)
    : config_(std::move(config)),
      index_(std::move(index)),
      curated_(std::move(curated)),
      cache_(cache),
      backend_(backend, config_.rag.parallelism),
      generation_(config_.Generation(templates, index_.corpus().labels())),
      embedder_(config_.scatter.dim) {}

json Service::Names() const {
  return {{"1", config_.names[0]}, {"2", config_.names[1]}};
}

Response Service::Handle(const std::string& path, const Params& params) {
  try {
    if (path == "/api/health") return Health();
    if (path == "/api/stats") return Stats(params);
    if (path == "/api/summary") return Single(GenerationKind::kSummary, params);
    if (path == "/api/definition") return Single(GenerationKind::kDefinition, params);
    if (path == "/api/alternatives") return Alternatives(params);
    if (path == "/api/scatter") return Scatter(params);
    if (path == "/api/samples") return Samples(params);
    if (path == "/api/curated") return Curated();
    if (path == "/api/paper-edition") return Edition();
    return ErrorResponse({404, "not_found", "no such endpoint: " + path});
  } catch (const ApiError& e) {
    return ErrorResponse(e);
  } catch (const Error& e) {
    return ErrorResponse(FromError(e));
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", path, e.what());
    return ErrorResponse({500, "internal", e.what()});
  }
}

namespace {

std::string RequireTerm(const Params& params) {
  auto term = Param(params, "term");
  if (!term || Analyze(*term).empty()) throw ApiError{400, "empty_query", "empty query"};
  return *term;
}

Community RequireCommunity(const Params& params) {
  auto raw = Param(params, "community");
  if (!raw) throw ApiError{400, "bad_community", "community must be 1 or 2"};
  int slot = 0;
  auto [p, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), slot);
  auto c = ec == std::errc() && p == raw->data() + raw->size() ? CommunityFromSlot(slot)
                                                               : std::nullopt;
  if (!c) throw ApiError{400, "bad_community", "community must be 1 or 2"};
  return *c;
}

uint64_t SeedOf(const Params& params, uint64_t fallback) {
  auto raw = Param(params, "seed");
  if (!raw) return fallback;
  uint64_t seed = 0;
  auto [p, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), seed);
  if (raw->empty() || ec != std::errc() || p != raw->data() + raw->size()) {
    throw ApiError{400, "bad_seed", "seed must be a nonnegative integer"};
  }
  return seed;
}

std::string Surface(const std::string& term) {
  const auto tokens = Analyze(term);
  return JoinTokens(tokens, 0, tokens.size());
}

}  // namespace

Response Service::Health() const {
  const auto& counts = index_.totals();
  return JsonResponse(200, {{"status", "ok"},
                            {"docs", {{"1", counts[0]}, {"2", counts[1]}}},
                            {"terms", index_.terms().size()},
                            {"names", Names()}});
}

Response Service::Stats(const Params& params) const {
  const auto stats = ComputeTermStats(index_, RequireTerm(params));
  const auto view = Compare(stats);
  json communities = json::array();
  for (auto c : kCommunities) {
    const auto i = Index(c);
    communities.push_back({
        {"slot", Slot(c)},
        {"name", config_.names[i]},
        {"docs", index_.totals()[i]},
        {"doc_count", stats.doc_count[i]},
        {"rate_per_k", text::RoundTo(stats.rate_per_k[i], 1)},
        {"share", stats.share ? json(text::RoundTo((*stats.share)[i], 3)) : json(nullptr)},
        {"sentiment_mean", Optional(stats.sentiment_mean[i], 2)},
    });
  }
  return JsonResponse(200, {{"term", stats.term},
                            {"communities", communities},
                            {"comparative",
                             {{"higher_rate", LeaderName(view.higher_rate)},
                              {"higher_sentiment", LeaderName(view.higher_sentiment)},
                              {"rate_delta", text::RoundTo(view.rate_delta, 1)},
                              {"sentiment_delta", Optional(view.sentiment_delta, 2)}}}});
}

GenerationRequest Service::Request(GenerationKind kind, const std::string& term,
                                   std::vector<SampleSet> samples, uint64_t seed) const {
  if (MentionsAny(term, generation_.prompt.blocked)) {
    throw ApiError{422, "term_names_community",
                   "the term names a community; generation prompts must stay blind"};
  }
  GenerationRequest r;
  r.kind = kind;
  r.term = term;
  r.samples = std::move(samples);
  r.model_id = config_.rag.model_id;
  r.seed = seed;
  return r;
}

Response Service::Single(GenerationKind kind, const Params& params) {
  const std::string term = Surface(RequireTerm(params));
  const Community c = RequireCommunity(params);
  const uint64_t seed = SeedOf(params, config_.rag.seed);
  auto set = SampleMatches(index_, term, c, config_.rag.cap, seed);
  const auto result =
      CachedGenerate(cache_, backend_, Request(kind, term, {std::move(set)}, seed), generation_);
  return JsonResponse(200, {{"term", term},
                            {"kind", KindName(kind)},
                            {"community", Slot(c)},
                            {"seed", seed},
                            {"model_id", result.request.model_id},
                            {"backend", result.backend_id},
                            {"template_version", generation_.templates.version},
                            {"output", result.output},
                            {"truncated", result.truncated},
                            {"provenance", result.provenance},
                            {"prompt", result.prompt}});
}

Response Service::Alternatives(const Params& params) {
  const std::string term = Surface(RequireTerm(params));
  const uint64_t seed = SeedOf(params, config_.rag.seed);
  std::vector<SampleSet> sets;
  for (auto c : kCommunities) sets.push_back(SampleMatches(index_, term, c, config_.rag.cap, seed));
  json provenance = {{"1", sets[0].doc_ids}, {"2", sets[1].doc_ids}};
  const auto result = CachedGenerate(
      cache_, backend_, Request(GenerationKind::kAlternatives, term, std::move(sets), seed),
      generation_);
  return JsonResponse(200, {{"term", term},
                            {"kind", "alternatives"},
                            {"seed", seed},
                            {"model_id", result.request.model_id},
                            {"backend", result.backend_id},
                            {"template_version", generation_.templates.version},
                            {"output", result.output},
                            {"alternatives", ParseAlternatives(result.output)},
                            {"truncated", result.truncated},
                            {"provenance", provenance},
                            {"prompt", result.prompt}});
}

Response Service::Scatter(const Params& params) const {
  const std::string term = Surface(RequireTerm(params));
  const uint64_t seed = SeedOf(params, config_.rag.seed);
  const auto payload =
      BuildScatter(index_, term, seed, config_.rag.cap, config_.scatter.cluster, embedder_);
  json body = ToJson(payload);
  body["term"] = term;
  body["names"] = Names();
  return JsonResponse(200, body);
}

Response Service::Samples(const Params& params) const {
  const std::string term = Surface(RequireTerm(params));
  const Community c = RequireCommunity(params);
  const uint64_t seed = SeedOf(params, config_.rag.seed);
  const auto set = SampleMatches(index_, term, c, config_.rag.cap, seed);
  const auto all = index_.Match(SplitSurface(term));
  return JsonResponse(200, {{"term", term},
                            {"community", Slot(c)},
                            {"name", config_.names[Index(c)]},
                            {"seed", seed},
                            {"cap", config_.rag.cap},
                            {"match_count", all[Index(c)].size()},
                            {"doc_ids", set.doc_ids},
                            {"texts", set.texts}});
}

Response Service::Curated() const {
  json terms = json::array();
  for (const auto& t : curated_) terms.push_back(ToJson(t));
  return JsonResponse(200, {{"count", curated_.size()}, {"names", Names()}, {"terms", terms}});
}

Response Service::Edition() {
  std::lock_guard lock(edition_mu_);
  if (!edition_html_) {
    if (curated_.empty()) throw ApiError{404, "not_found", "no curated terms"};
    const auto settings =
        config_.Edition(generation_.templates, index_.corpus().labels());
    const auto edition = Assemble(curated_, index_, cache_, backend_, settings);
    edition_html_ = Render(edition, EditionFormat::kHtml);
  }
  return {200, "text/html; charset=utf-8", *edition_html_};
}

std::vector<CuratedTerm> CuratedForService(const AppConfig& config, const InvertedIndex& index) {
  if (std::filesystem::exists(config.paths.curated)) {
    return ReadCuratedTermsFile(config.paths.curated);
  }
  spdlog::info("{} not found; curating from the snapshot", config.paths.curated.string());
  return Curate(index, config.curation);
}

void RunServer(Service& service) {
  const auto& cfg = service.config().server;

  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  httplib::Server server;
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  server.set_default_headers({{"Access-Control-Allow-Origin", cfg.cors_origin}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  server.Get(R"(/api/.*)", [&service](const httplib::Request& req, httplib::Response& res) {
    Params params(req.params.begin(), req.params.end());
    const auto r = service.Handle(req.path, params);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  });
  if (!cfg.static_dir.empty() && !server.set_mount_point("/", cfg.static_dir.string())) {
    throw Error(ErrorKind::kMissingInput, "static directory not found: " + cfg.static_dir.string());
  }
  server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info("{} {} {} {}B", req.method, req.target, res.status, res.body.size());
  });

  int port = cfg.port;
  if (port == 0) {
    port = server.bind_to_any_port(cfg.bind);
    if (port < 0) throw Error(ErrorKind::kBindFailure, "cannot bind " + cfg.bind);
  } else if (!server.bind_to_port(cfg.bind, port)) {
    throw Error(ErrorKind::kBindFailure,
                "cannot bind " + cfg.bind + ":" + std::to_string(port) + " (address in use?)");
  }
  std::printf("listening on http://%s:%d\n", cfg.bind.c_str(), port);
  std::fflush(stdout);

  std::thread listener([&server] { server.listen_after_bind(); });
  int sig = 0;
  sigwait(&stop_signals, &sig);
  spdlog::info("signal {} received; draining", sig);
  server.stop();
  listener.join();
}

}  // namespace bd

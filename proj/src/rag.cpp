#include "bd/rag.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "bd/error.hpp"
#include "bd/text.hpp"
#include "httplib.h"

namespace bd {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Unbiased draw in [0, n) from raw 64-bit engine output. std::mt19937_64 is
// fully specified, so this is reproducible across standard libraries.
uint64_t Below(std::mt19937_64& rng, uint64_t n) {
  const uint64_t threshold = (0 - n) % n;
  for (;;) {
    const uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

bool IsRedactWordByte(char c) {
  const auto b = static_cast<unsigned char>(c);
  return b >= 0x80 || std::isalnum(b) || c == '_' || c == '\'' || c == '-';
}

std::string SingleLine(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool space = false;
  for (char c : s) {
    if (c == '\n' || c == '\r' || c == '\t' || c == ' ') {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

std::string Render(const std::string& body, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size();) {
    if (body[i] == '{') {
      const auto close = body.find('}', i);
      if (close != std::string::npos) {
        auto it = values.find(body.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(body[i]);
    ++i;
  }
  return out;
}

std::string NumberedList(const std::vector<std::string>& lines, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) out.push_back('\n');
    out += std::to_string(i + 1) + ". " + lines[i];
  }
  return out;
}

constexpr std::string_view kPlaceholders[] = {"term", "samples", "group1", "group2"};

}  // namespace

SampleSet SampleMatches(const InvertedIndex& index, std::string_view term, Community community,
                        std::size_t cap, uint64_t seed) {
  if (cap < 1) throw Error(ErrorKind::kInvalidArgument, "sample cap must be >= 1");
  const auto tokens = Analyze(term);
  SampleSet set;
  set.term = JoinTokens(tokens, 0, tokens.size());
  set.community = community;
  set.seed = seed;
  set.cap = cap;
  if (tokens.empty()) return set;

  PostingList pool = index.Match(tokens)[Index(community)];
  const std::size_t take = std::min(cap, pool.size());
  const uint64_t mixed = SplitMix64(SplitMix64(seed) ^ text::Fnv1a64(set.term));
  std::mt19937_64 rng(SplitMix64(mixed ^ static_cast<uint64_t>(Slot(community))));
  // Partial Fisher-Yates: the first `take` slots become the sample.
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + Below(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);

  const auto& corpus = index.corpus();
  std::sort(pool.begin(), pool.end(), [&](DocOrdinal a, DocOrdinal b) {
    return corpus.doc(a).id < corpus.doc(b).id;
  });
  for (DocOrdinal d : pool) {
    set.doc_ids.push_back(corpus.doc(d).id);
    set.texts.push_back(corpus.doc(d).text);
  }
  return set;
}

std::string KindName(GenerationKind kind) {
  switch (kind) {
    case GenerationKind::kSummary: return "summary";
    case GenerationKind::kDefinition: return "definition";
    case GenerationKind::kAlternatives: return "alternatives";
  }
  return "summary";
}

GenerationKind KindFromName(std::string_view name) {
  if (name == "summary") return GenerationKind::kSummary;
  if (name == "definition") return GenerationKind::kDefinition;
  if (name == "alternatives") return GenerationKind::kAlternatives;
  throw Error(ErrorKind::kInvalidArgument, "unknown generation kind '" + std::string(name) + "'");
}

nlohmann::json ToJson(const GenerationResult& r) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : r.request.samples) {
    samples.push_back({{"community", Slot(s.community)},
                       {"seed", s.seed},
                       {"cap", s.cap},
                       {"doc_ids", s.doc_ids}});
  }
  return {
      {"kind", KindName(r.request.kind)},
      {"term", r.request.term},
      {"model_id", r.request.model_id},
      {"seed", r.request.seed},
      {"samples", samples},
      {"prompt", r.prompt},
      {"output", r.output},
      {"provenance", r.provenance},
      {"backend_id", r.backend_id},
      {"created_at", r.created_at},
      {"attempts", r.attempts},
      {"truncated", r.truncated},
  };
}

GenerationResult GenerationResultFromJson(const nlohmann::json& j) {
  GenerationResult r;
  r.request.kind = KindFromName(j.at("kind").get<std::string>());
  r.request.term = j.at("term").get<std::string>();
  r.request.model_id = j.at("model_id").get<std::string>();
  r.request.seed = j.at("seed").get<uint64_t>();
  for (const auto& s : j.at("samples")) {
    SampleSet set;
    set.term = r.request.term;
    auto community = CommunityFromSlot(s.at("community").get<int>());
    if (!community) throw Error(ErrorKind::kCorruptArtifact, "bad community slot");
    set.community = *community;
    set.seed = s.at("seed").get<uint64_t>();
    set.cap = s.at("cap").get<std::size_t>();
    set.doc_ids = s.at("doc_ids").get<std::vector<std::string>>();
    r.request.samples.push_back(std::move(set));
  }
  r.prompt = j.at("prompt").get<std::string>();
  r.output = j.at("output").get<std::string>();
  r.provenance = j.at("provenance").get<std::vector<std::string>>();
  r.backend_id = j.at("backend_id").get<std::string>();
  r.created_at = j.at("created_at").get<std::string>();
  r.attempts = j.at("attempts").get<int>();
  r.truncated = j.at("truncated").get<bool>();
  return r;
}

PromptTemplates PromptTemplates::Parse(std::istream& in) {
  PromptTemplates t;
  std::array<bool, 3> seen{};
  int current = -1;
  bool header = false;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::kInvalidArgument,
                "templates line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header) {
      if (line.empty()) continue;
      constexpr std::string_view kHeader = "bd-templates v";
      if (!line.starts_with(kHeader)) fail("expected 'bd-templates v<N>' header");
      try {
        t.version = std::stoi(line.substr(kHeader.size()));
      } catch (const std::exception&) {
        fail("bad template version");
      }
      header = true;
      continue;
    }
    if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
      const auto kind = KindFromName(std::string_view(line).substr(1, line.size() - 2));
      current = static_cast<int>(kind);
      if (seen[current]) fail("duplicate section " + line);
      seen[current] = true;
      continue;
    }
    if (current < 0) {
      if (line.empty()) continue;
      fail("text outside of a section");
    }
    auto& body = t.bodies[current];
    if (!body.empty()) body.push_back('\n');
    body += line;
  }
  if (!header) throw Error(ErrorKind::kInvalidArgument, "templates: missing header");
  for (std::size_t k = 0; k < 3; ++k) {
    const auto name = KindName(static_cast<GenerationKind>(k));
    if (!seen[k]) throw Error(ErrorKind::kInvalidArgument, "templates: missing [" + name + "]");
    auto& body = t.bodies[k];
    while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();
    // Only the four placeholders may appear in braces.
    for (std::size_t i = body.find('{'); i != std::string::npos; i = body.find('{', i + 1)) {
      const auto close = body.find('}', i);
      if (close == std::string::npos) break;
      const auto name_in = std::string_view(body).substr(i + 1, close - i - 1);
      const bool ident = !name_in.empty() && std::all_of(name_in.begin(), name_in.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
      });
      if (ident && std::find(std::begin(kPlaceholders), std::end(kPlaceholders), name_in) ==
                       std::end(kPlaceholders)) {
        throw Error(ErrorKind::kInvalidArgument, "templates: unknown placeholder {" +
                                                     std::string(name_in) + "} in [" + name + "]");
      }
    }
    const bool pair = static_cast<GenerationKind>(k) == GenerationKind::kAlternatives;
    const bool ok = pair ? body.find("{group1}") != std::string::npos &&
                               body.find("{group2}") != std::string::npos
                         : body.find("{samples}") != std::string::npos;
    if (!ok) {
      throw Error(ErrorKind::kInvalidArgument,
                  "templates: [" + name + "] lacks its sample placeholder");
    }
  }
  return t;
}

PromptTemplates PromptTemplates::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingInput, "cannot open templates file: " + path.string());
  return Parse(in);
}

bool MentionsAny(std::string_view text, const std::vector<std::string>& blocked) {
  const std::string folded = text::CaseFold(text);
  for (const auto& id : blocked) {
    if (id.empty()) continue;
    if (folded.find(text::CaseFold(id)) != std::string::npos) return true;
  }
  return false;
}

std::string Redact(std::string_view input, const std::vector<std::string>& blocked) {
  constexpr std::string_view kMask = "[...]";
  std::string current(input);
  // Replacing words can only remove matches, so a few passes reach a fixpoint.
  for (int pass = 0; pass < 4 && MentionsAny(current, blocked); ++pass) {
    // Segment into alternating word / non-word runs; fold each run separately
    // so that folded offsets map back onto runs.
    std::vector<std::pair<std::size_t, std::size_t>> runs;  // [begin, end) in current
    for (std::size_t i = 0; i < current.size();) {
      const bool word = IsRedactWordByte(current[i]);
      std::size_t j = i;
      while (j < current.size() && IsRedactWordByte(current[j]) == word) ++j;
      runs.emplace_back(i, j);
      i = j;
    }
    std::string folded;
    std::vector<std::size_t> owner;  // folded byte -> run index
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const auto f = text::CaseFold(
          std::string_view(current).substr(runs[r].first, runs[r].second - runs[r].first));
      folded += f;
      owner.insert(owner.end(), f.size(), r);
    }
    std::vector<bool> hit(runs.size(), false);
    for (const auto& id : blocked) {
      if (id.empty()) continue;
      const auto needle = text::CaseFold(id);
      for (auto pos = folded.find(needle); pos != std::string::npos;
           pos = folded.find(needle, pos + 1)) {
        for (std::size_t k = pos; k < pos + needle.size(); ++k) hit[owner[k]] = true;
      }
    }
    std::string out;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const auto seg =
          std::string_view(current).substr(runs[r].first, runs[r].second - runs[r].first);
      const bool word = IsRedactWordByte(seg.front());
      if (hit[r] && word) {
        out += kMask;
      } else if (hit[r]) {
        // Separator inside a multi-word identifier: keep only spacing.
        out.push_back(' ');
      } else {
        out += seg;
      }
    }
    current = std::move(out);
  }
  return current;
}

std::string BuildPrompt(const GenerationRequest& request, const PromptTemplates& templates,
                        const PromptOptions& options) {
  const bool pair = request.kind == GenerationKind::kAlternatives;
  const std::size_t groups = pair ? 2 : 1;
  if (request.samples.size() != groups) {
    throw Error(ErrorKind::kInvalidArgument,
                KindName(request.kind) + " needs " + std::to_string(groups) + " sample set(s)");
  }
  for (const auto& s : request.samples) {
    if (s.texts.empty()) {
      throw Error(ErrorKind::kInsufficientData, "insufficient data for generation");
    }
  }
  if (MentionsAny(request.term, options.blocked)) {
    throw Error(ErrorKind::kInvalidArgument,
                "term '" + request.term + "' names a community; prompts must stay blind");
  }

  std::array<std::vector<std::string>, 2> lines;
  for (std::size_t g = 0; g < groups; ++g) {
    for (const auto& t : request.samples[g].texts) {
      const std::string clean = SingleLine(Redact(t, options.blocked));
      lines[g].emplace_back(text::TruncateCodepoints(clean, options.sample_chars));
    }
  }

  std::array<std::size_t, 2> keep = {lines[0].size(), lines[1].size()};
  const std::string& body = templates.body(request.kind);
  for (;;) {
    std::map<std::string, std::string> values = {{"term", request.term}};
    if (pair) {
      values["group1"] = NumberedList(lines[0], keep[0]);
      values["group2"] = NumberedList(lines[1], keep[1]);
    } else {
      values["samples"] = NumberedList(lines[0], keep[0]);
    }
    std::string prompt = Render(body, values);
    if (text::CountCodepoints(prompt) <= options.budget_chars) {
      if (MentionsAny(prompt, options.blocked)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "prompt template for " + KindName(request.kind) + " names a community");
      }
      return prompt;
    }
    // Drop a trailing sample from the larger group (group 2 on ties).
    const std::size_t g = pair && keep[1] >= keep[0] ? 1 : 0;
    if (keep[g] <= 1) {
      throw Error(ErrorKind::kInsufficientData,
                  "insufficient data for generation: prompt budget too small");
    }
    --keep[g];
  }
}

std::string StubBackend::Complete(const std::string& prompt, const std::string& model_id,
                                  uint64_t seed) {
  std::map<std::string, int> counts;
  std::istringstream in(prompt);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == 0 || line.compare(i, 2, ". ") != 0) continue;
    for (const auto& tok : Analyze(std::string_view(line).substr(i + 2))) {
      if (IsSentinel(tok) || text::IsStopword(tok)) continue;
      if (!std::any_of(tok.begin(), tok.end(),
                       [](char c) { return std::isalpha(static_cast<unsigned char>(c)); })) {
        continue;
      }
      ++counts[tok];
    }
  }
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > 5) ranked.resize(5);

  std::string out = "[stub " + model_id + " seed=" + std::to_string(seed) +
                    " digest=" + text::Sha256Hex(prompt).substr(0, 12) + "]\n";
  out += "Most frequent words in the supplied texts:";
  for (const auto& [word, n] : ranked) out += "\n- " + word;
  if (ranked.empty()) out += "\n- (none)";
  return out;
}

ChatCompletionBackend::ChatCompletionBackend(std::string endpoint, std::string api_key,
                                             std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_(timeout) {}

std::string ChatCompletionBackend::Complete(const std::string& prompt,
                                            const std::string& model_id, uint64_t seed) {
  const auto scheme_end = endpoint_.find("://");
  if (scheme_end == std::string::npos) {
    throw std::runtime_error("LLM endpoint must be an absolute URL: " + endpoint_);
  }
  const auto path_begin = endpoint_.find('/', scheme_end + 3);
  const std::string origin = endpoint_.substr(0, path_begin);
  const std::string path =
      path_begin == std::string::npos ? "/v1/chat/completions" : endpoint_.substr(path_begin);

  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  nlohmann::json body = {
      {"model", model_id},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", 0},
      {"seed", seed},
  };
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw TransientBackendError("transport error: " + httplib::to_string(res.error()));
  }
  const std::string snippet(text::TruncateBytes(res->body, 300));
  if (res->status == 429 || res->status >= 500) {
    throw TransientBackendError("HTTP " + std::to_string(res->status) + ": " + snippet);
  }
  if (res->status != 200) {
    throw std::runtime_error("HTTP " + std::to_string(res->status) + ": " + snippet);
  }
  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) throw std::runtime_error("response is not JSON: " + snippet);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error("response lacks choices[0].message.content: " + snippet);
  }
}

BoundedBackend::BoundedBackend(LlmBackend& inner, int parallelism)
    : inner_(inner), slots_(std::max(1, parallelism)) {}

std::string BoundedBackend::Complete(const std::string& prompt, const std::string& model_id,
                                     uint64_t seed) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return inner_.Complete(prompt, model_id, seed);
}

std::unique_ptr<LlmBackend> BackendFromEnvironment(std::chrono::milliseconds timeout) {
  const char* endpoint = std::getenv("BD_LLM_ENDPOINT");
  const char* key = std::getenv("BD_LLM_API_KEY");
  const bool has_endpoint = endpoint != nullptr && *endpoint != '\0';
  const bool has_key = key != nullptr && *key != '\0';
  if (!has_endpoint && !has_key) {
    spdlog::info("BD_LLM_ENDPOINT and BD_LLM_API_KEY unset; using the offline stub backend");
    return std::make_unique<StubBackend>();
  }
  return std::make_unique<ChatCompletionBackend>(
      has_endpoint ? endpoint : "https://api.openai.com/v1/chat/completions",
      has_key ? key : "", timeout);
}

GenerationResult Generate(LlmBackend& backend, const GenerationRequest& request,
                          const GenerationSettings& settings) {
  GenerationResult result;
  result.request = request;
  result.prompt = BuildPrompt(request, settings.templates, settings.prompt);
  for (const auto& s : request.samples) {
    result.provenance.insert(result.provenance.end(), s.doc_ids.begin(), s.doc_ids.end());
  }
  result.backend_id = backend.id();

  auto backoff = settings.initial_backoff;
  std::string last_error;
  const int max_attempts = 1 + std::max(0, settings.max_retries);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    result.attempts = attempt;
    try {
      std::string output = backend.Complete(result.prompt, request.model_id, request.seed);
      if (output.empty()) throw TransientBackendError("empty completion");
      const std::size_t limit = 4 * settings.expected_chars[static_cast<std::size_t>(request.kind)];
      if (text::CountCodepoints(output) > limit) {
        output = std::string(text::TruncateCodepoints(output, limit));
        result.truncated = true;
      }
      result.output = std::move(output);
      result.created_at = text::UtcTimestamp();
      return result;
    } catch (const TransientBackendError& e) {
      last_error = e.what();
      spdlog::warn("backend {} attempt {}/{} failed: {}", backend.id(), attempt, max_attempts,
                   last_error);
      if (attempt < max_attempts && backoff.count() > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorKind::kGenerationFailure,
                  "backend " + backend.id() + " failed: " + std::string(e.what()));
    }
  }
  throw Error(ErrorKind::kGenerationFailure, "backend " + backend.id() + " failed after " +
                                                 std::to_string(max_attempts) +
                                                 " attempts: " + last_error);
}

}  // namespace bd

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bd/corpus.hpp"
#include "bd/index.hpp"
#include "json.hpp"

namespace bd {

struct SampleSet {
  std::string term;  // normalized surface
  Community community = Community::kFirst;
  uint64_t seed = 0;
  std::size_t cap = 0;
  std::vector<std::string> doc_ids;  // ascending
  std::vector<std::string> texts;    // raw texts, aligned with doc_ids
};

// Uniform sample without replacement of up to cap matching documents of one
// community. Deterministic in (index, term, community, cap, seed).
SampleSet SampleMatches(const InvertedIndex& index, std::string_view term, Community community,
                        std::size_t cap, uint64_t seed);

enum class GenerationKind { kSummary = 0, kDefinition = 1, kAlternatives = 2 };

std::string KindName(GenerationKind kind);
GenerationKind KindFromName(std::string_view name);

struct GenerationRequest {
  GenerationKind kind = GenerationKind::kSummary;
  std::string term;
  // One set for summary and definition, two for alternatives.
  std::vector<SampleSet> samples;
  std::string model_id;
  uint64_t seed = 0;
};

struct GenerationResult {
  GenerationRequest request;
  std::string prompt;
  std::string output;
  std::vector<std::string> provenance;
  std::string backend_id;
  std::string created_at;
  int attempts = 0;
  bool truncated = false;
};

nlohmann::json ToJson(const GenerationResult& result);
GenerationResult GenerationResultFromJson(const nlohmann::json& j);

// Prompt templates, one per generation kind. File layout:
//
//   bd-templates v<N>
//   [summary]
//   ...
//   [definition]
//   ...
//   [alternatives]
//   ...
//
// Placeholders: {term}, {samples}, {group1}, {group2}.
struct PromptTemplates {
  int version = 0;
  std::array<std::string, 3> bodies;

  const std::string& body(GenerationKind kind) const {
    return bodies[static_cast<std::size_t>(kind)];
  }
  static PromptTemplates Parse(std::istream& in);
  static PromptTemplates LoadFile(const std::filesystem::path& path);
};

struct PromptOptions {
  std::size_t sample_chars = 500;
  std::size_t budget_chars = 12000;
  // Community display names and raw labels. None may reach a prompt.
  std::vector<std::string> blocked;
};

// Case-insensitive substring test against every blocked identifier.
bool MentionsAny(std::string_view text, const std::vector<std::string>& blocked);
// Replaces each word overlapping a blocked identifier with "[...]".
std::string Redact(std::string_view text, const std::vector<std::string>& blocked);

// Throws kInsufficientData when a sample set is empty or nothing fits the
// budget, and kInvalidArgument when the term itself names a community.
std::string BuildPrompt(const GenerationRequest& request, const PromptTemplates& templates,
                        const PromptOptions& options);

// Raised by backends for failures worth retrying (transport errors, 429, 5xx).
class TransientBackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string id() const = 0;
  virtual std::string Complete(const std::string& prompt, const std::string& model_id,
                               uint64_t seed) = 0;
};

// Offline backend: output is a pure function of (prompt, model_id, seed).
class StubBackend : public LlmBackend {
 public:
  std::string id() const override { return "stub-v1"; }
  std::string Complete(const std::string& prompt, const std::string& model_id,
                       uint64_t seed) override;
};

// OpenAI-style chat-completions client.
class ChatCompletionBackend : public LlmBackend {
 public:
  ChatCompletionBackend(std::string endpoint, std::string api_key,
                        std::chrono::milliseconds timeout);
  std::string id() const override { return "chat-completions:" + endpoint_; }
  std::string Complete(const std::string& prompt, const std::string& model_id,
                       uint64_t seed) override;

 private:
  std::string endpoint_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
};

// Caps the number of concurrent Complete calls on a shared backend.
class BoundedBackend : public LlmBackend {
 public:
  BoundedBackend(LlmBackend& inner, int parallelism);
  std::string id() const override { return inner_.id(); }
  std::string Complete(const std::string& prompt, const std::string& model_id,
                       uint64_t seed) override;

 private:
  LlmBackend& inner_;
  std::counting_semaphore<> slots_;
};

// Chat backend when BD_LLM_ENDPOINT or BD_LLM_API_KEY is set, stub otherwise.
std::unique_ptr<LlmBackend> BackendFromEnvironment(std::chrono::milliseconds timeout);

struct GenerationSettings {
  PromptTemplates templates;
  PromptOptions prompt;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{250};
  // Expected output length per kind; outputs beyond 4x are truncated.
  std::array<std::size_t, 3> expected_chars = {1000, 600, 600};
};

// Builds the prompt and calls the backend, retrying transient failures with
// exponential backoff. Throws kInsufficientData for empty samples (no backend
// call) and kGenerationFailure once retries are exhausted.
GenerationResult Generate(LlmBackend& backend, const GenerationRequest& request,
                          const GenerationSettings& settings);

}  // namespace bd

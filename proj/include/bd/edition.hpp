#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bd/curation.hpp"
#include "bd/generation_cache.hpp"
#include "bd/rag.hpp"

namespace bd {

struct DictionaryEntry {
  CuratedTerm term;
  std::string summary_first;
  std::string summary_second;
  std::vector<std::string> alternatives;
  std::string stats_line;
  std::array<std::vector<std::string>, 2> provenance;
};

struct Erratum {
  std::string term;
  std::string reason;
};

struct FrontMatter {
  std::string title;
  std::string description;
  std::string generated_at;
  std::string config_digest;
  std::array<std::string, 2> names;
};

struct PaperEdition {
  FrontMatter front;
  std::vector<DictionaryEntry> entries;  // codepoint order of the surface
  std::vector<Erratum> errata;
};

struct EditionSettings {
  std::string title = "Bridging Dictionary";
  std::string description;
  std::string config_digest;
  std::array<std::string, 2> names = {"Community 1", "Community 2"};
  std::size_t cap = 50;
  std::string model_id = "gpt-3.5-turbo";
  uint64_t seed = 0;
  int parallelism = 4;
  GenerationSettings generation;
};

// "Rates 12.5 vs 3.0 per 1k docs; sentiment 0.12 vs -0.40" with names.
std::string StatsLine(const TermStats& stats, const std::array<std::string, 2>& names);

// Bullet lines ("- x", "* x", "1. x") of a generated alternatives text.
std::vector<std::string> ParseAlternatives(std::string_view output);

// Generates both summaries and the alternatives for every curated term.
// Terms whose generation fails land in errata. Throws kInvalidArgument for
// an empty list and kGenerationFailure when no entry could be produced.
PaperEdition Assemble(const std::vector<CuratedTerm>& curated, const InvertedIndex& index,
                      GenerationCache& cache, LlmBackend& backend,
                      const EditionSettings& settings);

enum class EditionFormat { kMarkdown, kHtml };

EditionFormat EditionFormatFromName(std::string_view name);
std::string Render(const PaperEdition& edition, EditionFormat format);

}  // namespace bd

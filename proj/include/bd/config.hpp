#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bd/corpus.hpp"
#include "bd/curation.hpp"
#include "bd/edition.hpp"
#include "bd/rag.hpp"
#include "bd/scatter.hpp"

namespace bd {

struct RagConfig {
  std::size_t cap = 50;
  std::string model_id = "gpt-3.5-turbo";
  uint64_t seed = 0;
  int parallelism = 4;
  int timeout_ms = 30000;
  int max_retries = 3;
  int backoff_ms = 250;
  std::size_t sample_chars = 500;
  std::size_t budget_chars = 12000;
};

struct ScatterConfig {
  int dim = 256;
  ClusterParams cluster;
};

struct ServerConfig {
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  std::filesystem::path static_dir;  // empty: no static mount
};

struct PathsConfig {
  std::filesystem::path index;
  std::filesystem::path cache;
  std::filesystem::path templates;
  std::filesystem::path output;
  std::filesystem::path curated;
};

struct AppConfig {
  std::filesystem::path source;  // config file, empty when defaults only
  std::filesystem::path corpus_path;
  Schema schema;
  std::array<std::string, 2> names = {"Community 1", "Community 2"};
  std::string title = "Bridging Dictionary";
  std::string description;
  std::filesystem::path lexicon_path;
  int n_max = 3;
  CurationConfig curation;
  RagConfig rag;
  ScatterConfig scatter;
  ServerConfig server;
  PathsConfig paths;

  // Digest of every setting that shapes an edition's content.
  std::string Digest() const;

  GenerationSettings Generation(const PromptTemplates& templates,
                                const std::array<std::string, 2>& labels) const;
  EditionSettings Edition(const PromptTemplates& templates,
                          const std::array<std::string, 2>& labels) const;
};

// Dotted key to raw value, e.g. {"curation.min_docs", "15"}.
using Overrides = std::map<std::string, std::string>;

// Reads the TOML file (when given) and applies overrides on top. Relative
// paths in the file resolve against the file's directory; relative paths in
// overrides and defaults resolve against the working directory. Unknown keys
// and ill-typed values throw kInvalidArgument; a missing file throws
// kMissingInput.
AppConfig LoadConfig(const std::optional<std::filesystem::path>& file,
                     const Overrides& overrides = {});

// Explicit path, else $BD_CONFIG, else ./bd.toml when present.
std::optional<std::filesystem::path> ResolveConfigPath(
    const std::optional<std::filesystem::path>& explicit_path);

// Identifiers that must never reach a prompt: display names plus labels.
std::vector<std::string> BlockedIdentifiers(const std::array<std::string, 2>& names,
                                            const std::array<std::string, 2>& labels);

// Built-in prompt templates, used when no template file is configured.
PromptTemplates DefaultTemplates();
PromptTemplates LoadTemplates(const AppConfig& config);

}  // namespace bd

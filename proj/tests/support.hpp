#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "bd/corpus.hpp"
#include "bd/index.hpp"
#include "bd/sentiment.hpp"

namespace bdtest {

namespace fs = std::filesystem;

inline fs::path SourceDir() { return fs::path(BD_SOURCE_DIR); }
inline fs::path FixtureCorpus() { return SourceDir() / "data" / "fixture" / "corpus.jsonl"; }
inline fs::path BundledLexicon() { return SourceDir() / "data" / "valence.tsv"; }
inline fs::path ToyLexiconPath() { return SourceDir() / "tests" / "data" / "toy_lexicon.tsv"; }

inline const bd::SentimentLexicon& ToyLexicon() {
  static const bd::SentimentLexicon lexicon = bd::LoadLexiconFile(ToyLexiconPath());
  return lexicon;
}

// The fixture index, built once per process.
inline const bd::InvertedIndex& FixtureIndex() {
  static const bd::InvertedIndex index = [] {
    auto ingested = bd::IngestFile(FixtureCorpus(), {});
    return bd::InvertedIndex::Build(std::move(ingested.corpus), 3,
                                    bd::LoadLexiconFile(BundledLexicon()));
  }();
  return index;
}

inline bd::InvertedIndex IndexFromJsonl(const std::string& jsonl, int n_max = 3,
                                        const bd::SentimentLexicon& lexicon = ToyLexicon()) {
  std::istringstream in(jsonl);
  auto ingested = bd::Ingest(in);
  return bd::InvertedIndex::Build(std::move(ingested.corpus), n_max, lexicon);
}

inline std::string Record(const std::string& id, const std::string& text,
                          const std::string& community) {
  std::ostringstream out;
  out << R"({"id":")" << id << R"(","text":")" << text << R"(","community":")" << community
      << "\"}\n";
  return out.str();
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("bd-test-" + std::to_string(::getpid()) + "-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace bdtest

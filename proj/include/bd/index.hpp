#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bd/corpus.hpp"
#include "bd/sentiment.hpp"

namespace bd {

// Strictly increasing document ordinals.
using PostingList = std::vector<DocOrdinal>;
using Postings = std::array<PostingList, 2>;

// Document-level n-gram index over an owned corpus, with per-document
// sentiment cached at build time. Immutable once built.
class InvertedIndex {
 public:
  static constexpr uint32_t kSnapshotVersion = 1;

  // Throws when either community has no documents.
  static InvertedIndex Build(Corpus corpus, int n_max, const SentimentLexicon& lexicon);

  // Reads a snapshot written by Save. Throws kMissingInput when the file is
  // absent and kCorruptArtifact on bad magic, version or checksums.
  static InvertedIndex Load(const std::filesystem::path& path);
  // source_hash identifies the input the corpus was read from (e.g. the
  // digest of the corpus file) and is stored verbatim.
  void Save(const std::filesystem::path& path, const std::string& source_hash) const;

  const Corpus& corpus() const { return corpus_; }
  int n_max() const { return n_max_; }
  const std::array<std::size_t, 2>& totals() const { return corpus_.counts(); }
  const std::string& lexicon_digest() const { return lexicon_digest_; }
  const std::string& source_hash() const { return source_hash_; }

  // Indexed surfaces in codepoint order.
  const std::vector<std::string>& terms() const { return terms_; }
  const Postings& postings(std::size_t term_index) const { return postings_[term_index]; }
  const Postings* Lookup(std::string_view surface) const;

  // Documents containing tokens as a contiguous run, for any phrase length.
  Postings Match(const std::vector<std::string>& tokens) const;

  double sentiment(DocOrdinal doc) const { return sentiment_[doc]; }

 private:
  Corpus corpus_;
  int n_max_ = 0;
  std::string lexicon_digest_;
  std::string source_hash_;
  std::vector<std::string> terms_;
  std::vector<Postings> postings_;
  std::vector<double> sentiment_;
};

struct TermStats {
  std::string term;
  std::array<std::size_t, 2> doc_count{};
  std::array<double, 2> rate_per_k{};
  // Absent when no document of either community matches.
  std::optional<std::array<double, 2>> share;
  std::array<std::optional<double>, 2> sentiment_mean;
};

enum class Leader { kFirst, kSecond, kTie, kUndefined };

struct ComparativeView {
  Leader higher_rate = Leader::kTie;
  Leader higher_sentiment = Leader::kUndefined;
  double rate_delta = 0.0;  // first minus second
  std::optional<double> sentiment_delta;
};

// Throws kInvalidArgument("empty query") when the phrase has no tokens.
TermStats ComputeTermStats(const InvertedIndex& index, std::string_view phrase);
TermStats StatsFromPostings(const InvertedIndex& index, std::string term, const Postings& postings);
ComparativeView Compare(const TermStats& stats);

std::string LeaderName(Leader leader);

}  // namespace bd

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bd {

// The two communities of a corpus, addressed by position. Position 1 is the
// first configured (or first seen) label, position 2 the other one.
enum class Community : uint8_t { kFirst = 0, kSecond = 1 };

inline constexpr std::array<Community, 2> kCommunities = {Community::kFirst, Community::kSecond};

inline constexpr std::size_t Index(Community c) { return static_cast<std::size_t>(c); }
inline constexpr int Slot(Community c) { return static_cast<int>(c) + 1; }
inline constexpr Community Other(Community c) {
  return c == Community::kFirst ? Community::kSecond : Community::kFirst;
}
std::optional<Community> CommunityFromSlot(int slot);

using DocOrdinal = uint32_t;

struct Document {
  std::string id;
  std::string text;
  Community community = Community::kFirst;
  std::vector<std::string> tokens;  // Tokenize(Normalize(text))
};

// Field names of the line-delimited JSON input.
struct Schema {
  std::string id_field = "id";
  std::string text_field = "text";
  std::string community_field = "community";
  // Raw community values for positions 1 and 2. When unset, positions are
  // assigned in order of first appearance.
  std::optional<std::array<std::string, 2>> labels;
};

struct IngestReport {
  std::size_t lines = 0;
  std::size_t skipped = 0;
  std::array<std::size_t, 2> counts{};
  // First few skip reasons, "line N: reason".
  std::vector<std::string> skip_reasons;
};

class Corpus {
 public:
  Corpus() = default;
  // Takes ownership of already tokenized documents. Throws on duplicate ids.
  Corpus(std::array<std::string, 2> labels, std::vector<Document> documents);

  const std::vector<Document>& documents() const { return documents_; }
  const Document& doc(DocOrdinal ordinal) const { return documents_[ordinal]; }
  std::size_t size() const { return documents_.size(); }
  const std::array<std::string, 2>& labels() const { return labels_; }
  const std::array<std::size_t, 2>& counts() const { return counts_; }
  std::optional<DocOrdinal> Find(std::string_view id) const;

  // Digest over labels and (id, text, community) of every document in order.
  std::string ContentHash() const;

 private:
  std::array<std::string, 2> labels_;
  std::vector<Document> documents_;
  std::array<std::size_t, 2> counts_{};
  std::unordered_map<std::string, DocOrdinal> by_id_;
};

struct IngestResult {
  Corpus corpus;
  IngestReport report;
};

IngestResult Ingest(std::istream& in, const Schema& schema = {});
IngestResult IngestFile(const std::filesystem::path& path, const Schema& schema = {});

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kUserToken = "<user>";
inline bool IsSentinel(std::string_view token) {
  return token == kUrlToken || token == kUserToken;
}

std::string Normalize(std::string_view text);
std::vector<std::string> Tokenize(std::string_view normalized);
inline std::vector<std::string> Analyze(std::string_view text) { return Tokenize(Normalize(text)); }

// All contiguous n-grams for n = 1..n_max, grouped by n and in document order
// within each group. Multi-token n-grams never contain a sentinel.
std::vector<std::string> ExtractNgrams(const std::vector<std::string>& tokens, int n_max);

std::string JoinTokens(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end);
std::vector<std::string> SplitSurface(std::string_view surface);

}  // namespace bd

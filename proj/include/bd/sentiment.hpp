#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bd {

// Token valences in [-1, 1] plus a set of negation tokens.
class SentimentLexicon {
 public:
  SentimentLexicon() = default;

  // Last value wins for a repeated token.
  void Set(std::string token, double valence);
  void AddNegator(std::string token) { negators_.insert(std::move(token)); }

  const double* Find(std::string_view token) const;
  bool IsNegator(std::string_view token) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Stable digest of entries and negators, independent of insertion order.
  std::string Digest() const;

 private:
  friend SentimentLexicon LoadLexicon(std::istream& in);

  std::unordered_map<std::string, double> entries_;
  std::unordered_set<std::string> negators_;
  std::vector<std::string> warnings_;
};

// Tab separated "token<TAB>valence" rows, '#' comments, and an optional
// "[negators]" section listing one negation token per line.
SentimentLexicon LoadLexicon(std::istream& in);
SentimentLexicon LoadLexiconFile(const std::filesystem::path& path);

inline constexpr int kNegationWindow = 2;

// Mean valence of lexicon hits, each hit negated when one of the preceding
// kNegationWindow tokens is a negator. 0 when nothing matches.
double ScoreTokens(const std::vector<std::string>& tokens, const SentimentLexicon& lexicon);

}  // namespace bd

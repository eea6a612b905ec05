#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bd/index.hpp"
#include "json.hpp"

namespace bd {

// Editor-tunable selection thresholds.
struct CurationConfig {
  double min_rate_per_k = 0.5;
  std::size_t min_docs = 20;
  double freq_z_threshold = 3.0;
  double sent_gap_threshold = 0.35;
  std::size_t sent_min_docs = 30;
  double prior_alpha = 0.5;
  int n_max = 3;
  std::optional<std::size_t> max_terms;
  bool subsumption_filter = true;

  // Throws kInvalidArgument on out-of-range fields.
  void Validate() const;
  // Digest of the canonical JSON form.
  std::string Digest() const;
};

enum class Trigger { kFrequency, kSentiment, kBoth };

struct DivergenceScore {
  double freq_z = 0.0;  // positive when the first community uses the term more
  std::optional<double> sent_gap;
  Trigger trigger = Trigger::kFrequency;
};

struct CuratedTerm {
  std::string term;
  TermStats stats;
  DivergenceScore score;
  double rank_key = 0.0;
};

inline constexpr double kSentimentRankWeight = 1.0;

// Signed z-score of the smoothed log-odds ratio between two document counts.
// Throws kInvalidArgument unless 0 <= y <= n for both sides and alpha > 0.
double LogOddsZ(double y1, double n1, double y2, double n2, double alpha);

// Indexed terms frequent enough in both communities, in codepoint order.
// Sentinel tokens are never candidates.
std::vector<std::string> Candidates(const InvertedIndex& index, const CurationConfig& config);

std::optional<double> SentimentGap(const TermStats& stats, const CurationConfig& config);

std::vector<CuratedTerm> Curate(const InvertedIndex& index, const CurationConfig& config);

std::string TriggerName(Trigger trigger);

nlohmann::json ToJson(const CurationConfig& config);
CurationConfig CurationConfigFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const TermStats& stats);
TermStats TermStatsFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const CuratedTerm& term);
CuratedTerm CuratedTermFromJson(const nlohmann::json& j);

// One CuratedTerm JSON object per line.
void WriteCuratedTerms(std::ostream& out, const std::vector<CuratedTerm>& terms);
std::vector<CuratedTerm> ReadCuratedTerms(std::istream& in);
std::vector<CuratedTerm> ReadCuratedTermsFile(const std::filesystem::path& path);

}  // namespace bd

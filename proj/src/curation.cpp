#include "bd/curation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "bd/error.hpp"
#include "bd/text.hpp"

namespace bd {

void CurationConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidArgument, "invalid curation config: " + what);
  };
  if (!(min_rate_per_k >= 0.0)) fail("min_rate_per_k must be >= 0");
  if (min_docs < 1) fail("min_docs must be >= 1");
  if (!(freq_z_threshold > 0.0)) fail("freq_z_threshold must be > 0");
  if (!(sent_gap_threshold > 0.0)) fail("sent_gap_threshold must be > 0");
  if (sent_min_docs < 1) fail("sent_min_docs must be >= 1");
  if (!(prior_alpha > 0.0)) fail("prior_alpha must be > 0");
  if (n_max < 1) fail("n_max must be >= 1");
}

std::string CurationConfig::Digest() const { return text::Sha256Hex(ToJson(*this).dump()); }

double LogOddsZ(double y1, double n1, double y2, double n2, double alpha) {
  if (!(alpha > 0.0) || !(y1 >= 0.0) || !(y2 >= 0.0) || !(n1 >= y1) || !(n2 >= y2)) {
    throw Error(ErrorKind::kInvalidArgument, "log-odds precondition violated");
  }
  const double delta =
      std::log((y1 + alpha) / (n1 - y1 + alpha)) - std::log((y2 + alpha) / (n2 - y2 + alpha));
  return delta / std::sqrt(1.0 / (y1 + alpha) + 1.0 / (y2 + alpha));
}

std::vector<std::string> Candidates(const InvertedIndex& index, const CurationConfig& config) {
  std::vector<std::string> out;
  const auto& totals = index.totals();
  const auto& terms = index.terms();
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& surface = terms[t];
    if (IsSentinel(surface)) continue;
    const auto order = static_cast<int>(std::count(surface.begin(), surface.end(), ' ')) + 1;
    if (order > config.n_max) continue;
    const auto& p = index.postings(t);
    bool ok = true;
    for (auto c : kCommunities) {
      const std::size_t n = p[Index(c)].size();
      const double rate = 1000.0 * static_cast<double>(n) / static_cast<double>(totals[Index(c)]);
      ok = ok && n >= config.min_docs && rate >= config.min_rate_per_k;
    }
    if (ok) out.push_back(surface);
  }
  return out;
}

std::optional<double> SentimentGap(const TermStats& stats, const CurationConfig& config) {
  for (auto c : kCommunities) {
    if (stats.doc_count[Index(c)] < config.sent_min_docs || !stats.sentiment_mean[Index(c)]) {
      return std::nullopt;
    }
  }
  return std::abs(*stats.sentiment_mean[0] - *stats.sentiment_mean[1]);
}

std::vector<CuratedTerm> Curate(const InvertedIndex& index, const CurationConfig& config) {
  config.Validate();
  if (index.n_max() < config.n_max) {
    throw Error(ErrorKind::kInvalidArgument, "index n_max " + std::to_string(index.n_max()) +
                                                 " is below curation n_max " +
                                                 std::to_string(config.n_max));
  }
  const auto& totals = index.totals();
  std::vector<CuratedTerm> selected;
  for (auto& surface : Candidates(index, config)) {
    const Postings* p = index.Lookup(surface);
    CuratedTerm term;
    term.stats = StatsFromPostings(index, surface, *p);
    term.score.freq_z = LogOddsZ(static_cast<double>(term.stats.doc_count[0]),
                                 static_cast<double>(totals[0]),
                                 static_cast<double>(term.stats.doc_count[1]),
                                 static_cast<double>(totals[1]), config.prior_alpha);
    term.score.sent_gap = SentimentGap(term.stats, config);
    const bool freq = std::abs(term.score.freq_z) >= config.freq_z_threshold;
    const bool sent = term.score.sent_gap && *term.score.sent_gap >= config.sent_gap_threshold;
    if (!freq && !sent) continue;
    term.score.trigger = freq && sent ? Trigger::kBoth : (freq ? Trigger::kFrequency : Trigger::kSentiment);
    term.rank_key =
        std::abs(term.score.freq_z) + kSentimentRankWeight * term.score.sent_gap.value_or(0.0);
    term.term = std::move(surface);
    selected.push_back(std::move(term));
  }

  if (config.subsumption_filter) {
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < selected.size(); ++i) position.emplace(selected[i].term, i);
    std::vector<bool> dominated(selected.size(), false);
    for (const auto& longer : selected) {
      const auto tokens = SplitSurface(longer.term);
      for (std::size_t n = 1; n < tokens.size(); ++n) {
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
          auto it = position.find(JoinTokens(tokens, i, i + n));
          if (it == position.end()) continue;
          if (std::abs(longer.score.freq_z) >= std::abs(selected[it->second].score.freq_z)) {
            dominated[it->second] = true;
          }
        }
      }
    }
    std::vector<CuratedTerm> kept;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      if (!dominated[i]) kept.push_back(std::move(selected[i]));
    }
    selected = std::move(kept);
  }

  std::sort(selected.begin(), selected.end(), [](const CuratedTerm& a, const CuratedTerm& b) {
    if (a.rank_key != b.rank_key) return a.rank_key > b.rank_key;
    return a.term < b.term;
  });
  if (config.max_terms && selected.size() > *config.max_terms) selected.resize(*config.max_terms);
  return selected;
}

std::string TriggerName(Trigger trigger) {
  switch (trigger) {
    case Trigger::kFrequency: return "frequency";
    case Trigger::kSentiment: return "sentiment";
    case Trigger::kBoth: return "both";
  }
  return "frequency";
}

namespace {

Trigger TriggerFromName(const std::string& name) {
  if (name == "frequency") return Trigger::kFrequency;
  if (name == "sentiment") return Trigger::kSentiment;
  if (name == "both") return Trigger::kBoth;
  throw Error(ErrorKind::kCorruptArtifact, "unknown trigger '" + name + "'");
}

nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> OptionalFromJson(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

nlohmann::json ToJson(const CurationConfig& c) {
  return {
      {"min_rate_per_k", c.min_rate_per_k},
      {"min_docs", c.min_docs},
      {"freq_z_threshold", c.freq_z_threshold},
      {"sent_gap_threshold", c.sent_gap_threshold},
      {"sent_min_docs", c.sent_min_docs},
      {"prior_alpha", c.prior_alpha},
      {"n_max", c.n_max},
      {"max_terms", c.max_terms ? nlohmann::json(*c.max_terms) : nlohmann::json(nullptr)},
      {"subsumption_filter", c.subsumption_filter},
  };
}

CurationConfig CurationConfigFromJson(const nlohmann::json& j) {
  CurationConfig c;
  c.min_rate_per_k = j.value("min_rate_per_k", c.min_rate_per_k);
  c.min_docs = j.value("min_docs", c.min_docs);
  c.freq_z_threshold = j.value("freq_z_threshold", c.freq_z_threshold);
  c.sent_gap_threshold = j.value("sent_gap_threshold", c.sent_gap_threshold);
  c.sent_min_docs = j.value("sent_min_docs", c.sent_min_docs);
  c.prior_alpha = j.value("prior_alpha", c.prior_alpha);
  c.n_max = j.value("n_max", c.n_max);
  if (j.contains("max_terms") && !j["max_terms"].is_null()) {
    c.max_terms = j["max_terms"].get<std::size_t>();
  }
  c.subsumption_filter = j.value("subsumption_filter", c.subsumption_filter);
  return c;
}

nlohmann::json ToJson(const TermStats& s) {
  nlohmann::json j;
  j["term"] = s.term;
  j["doc_count"] = s.doc_count;
  j["rate_per_k"] = s.rate_per_k;
  j["share"] = s.share ? nlohmann::json(*s.share) : nlohmann::json(nullptr);
  j["sentiment_mean"] = {OptionalJson(s.sentiment_mean[0]), OptionalJson(s.sentiment_mean[1])};
  return j;
}

TermStats TermStatsFromJson(const nlohmann::json& j) {
  TermStats s;
  s.term = j.at("term").get<std::string>();
  s.doc_count = j.at("doc_count").get<std::array<std::size_t, 2>>();
  s.rate_per_k = j.at("rate_per_k").get<std::array<double, 2>>();
  if (!j.at("share").is_null()) s.share = j["share"].get<std::array<double, 2>>();
  const auto& sm = j.at("sentiment_mean");
  s.sentiment_mean = {OptionalFromJson(sm.at(0)), OptionalFromJson(sm.at(1))};
  return s;
}

nlohmann::json ToJson(const CuratedTerm& t) {
  return {
      {"term", t.term},
      {"stats", ToJson(t.stats)},
      {"freq_z", t.score.freq_z},
      {"sent_gap", OptionalJson(t.score.sent_gap)},
      {"trigger", TriggerName(t.score.trigger)},
      {"rank_key", t.rank_key},
  };
}

CuratedTerm CuratedTermFromJson(const nlohmann::json& j) {
  CuratedTerm t;
  t.term = j.at("term").get<std::string>();
  t.stats = TermStatsFromJson(j.at("stats"));
  t.score.freq_z = j.at("freq_z").get<double>();
  t.score.sent_gap = OptionalFromJson(j.at("sent_gap"));
  t.score.trigger = TriggerFromName(j.at("trigger").get<std::string>());
  t.rank_key = j.at("rank_key").get<double>();
  return t;
}

void WriteCuratedTerms(std::ostream& out, const std::vector<CuratedTerm>& terms) {
  for (const auto& t : terms) out << ToJson(t).dump() << '\n';
}

std::vector<CuratedTerm> ReadCuratedTerms(std::istream& in) {
  std::vector<CuratedTerm> terms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      terms.push_back(CuratedTermFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kCorruptArtifact,
                  "curated terms line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return terms;
}

std::vector<CuratedTerm> ReadCuratedTermsFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingInput, "cannot open curated terms file: " + path.string());
  return ReadCuratedTerms(in);
}

}  // namespace bd

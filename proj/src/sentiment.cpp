#include "bd/sentiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "bd/error.hpp"
#include "bd/text.hpp"

namespace bd {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

void SentimentLexicon::Set(std::string token, double valence) {
  entries_[std::move(token)] = valence;
}

const double* SentimentLexicon::Find(std::string_view token) const {
  auto it = entries_.find(std::string(token));
  return it == entries_.end() ? nullptr : &it->second;
}

bool SentimentLexicon::IsNegator(std::string_view token) const {
  return negators_.contains(std::string(token));
}

std::string SentimentLexicon::Digest() const {
  std::vector<std::pair<std::string, double>> rows(entries_.begin(), entries_.end());
  std::sort(rows.begin(), rows.end());
  std::vector<std::string> negs(negators_.begin(), negators_.end());
  std::sort(negs.begin(), negs.end());
  std::ostringstream buf;
  buf.precision(17);
  for (const auto& [tok, v] : rows) buf << tok << '\t' << v << '\n';
  buf << "[negators]\n";
  for (const auto& n : negs) buf << n << '\n';
  return text::Sha256Hex(buf.str());
}

SentimentLexicon LoadLexicon(std::istream& in) {
  SentimentLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  bool in_negators = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = Trim(line);
    if (row.empty() || row.front() == '#') continue;
    if (row == "[negators]") {
      in_negators = true;
      continue;
    }
    if (in_negators) {
      lex.AddNegator(std::string(row));
      continue;
    }
    const auto tab = row.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorKind::kInvalidArgument,
                  "lexicon line " + std::to_string(line_no) + ": expected token<TAB>valence");
    }
    std::string token(Trim(row.substr(0, tab)));
    std::string_view value = Trim(row.substr(tab + 1));
    double valence = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), valence);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(valence)) {
      throw Error(ErrorKind::kInvalidArgument, "lexicon line " + std::to_string(line_no) +
                                                   ": unparseable valence '" +
                                                   std::string(value) + "'");
    }
    if (valence < -1.0 || valence > 1.0) {
      throw Error(ErrorKind::kInvalidArgument, "lexicon line " + std::to_string(line_no) +
                                                   ": valence out of [-1, 1] for '" + token +
                                                   "'");
    }
    if (lex.Find(token) != nullptr) {
      lex.warnings_.push_back("lexicon line " + std::to_string(line_no) + ": duplicate token '" +
                              token + "', last value wins");
    }
    lex.Set(std::move(token), valence);
  }
  return lex;
}

SentimentLexicon LoadLexiconFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingInput, "cannot open lexicon file: " + path.string());
  return LoadLexicon(in);
}

double ScoreTokens(const std::vector<std::string>& tokens, const SentimentLexicon& lexicon) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double* v = lexicon.Find(tokens[i]);
    // Zero-valence entries are not hits: they must not dilute the mean.
    if (v == nullptr || *v == 0.0) continue;
    bool negated = false;
    for (std::size_t k = i >= kNegationWindow ? i - kNegationWindow : 0; k < i; ++k) {
      negated = negated || lexicon.IsNegator(tokens[k]);
    }
    sum += negated ? -*v : *v;
    ++hits;
  }
  if (hits == 0) return 0.0;
  return std::clamp(sum / static_cast<double>(hits), -1.0, 1.0);
}

}  // namespace bd

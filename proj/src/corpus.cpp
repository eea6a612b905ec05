#include "bd/corpus.hpp"

#include <fstream>
#include <istream>
#include <string>
#include <utility>

#include "bd/error.hpp"
#include "bd/text.hpp"
#include "json.hpp"

namespace bd {
namespace {

constexpr std::size_t kMaxSkipReasons = 20;

bool IsWordByte(char c) {
  const auto b = static_cast<unsigned char>(c);
  return b >= 0x80 || (b >= '0' && b <= '9') || (b >= 'a' && b <= 'z') ||
         (b >= 'A' && b <= 'Z') || b == '_';
}

bool IsHandleByte(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c == '_';
}

bool AtWordStart(std::string_view s, std::size_t i) { return i == 0 || !IsWordByte(s[i - 1]); }

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Length of a Unicode space separator starting at s[i], 0 if none.
std::size_t UnicodeSpaceAt(std::string_view s, std::size_t i) {
  const auto b = [&](std::size_t k) {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0u;
  };
  if (b(0) == 0xC2 && b(1) == 0xA0) return 2;                          // U+00A0
  if (b(0) == 0xE2 && b(1) == 0x80 && b(2) >= 0x80 && b(2) <= 0x8B) {  // U+2000..U+200B
    return 3;
  }
  if (b(0) == 0xE2 && b(1) == 0x80 && b(2) == 0xAF) return 3;  // U+202F
  if (b(0) == 0xE2 && b(1) == 0x81 && b(2) == 0x9F) return 3;  // U+205F
  if (b(0) == 0xE3 && b(1) == 0x80 && b(2) == 0x80) return 3;  // U+3000
  return 0;
}

std::string CollapseSpaces(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t len = IsAsciiSpace(s[i]) ? 1 : UnicodeSpaceAt(s, i);
    if (len > 0) {
      pending = true;
      i += len;
      continue;
    }
    if (pending && !out.empty()) out.push_back(' ');
    pending = false;
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

bool StartsWith(std::string_view s, std::size_t i, std::string_view prefix) {
  return s.substr(i, prefix.size()) == prefix;
}

std::string ReplaceUrls(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (AtWordStart(s, i) &&
        (StartsWith(s, i, "http://") || StartsWith(s, i, "https://") ||
         (StartsWith(s, i, "www.") && i + 4 < s.size() && s[i + 4] != ' '))) {
      while (i < s.size() && s[i] != ' ') ++i;
      out += kUrlToken;
      continue;
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

std::string StripHashtags(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '#' && AtWordStart(s, i)) {
      std::size_t j = i;
      while (j < s.size() && s[j] == '#') ++j;
      if (j < s.size() && IsWordByte(s[j])) {
        i = j;
        continue;
      }
      out.append(s.substr(i, j - i));
      i = j;
      continue;
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

std::string ReplaceMentions(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '@' && AtWordStart(s, i) && i + 1 < s.size() && IsHandleByte(s[i + 1])) {
      ++i;
      while (i < s.size() && IsHandleByte(s[i])) ++i;
      out += kUserToken;
      continue;
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

// Length of a punctuation character at the start (or end) of s, 0 if none.
constexpr std::string_view kUnicodePunct[] = {
    "‘", "’", "“", "”", "…", "–", "—", "¡",
    "¿", "«", "»", "‹", "›", "„", "‚", "·",
    "•", "、", "。", "！", "？", "，", "：", "；"};

bool IsAsciiPunct(char c) {
  const auto b = static_cast<unsigned char>(c);
  return (b >= 33 && b <= 47) || (b >= 58 && b <= 64) || (b >= 91 && b <= 96) ||
         (b >= 123 && b <= 126);
}

std::size_t LeadingPunct(std::string_view s) {
  if (s.empty()) return 0;
  if (IsAsciiPunct(s.front())) return 1;
  for (auto p : kUnicodePunct) {
    if (s.starts_with(p)) return p.size();
  }
  return 0;
}

std::size_t TrailingPunct(std::string_view s) {
  if (s.empty()) return 0;
  if (IsAsciiPunct(s.back())) return 1;
  for (auto p : kUnicodePunct) {
    if (s.ends_with(p)) return p.size();
  }
  return 0;
}

bool StartsWithSentinel(std::string_view s) {
  return s.starts_with(kUrlToken) || s.starts_with(kUserToken);
}

bool EndsWithSentinel(std::string_view s) {
  return s.ends_with(kUrlToken) || s.ends_with(kUserToken);
}

}  // namespace

std::optional<Community> CommunityFromSlot(int slot) {
  if (slot == 1) return Community::kFirst;
  if (slot == 2) return Community::kSecond;
  return std::nullopt;
}

Corpus::Corpus(std::array<std::string, 2> labels, std::vector<Document> documents)
    : labels_(std::move(labels)), documents_(std::move(documents)) {
  by_id_.reserve(documents_.size());
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& d = documents_[i];
    if (!by_id_.emplace(d.id, static_cast<DocOrdinal>(i)).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate document id: " + d.id);
    }
    ++counts_[Index(d.community)];
  }
}

std::optional<DocOrdinal> Corpus::Find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::string Corpus::ContentHash() const {
  std::string buf;
  buf += labels_[0];
  buf += '\x1f';
  buf += labels_[1];
  buf += '\x1e';
  for (const auto& d : documents_) {
    buf += d.id;
    buf += '\x1f';
    buf += d.text;
    buf += '\x1f';
    buf += static_cast<char>('0' + Slot(d.community));
    buf += '\x1e';
  }
  return text::Sha256Hex(buf);
}

std::string Normalize(std::string_view input) {
  std::string s = CollapseSpaces(text::CaseFold(input));
  // Each rewrite can expose a new word start for another, so run to a fixpoint.
  for (;;) {
    std::string next = CollapseSpaces(ReplaceMentions(StripHashtags(ReplaceUrls(s))));
    if (next == s) return s;
    s = std::move(next);
  }
}

std::vector<std::string> Tokenize(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < normalized.size()) {
    while (i < normalized.size() && normalized[i] == ' ') ++i;
    std::size_t j = i;
    while (j < normalized.size() && normalized[j] != ' ') ++j;
    std::string_view tok = normalized.substr(i, j - i);
    i = j;
    while (!tok.empty() && !StartsWithSentinel(tok)) {
      const std::size_t n = LeadingPunct(tok);
      if (n == 0) break;
      tok.remove_prefix(n);
    }
    while (!tok.empty() && !EndsWithSentinel(tok)) {
      const std::size_t n = TrailingPunct(tok);
      if (n == 0) break;
      tok.remove_suffix(n);
    }
    if (!tok.empty()) tokens.emplace_back(tok);
  }
  return tokens;
}

std::string JoinTokens(const std::vector<std::string>& tokens, std::size_t begin,
                       std::size_t end) {
  std::string out;
  for (std::size_t k = begin; k < end; ++k) {
    if (k > begin) out.push_back(' ');
    out += tokens[k];
  }
  return out;
}

std::vector<std::string> SplitSurface(std::string_view surface) {
  std::vector<std::string> parts;
  if (surface.empty()) return parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = surface.find(' ', start);
    parts.emplace_back(surface.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<std::string> ExtractNgrams(const std::vector<std::string>& tokens, int n_max) {
  if (n_max < 1) throw Error(ErrorKind::kInvalidArgument, "n_max must be >= 1");
  std::vector<std::string> out;
  const std::size_t m = tokens.size();
  for (std::size_t n = 1; n <= static_cast<std::size_t>(n_max) && n <= m; ++n) {
    for (std::size_t i = 0; i + n <= m; ++i) {
      if (n > 1) {
        bool crosses = false;
        for (std::size_t k = i; k < i + n && !crosses; ++k) crosses = IsSentinel(tokens[k]);
        if (crosses) continue;
      }
      out.push_back(JoinTokens(tokens, i, i + n));
    }
  }
  return out;
}

IngestResult Ingest(std::istream& in, const Schema& schema) {
  IngestReport report;
  std::vector<Document> docs;
  std::unordered_map<std::string, bool> seen_ids;
  std::array<std::string, 2> labels;
  std::size_t known_labels = 0;
  if (schema.labels) {
    labels = *schema.labels;
    known_labels = 2;
  }

  auto skip = [&](std::size_t line_no, const std::string& why) {
    ++report.skipped;
    if (report.skip_reasons.size() < kMaxSkipReasons) {
      report.skip_reasons.push_back("line " + std::to_string(line_no) + ": " + why);
    }
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++report.lines;
    if (!text::IsValidUtf8(line)) {
      skip(line_no, "invalid UTF-8");
      continue;
    }
    auto record = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object()) {
      skip(line_no, "not a JSON object");
      continue;
    }
    auto text_it = record.find(schema.text_field);
    if (text_it == record.end() || !text_it->is_string()) {
      skip(line_no, "missing text field '" + schema.text_field + "'");
      continue;
    }
    auto comm_it = record.find(schema.community_field);
    if (comm_it == record.end() || !comm_it->is_string()) {
      skip(line_no, "missing community field '" + schema.community_field + "'");
      continue;
    }
    std::string id;
    auto id_it = record.find(schema.id_field);
    if (id_it == record.end() || id_it->is_null()) {
      id = "line-" + std::to_string(line_no);
    } else if (id_it->is_string()) {
      id = id_it->get<std::string>();
    } else if (id_it->is_number_integer()) {
      id = id_it->dump();
    } else {
      skip(line_no, "id field is neither string nor integer");
      continue;
    }
    if (seen_ids.contains(id)) {
      skip(line_no, "duplicate id '" + id + "'");
      continue;
    }

    const auto& label = comm_it->get_ref<const std::string&>();
    std::optional<Community> community;
    for (std::size_t k = 0; k < known_labels; ++k) {
      if (labels[k] == label) community = kCommunities[k];
    }
    if (!community) {
      if (known_labels == 2) {
        throw Error(ErrorKind::kInvalidArgument,
                    "more than two community values (line " + std::to_string(line_no) +
                        ": '" + label + "')");
      }
      labels[known_labels] = label;
      community = kCommunities[known_labels];
      ++known_labels;
    }

    Document doc;
    doc.id = id;
    doc.text = text_it->get<std::string>();
    doc.community = *community;
    doc.tokens = Analyze(doc.text);
    seen_ids.emplace(std::move(id), true);
    ++report.counts[Index(doc.community)];
    docs.push_back(std::move(doc));
  }

  if (docs.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "corpus stream contains no valid records");
  }
  return {Corpus(std::move(labels), std::move(docs)), std::move(report)};
}

IngestResult IngestFile(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kMissingInput, "cannot open corpus file: " + path.string());
  return Ingest(in, schema);
}

}  // namespace bd

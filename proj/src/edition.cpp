#include "bd/edition.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "bd/error.hpp"
#include "bd/text.hpp"

namespace bd {
namespace {

struct Outcome {
  std::optional<DictionaryEntry> entry;
  std::optional<Erratum> erratum;
};

GenerationRequest MakeRequest(GenerationKind kind, const std::string& term,
                              std::vector<SampleSet> samples, const EditionSettings& s) {
  GenerationRequest r;
  r.kind = kind;
  r.term = term;
  r.samples = std::move(samples);
  r.model_id = s.model_id;
  r.seed = s.seed;
  return r;
}

Outcome BuildEntry(const CuratedTerm& term, const InvertedIndex& index, GenerationCache& cache,
                   LlmBackend& backend, const EditionSettings& s) {
  Outcome outcome;
  try {
    std::array<SampleSet, 2> sets = {
        SampleMatches(index, term.term, Community::kFirst, s.cap, s.seed),
        SampleMatches(index, term.term, Community::kSecond, s.cap, s.seed),
    };
    DictionaryEntry entry;
    entry.term = term;
    entry.stats_line = StatsLine(term.stats, s.names);
    const auto first = CachedGenerate(
        cache, backend, MakeRequest(GenerationKind::kSummary, term.term, {sets[0]}, s),
        s.generation);
    const auto second = CachedGenerate(
        cache, backend, MakeRequest(GenerationKind::kSummary, term.term, {sets[1]}, s),
        s.generation);
    const auto alternatives = CachedGenerate(
        cache, backend,
        MakeRequest(GenerationKind::kAlternatives, term.term, {sets[0], sets[1]}, s),
        s.generation);
    entry.summary_first = first.output;
    entry.summary_second = second.output;
    entry.alternatives = ParseAlternatives(alternatives.output);
    entry.provenance = {sets[0].doc_ids, sets[1].doc_ids};
    outcome.entry = std::move(entry);
  } catch (const std::exception& e) {
    outcome.erratum = Erratum{term.term, e.what()};
  }
  return outcome;
}

std::string MarkdownInline(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '*' || c == '_' || c == '`' || c == '[' || c == ']' || c == '\\' || c == '#') {
      out.push_back('\\');
    }
    out.push_back(c);
  }
  return out;
}

constexpr const char* kStyle = R"(body{font-family:Georgia,'Times New Roman',serif;max-width:46rem;margin:2rem auto;padding:0 1rem;color:#111;line-height:1.45}
header{border-bottom:2px solid #111;margin-bottom:1.5rem}
h1{font-size:2rem;margin:0 0 .5rem}
.meta{font-size:.85rem;color:#444}
.meta code{font-size:.8rem}
article.entry{margin:0 0 1.6rem;break-inside:avoid;page-break-inside:avoid}
h2.term{font-size:1.35rem;margin:0 0 .2rem}
p.stats{font-size:.85rem;color:#444;margin:0 0 .6rem}
h3{font-size:.95rem;margin:.6rem 0 .2rem;text-transform:uppercase;letter-spacing:.04em}
div.summary{white-space:pre-wrap}
ul.alternatives{margin:.2rem 0 0 1.2rem;padding:0}
section.errata{border-top:1px solid #999;margin-top:2rem;font-size:.9rem}
@media print{body{margin:0;max-width:none;font-size:10.5pt}header{break-after:avoid}a{color:inherit;text-decoration:none}@page{margin:18mm}}
)";

std::string RenderMarkdown(const PaperEdition& ed) {
  const auto& f = ed.front;
  std::ostringstream out;
  out << "# " << MarkdownInline(f.title) << "\n\n";
  if (!f.description.empty()) out << f.description << "\n\n";
  out << "- Generated: " << f.generated_at << "\n";
  out << "- Configuration digest: `" << f.config_digest << "`\n";
  out << "- Entries: " << ed.entries.size() << "\n\n";
  for (const auto& e : ed.entries) {
    out << "## " << e.term.term << "\n\n";
    out << "*" << e.stats_line << "*\n\n";
    for (auto c : kCommunities) {
      out << "### " << MarkdownInline(f.names[Index(c)]) << "\n\n";
      out << (c == Community::kFirst ? e.summary_first : e.summary_second) << "\n\n";
    }
    out << "### Alternatives\n\n";
    if (e.alternatives.empty()) out << "(none suggested)\n";
    for (const auto& a : e.alternatives) out << "- " << a << "\n";
    out << "\n";
  }
  if (!ed.errata.empty()) {
    out << "## Errata\n\n";
    for (const auto& er : ed.errata) {
      out << "- " << MarkdownInline(er.term) << ": " << MarkdownInline(er.reason) << "\n";
    }
    out << "\n";
  }
  return out.str();
}

std::string RenderHtml(const PaperEdition& ed) {
  using text::HtmlEscape;
  const auto& f = ed.front;
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>" << HtmlEscape(f.title) << "</title>\n<style>\n"
      << kStyle << "</style>\n</head>\n<body>\n<header>\n"
      << "<h1>" << HtmlEscape(f.title) << "</h1>\n";
  if (!f.description.empty()) out << "<p>" << HtmlEscape(f.description) << "</p>\n";
  out << "<p class=\"meta\">Generated " << HtmlEscape(f.generated_at)
      << " &middot; configuration <code>" << HtmlEscape(f.config_digest) << "</code>"
      << " &middot; " << ed.entries.size() << " entries</p>\n</header>\n<main>\n";
  for (const auto& e : ed.entries) {
    out << "<article class=\"entry\">\n"
        << "<h2 class=\"term\">" << HtmlEscape(e.term.term) << "</h2>\n"
        << "<p class=\"stats\">" << HtmlEscape(e.stats_line) << "</p>\n";
    for (auto c : kCommunities) {
      out << "<h3>" << HtmlEscape(f.names[Index(c)]) << "</h3>\n<div class=\"summary\">"
          << HtmlEscape(c == Community::kFirst ? e.summary_first : e.summary_second)
          << "</div>\n";
    }
    out << "<h3>Alternatives</h3>\n";
    if (e.alternatives.empty()) {
      out << "<p>(none suggested)</p>\n";
    } else {
      out << "<ul class=\"alternatives\">\n";
      for (const auto& a : e.alternatives) out << "<li>" << HtmlEscape(a) << "</li>\n";
      out << "</ul>\n";
    }
    out << "</article>\n";
  }
  out << "</main>\n";
  if (!ed.errata.empty()) {
    out << "<section class=\"errata\">\n<h2>Errata</h2>\n<ul>\n";
    for (const auto& er : ed.errata) {
      out << "<li><strong>" << HtmlEscape(er.term) << "</strong>: " << HtmlEscape(er.reason)
          << "</li>\n";
    }
    out << "</ul>\n</section>\n";
  }
  out << "</body>\n</html>\n";
  return out.str();
}

}  // namespace

std::string StatsLine(const TermStats& stats, const std::array<std::string, 2>& names) {
  std::string out;
  for (auto c : kCommunities) {
    const auto i = Index(c);
    if (!out.empty()) out += " | ";
    out += names[i] + ": " + text::FormatFixed(stats.rate_per_k[i], 1) + " per 1k docs";
    out += ", sentiment ";
    out += stats.sentiment_mean[i] ? text::FormatFixed(*stats.sentiment_mean[i], 2) : "n/a";
  }
  return out;
}

std::vector<std::string> ParseAlternatives(std::string_view output) {
  std::vector<std::string> out;
  std::istringstream in{std::string(output)};
  std::string line;
  while (std::getline(in, line)) {
    std::size_t i = line.find_first_not_of(" \t");
    if (i == std::string::npos) continue;
    if (line[i] == '-' || line[i] == '*') {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(line[i]))) {
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size() || (line[i] != '.' && line[i] != ')')) continue;
      ++i;
    } else {
      continue;
    }
    if (i >= line.size() || (line[i] != ' ' && line[i] != '\t')) continue;
    const auto b = line.find_first_not_of(" \t", i);
    const auto e = line.find_last_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::string item = line.substr(b, e - b + 1);
    if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(std::move(item));
  }
  return out;
}

PaperEdition Assemble(const std::vector<CuratedTerm>& curated, const InvertedIndex& index,
                      GenerationCache& cache, LlmBackend& backend,
                      const EditionSettings& settings) {
  if (curated.empty()) throw Error(ErrorKind::kInvalidArgument, "no curated terms to assemble");

  std::map<std::string, const CuratedTerm*> unique;
  for (const auto& t : curated) unique.emplace(t.term, &t);
  std::vector<const CuratedTerm*> order;
  for (const auto& [surface, t] : unique) order.push_back(t);

  BoundedBackend bounded(backend, settings.parallelism);
  std::vector<Outcome> outcomes(order.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      outcomes[i] = BuildEntry(*order[i], index, cache, bounded, settings);
    }
  };
  const auto n_threads = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(1, settings.parallelism)), 1, order.size());
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  PaperEdition ed;
  ed.front.title = settings.title;
  ed.front.description = settings.description;
  ed.front.generated_at = text::UtcTimestamp();
  ed.front.config_digest = settings.config_digest;
  ed.front.names = settings.names;
  for (auto& o : outcomes) {
    if (o.entry) ed.entries.push_back(std::move(*o.entry));
    if (o.erratum) {
      spdlog::warn("no entry for '{}': {}", o.erratum->term, o.erratum->reason);
      ed.errata.push_back(std::move(*o.erratum));
    }
  }
  if (ed.entries.empty()) {
    std::string msg = "generation failed for every term:";
    for (const auto& er : ed.errata) msg += "\n  " + er.term + ": " + er.reason;
    throw Error(ErrorKind::kGenerationFailure, msg);
  }
  return ed;
}

EditionFormat EditionFormatFromName(std::string_view name) {
  if (name == "markdown" || name == "md") return EditionFormat::kMarkdown;
  if (name == "html") return EditionFormat::kHtml;
  throw Error(ErrorKind::kInvalidArgument, "unknown format: " + std::string(name));
}

std::string Render(const PaperEdition& edition, EditionFormat format) {
  return format == EditionFormat::kHtml ? RenderHtml(edition) : RenderMarkdown(edition);
}

}  // namespace bd

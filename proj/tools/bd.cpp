#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "bd/config.hpp"
#include "bd/corpus.hpp"
#include "bd/curation.hpp"
#include "bd/edition.hpp"
#include "bd/error.hpp"
#include "bd/generation_cache.hpp"
#include "bd/index.hpp"
#include "bd/sentiment.hpp"
#include "bd/service.hpp"
#include "bd/text.hpp"

namespace fs = std::filesystem;

namespace {

// Turns leftover "--a.b=v" / "--a.b v" arguments into config overrides.
bd::Overrides ParseOverrides(const std::vector<std::string>& extras) {
  bd::Overrides out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const auto& arg = extras[i];
    if (!arg.starts_with("--") || arg.find('.') == std::string::npos) {
      throw bd::Error(bd::ErrorKind::kInvalidArgument, "unexpected argument: " + arg);
    }
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      out[arg.substr(2, eq - 2)] = arg.substr(eq + 1);
    } else if (i + 1 < extras.size()) {
      out[arg.substr(2)] = extras[++i];
    } else {
      throw bd::Error(bd::ErrorKind::kInvalidArgument, "missing value for " + arg);
    }
  }
  return out;
}

void CheckFresh(const bd::AppConfig& cfg, const bd::InvertedIndex& index) {
  if (cfg.corpus_path.empty() || !fs::exists(cfg.corpus_path)) return;
  if (bd::text::Sha256File(cfg.corpus_path) != index.source_hash()) {
    throw bd::Error(bd::ErrorKind::kCorruptArtifact,
                    "snapshot " + cfg.paths.index.string() + " is stale: " +
                        cfg.corpus_path.string() + " changed since ingest; rerun bd ingest");
  }
}

bd::InvertedIndex LoadIndex(const bd::AppConfig& cfg) {
  auto index = bd::InvertedIndex::Load(cfg.paths.index);
  CheckFresh(cfg, index);
  return index;
}

int Ingest(const bd::AppConfig& cfg) {
  if (cfg.corpus_path.empty()) {
    throw bd::Error(bd::ErrorKind::kMissingInput, "corpus.path is not configured");
  }
  if (!fs::exists(cfg.corpus_path)) {
    throw bd::Error(bd::ErrorKind::kMissingInput,
                    "corpus file not found: " + cfg.corpus_path.string());
  }
  if (cfg.lexicon_path.empty()) {
    throw bd::Error(bd::ErrorKind::kMissingInput, "sentiment.lexicon_path is not configured");
  }
  const auto lexicon = bd::LoadLexiconFile(cfg.lexicon_path);
  for (const auto& w : lexicon.warnings()) spdlog::warn("lexicon: {}", w);

  const std::string source_hash = bd::text::Sha256File(cfg.corpus_path);
  auto ingested = bd::IngestFile(cfg.corpus_path, cfg.schema);
  const auto& report = ingested.report;
  const auto labels = ingested.corpus.labels();
  const auto index = bd::InvertedIndex::Build(std::move(ingested.corpus), cfg.n_max, lexicon);
  index.Save(cfg.paths.index, source_hash);

  fmt::print("lines read       {}\n", report.lines);
  fmt::print("skipped          {}\n", report.skipped);
  for (const auto& reason : report.skip_reasons) fmt::print("  {}\n", reason);
  for (auto c : bd::kCommunities) {
    fmt::print("documents [{}]    {} ({}, label {})\n", bd::Slot(c), report.counts[bd::Index(c)],
               cfg.names[bd::Index(c)], labels[bd::Index(c)]);
  }
  fmt::print("distinct terms   {}\n", index.terms().size());
  fmt::print("snapshot         {}\n", cfg.paths.index.string());
  fmt::print("snapshot sha256  {}\n", bd::text::Sha256File(cfg.paths.index));
  return 0;
}

int Curate(const bd::AppConfig& cfg) {
  const auto index = LoadIndex(cfg);
  const auto curated = bd::Curate(index, cfg.curation);
  if (cfg.paths.curated.has_parent_path()) fs::create_directories(cfg.paths.curated.parent_path());
  {
    std::ofstream out(cfg.paths.curated, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + cfg.paths.curated.string());
    bd::WriteCuratedTerms(out, curated);
  }
  if (curated.empty()) {
    spdlog::warn("no term passed the curation thresholds");
  }
  fmt::print("curated terms    {}\n", curated.size());
  fmt::print("written to       {}\n", cfg.paths.curated.string());
  const std::size_t preview = std::min<std::size_t>(10, curated.size());
  if (preview > 0) fmt::print("{:<28} {:>9} {:>9} {:>10}\n", "term", "freq_z", "sent_gap", "trigger");
  for (std::size_t i = 0; i < preview; ++i) {
    const auto& t = curated[i];
    fmt::print("{:<28} {:>9.3f} {:>9} {:>10}\n", t.term, t.score.freq_z,
               t.score.sent_gap ? fmt::format("{:.3f}", *t.score.sent_gap) : "-",
               bd::TriggerName(t.score.trigger));
  }
  return 0;
}

int Paper(const bd::AppConfig& cfg) {
  if (!fs::exists(cfg.paths.curated)) {
    throw bd::Error(bd::ErrorKind::kMissingInput,
                    "curated terms not found: " + cfg.paths.curated.string() + " (run bd curate)");
  }
  const auto curated = bd::ReadCuratedTermsFile(cfg.paths.curated);
  const auto index = LoadIndex(cfg);
  const auto templates = bd::LoadTemplates(cfg);
  bd::GenerationCache cache(cfg.paths.cache);
  auto backend = bd::BackendFromEnvironment(std::chrono::milliseconds(cfg.rag.timeout_ms));
  const auto edition = bd::Assemble(curated, index, cache, *backend,
                                    cfg.Edition(templates, index.corpus().labels()));
  fs::create_directories(cfg.paths.output);
  for (const auto& [format, name] : {std::pair{bd::EditionFormat::kMarkdown, "bridging-dictionary.md"},
                                     std::pair{bd::EditionFormat::kHtml, "bridging-dictionary.html"}}) {
    const auto path = cfg.paths.output / name;
    std::ofstream out(path, std::ios::binary);
    out << bd::Render(edition, format);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fmt::print("wrote            {}\n", path.string());
  }
  fmt::print("entries          {}\n", edition.entries.size());
  if (!edition.errata.empty()) {
    fmt::print("errata           {}\n", edition.errata.size());
    for (const auto& e : edition.errata) fmt::print("  {}: {}\n", e.term, e.reason);
  }
  return 0;
}

int Serve(const bd::AppConfig& cfg) {
  auto index = LoadIndex(cfg);
  auto curated = bd::CuratedForService(cfg, index);
  const auto templates = bd::LoadTemplates(cfg);
  bd::GenerationCache cache(cfg.paths.cache);
  auto backend = bd::BackendFromEnvironment(std::chrono::milliseconds(cfg.rag.timeout_ms));
  bd::Service service(cfg, std::move(index), std::move(curated), cache, *backend, templates);
  bd::RunServer(service);
  return 0;
}

std::string Cell(const std::optional<double>& v, int decimals) {
  return v ? bd::text::FormatFixed(*v, decimals) : "n/a";
}

int Query(const bd::AppConfig& cfg, const std::string& term) {
  const auto index = LoadIndex(cfg);
  const auto stats = bd::ComputeTermStats(index, term);
  const auto view = bd::Compare(stats);
  fmt::print("term: {}\n\n", stats.term);
  fmt::print("{:<22} {:>8} {:>10} {:>8} {:>10}\n", "community", "docs", "per 1k", "share",
             "sentiment");
  for (auto c : bd::kCommunities) {
    const auto i = bd::Index(c);
    const std::string label = fmt::format("[{}] {}", bd::Slot(c), cfg.names[i]);
    const std::optional<double> share =
        stats.share ? std::optional<double>((*stats.share)[i]) : std::nullopt;
    fmt::print("{:<22} {:>8} {:>10} {:>8} {:>10}\n", label, stats.doc_count[i],
               bd::text::FormatFixed(stats.rate_per_k[i], 1), Cell(share, 3),
               Cell(stats.sentiment_mean[i], 2));
  }
  auto leader = [&](bd::Leader l) {
    switch (l) {
      case bd::Leader::kFirst: return cfg.names[0];
      case bd::Leader::kSecond: return cfg.names[1];
      case bd::Leader::kTie: return std::string("tie");
      case bd::Leader::kUndefined: break;
    }
    return std::string("undefined");
  };
  fmt::print("\nhigher rate:      {} (delta {})\n", leader(view.higher_rate),
             bd::text::FormatFixed(view.rate_delta, 1));
  fmt::print("higher sentiment: {} (delta {})\n", leader(view.higher_sentiment),
             Cell(view.sentiment_delta, 2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("bd"));
  spdlog::set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");

  CLI::App app{"Bridging dictionary: corpus divergence analytics"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("-c,--config", config_path, "TOML configuration file (default: $BD_CONFIG, ./bd.toml)");
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto* ingest = app.add_subcommand("ingest", "Read the corpus and write the index snapshot");
  auto* curate = app.add_subcommand("curate", "Select divergent terms into the curated file");
  auto* paper = app.add_subcommand("paper", "Render the printable dictionary (markdown and HTML)");
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  auto* query = app.add_subcommand("query", "Print statistics for one term");
  std::string term;
  query->add_option("term", term, "Word or phrase")->required();
  for (auto* sub : {ingest, curate, paper, serve, query}) sub->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    auto* active = app.get_subcommands().front();
    const auto overrides = ParseOverrides(active->remaining());
    const auto cfg = bd::LoadConfig(
        bd::ResolveConfigPath(config_path ? std::optional<fs::path>(*config_path) : std::nullopt),
        overrides);
    if (active == ingest) return Ingest(cfg);
    if (active == curate) return Curate(cfg);
    if (active == paper) return Paper(cfg);
    if (active == serve) return Serve(cfg);
    return Query(cfg, term);
  } catch (const bd::Error& e) {
    spdlog::error("{}", e.what());
    return bd::ExitCode(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

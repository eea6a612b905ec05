#include <gtest/gtest.h>

#include <regex>

#include "bd/config.hpp"
#include "bd/edition.hpp"
#include "bd/error.hpp"
#include "support.hpp"

namespace {

bd::EditionSettings Settings() {
  bd::EditionSettings s;
  s.title = "Test Edition";
  s.description = "fixture";
  s.config_digest = "0123456789abcdef";
  s.names = {"Republican", "Democrat"};
  s.generation.templates = bd::DefaultTemplates();
  s.generation.prompt.blocked = {"Republican", "Democrat", "community_r", "community_d"};
  s.generation.initial_backoff = std::chrono::milliseconds(0);
  return s;
}

class FailingFor : public bd::LlmBackend {
 public:
  explicit FailingFor(std::string needle) : needle_(std::move(needle)) {}
  std::string id() const override { return "failing"; }
  std::string Complete(const std::string& prompt, const std::string& model, uint64_t seed) override {
    if (needle_.empty() || prompt.find(needle_) != std::string::npos) {
      throw std::runtime_error("HTTP 400: refused");
    }
    return stub_.Complete(prompt, model, seed);
  }

 private:
  std::string needle_;
  bd::StubBackend stub_;
};

std::size_t Count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Edition, AssembleAlphabeticalAndStable) {
  const auto curated = bd::Curate(bdtest::FixtureIndex(), {});
  ASSERT_EQ(curated.size(), 3u);
  bd::StubBackend stub;
  bd::GenerationCache c1(":memory:"), c2(":memory:");
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  const auto a = bd::Assemble(curated, bdtest::FixtureIndex(), c1, stub, Settings());
  const auto b = bd::Assemble(curated, bdtest::FixtureIndex(), c2, stub, Settings());
  ASSERT_EQ(a.entries.size(), 3u);
  EXPECT_EQ(a.entries[0].term.term, "climate crisis");
  EXPECT_EQ(a.entries[1].term.term, "illegal aliens");
  EXPECT_EQ(a.entries[2].term.term, "police");
  EXPECT_EQ(a.front.generated_at, "2023-11-14T22:13:20Z");
  for (auto f : {bd::EditionFormat::kMarkdown, bd::EditionFormat::kHtml}) {
    EXPECT_EQ(bd::Render(a, f), bd::Render(b, f));
  }
  for (const auto& e : a.entries) {
    EXPECT_FALSE(e.summary_first.empty());
    EXPECT_FALSE(e.summary_second.empty());
    EXPECT_FALSE(e.alternatives.empty());
    EXPECT_EQ(e.stats_line, bd::StatsLine(e.term.stats, {"Republican", "Democrat"}));
  }
}

TEST(Edition, DuplicatesCollapse) {
  auto curated = bd::Curate(bdtest::FixtureIndex(), {});
  curated.push_back(curated[0]);
  bd::StubBackend stub;
  bd::GenerationCache cache(":memory:");
  EXPECT_EQ(bd::Assemble(curated, bdtest::FixtureIndex(), cache, stub, Settings()).entries.size(), 3u);
}

TEST(Edition, PartialFailureGoesToErrata) {
  const auto curated = bd::Curate(bdtest::FixtureIndex(), {});
  FailingFor backend("\"police\"");
  bd::GenerationCache cache(":memory:");
  const auto ed = bd::Assemble(curated, bdtest::FixtureIndex(), cache, backend, Settings());
  EXPECT_EQ(ed.entries.size(), 2u);
  ASSERT_EQ(ed.errata.size(), 1u);
  EXPECT_EQ(ed.errata[0].term, "police");
  EXPECT_NE(bd::Render(ed, bd::EditionFormat::kMarkdown).find("police"), std::string::npos);
}

TEST(Edition, TotalFailureAndEmptyInput) {
  const auto curated = bd::Curate(bdtest::FixtureIndex(), {});
  FailingFor backend("");
  bd::GenerationCache cache(":memory:");
  try {
    bd::Assemble(curated, bdtest::FixtureIndex(), cache, backend, Settings());
    FAIL();
  } catch (const bd::Error& e) {
    EXPECT_EQ(e.kind(), bd::ErrorKind::kGenerationFailure);
    EXPECT_NE(std::string(e.what()).find("illegal aliens"), std::string::npos);
  }
  bd::StubBackend stub;
  try {
    bd::Assemble({}, bdtest::FixtureIndex(), cache, stub, Settings());
    FAIL();
  } catch (const bd::Error& e) {
    EXPECT_EQ(e.kind(), bd::ErrorKind::kInvalidArgument);
  }
}

TEST(Render, EscapingAndHeadings) {
  bd::PaperEdition ed;
  ed.front = {"T & <T>", "d", "2024-01-01T00:00:00Z", "abc", {"A", "B"}};
  bd::DictionaryEntry e;
  e.term.term = "<b>bold</b> & co";
  e.summary_first = "first *summary*\nline two";
  e.summary_second = "second";
  e.alternatives = {"alt one"};
  e.stats_line = "A: 1.0 per 1k docs";
  ed.entries.push_back(e);
  const auto html = bd::Render(ed, bd::EditionFormat::kHtml);
  EXPECT_NE(html.find("&lt;b&gt;bold&lt;/b&gt; &amp; co"), std::string::npos);
  EXPECT_EQ(html.find("<b>bold"), std::string::npos);
  EXPECT_EQ(Count(html, "<h2 class=\"term\">"), 1u);
  EXPECT_NE(html.find("@media print"), std::string::npos);
  EXPECT_EQ(html.find("<link"), std::string::npos);
  EXPECT_EQ(html.find("<script"), std::string::npos);
  EXPECT_FALSE(std::regex_search(html, std::regex("src=\"http")));

  const auto md = bd::Render(ed, bd::EditionFormat::kMarkdown);
  EXPECT_NE(md.find("first *summary*\nline two"), std::string::npos);
  EXPECT_NE(md.find("<b>bold</b> & co"), std::string::npos);
  EXPECT_NE(md.find("alt one"), std::string::npos);
}

TEST(Render, FormatNames) {
  EXPECT_EQ(bd::EditionFormatFromName("markdown"), bd::EditionFormat::kMarkdown);
  EXPECT_EQ(bd::EditionFormatFromName("md"), bd::EditionFormat::kMarkdown);
  EXPECT_EQ(bd::EditionFormatFromName("html"), bd::EditionFormat::kHtml);
  EXPECT_THROW(bd::EditionFormatFromName("pdf"), bd::Error);
}

TEST(Alternatives, Parse) {
  EXPECT_EQ(bd::ParseAlternatives("Here:\n- one\n* two\n3. three\n4) four\n- one\nplain"),
            (std::vector<std::string>{"one", "two", "three", "four"}));
}

TEST(StatsLine, AbsentSentiment) {
  bd::TermStats s;
  s.rate_per_k = {1.5, 0.0};
  s.sentiment_mean = {0.25, std::nullopt};
  const auto line = bd::StatsLine(s, {"A", "B"});
  EXPECT_NE(line.find("1.5"), std::string::npos);
  EXPECT_NE(line.find("n/a"), std::string::npos);
}

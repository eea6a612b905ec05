#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "bd/corpus.hpp"
#include "bd/error.hpp"
#include "bd/text.hpp"
#include "support.hpp"

using bd::Analyze;
using bd::ExtractNgrams;
using bd::Normalize;
using bd::Tokenize;
using Tokens = std::vector<std::string>;

TEST(Normalize, Empty) { EXPECT_EQ(Normalize(""), ""); }

TEST(Normalize, CaseAndWhitespace) {
  EXPECT_EQ(Normalize("Climate CHANGE  now"), "climate change now");
  EXPECT_EQ(Normalize("  \t a \n\n b  "), "a b");
}

TEST(Normalize, MentionHashtagUrlGolden) {
  EXPECT_EQ(Normalize("@potus #ClimateChange https://t.co/x"), "<user> climatechange <url>");
}

TEST(Normalize, UrlForms) {
  EXPECT_EQ(Normalize("see http://example.com/a?b=1 and www.example.org"), "see <url> and <url>");
}

TEST(Normalize, UnicodeSimpleCaseFolding) {
  EXPECT_EQ(Normalize("ÉCOLE Straße ΑΘΗΝΑ"), "école straße αθηνα");
}

TEST(Normalize, Idempotent) {
  const std::vector<std::string> inputs = {
      "@potus #ClimateChange https://t.co/x", "Don't  STOP!!", "#a#b @x@y", "ÀÉÎ  ÕÜ",
      "<url> <user> #<url>", "   ", "mixed\tTabs\nand\r\nlines", "www.x.org/path #Tag"};
  for (const auto& s : inputs) {
    const auto once = Normalize(s);
    EXPECT_EQ(Normalize(once), once) << s;
  }
}

TEST(Normalize, IdempotentOnRandomStrings) {
  const std::string alphabet = "aZ #@:/._-!'  \tHTtpsw<>Éé";
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const int len = static_cast<int>(rng() % 40);
    for (int k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
    if (!bd::text::IsValidUtf8(s)) continue;
    const auto once = Normalize(s);
    ASSERT_EQ(Normalize(once), once) << s;
  }
}

TEST(Tokenize, Rules) {
  EXPECT_EQ(Tokenize(""), Tokens{});
  EXPECT_EQ(Tokenize("climate change!"), (Tokens{"climate", "change"}));
  EXPECT_EQ(Tokenize("don't stop"), (Tokens{"don't", "stop"}));
  EXPECT_EQ(Tokenize("-- ... !!"), Tokens{});
  EXPECT_EQ(Tokenize("<user> \"quoted,\" <url>"), (Tokens{"<user>", "quoted", "<url>"}));
}

TEST(ExtractNgrams, Enumeration) {
  EXPECT_EQ(ExtractNgrams({"a", "b", "c"}, 2), (Tokens{"a", "b", "c", "a b", "b c"}));
  EXPECT_EQ(ExtractNgrams({}, 3), Tokens{});
  EXPECT_EQ(ExtractNgrams({"a", "<url>", "b"}, 2), (Tokens{"a", "<url>", "b"}));
  EXPECT_THROW(ExtractNgrams({"a"}, 0), bd::Error);
}

TEST(ExtractNgrams, CountFormula) {
  for (int m = 0; m <= 7; ++m) {
    Tokens tokens;
    for (int i = 0; i < m; ++i) tokens.push_back("t" + std::to_string(i));
    EXPECT_EQ(ExtractNgrams(tokens, 1).size(), tokens.size());
    for (int k = 1; k <= 4; ++k) {
      std::size_t expected = 0;
      for (int n = 1; n <= k; ++n) expected += static_cast<std::size_t>(std::max(0, m - n + 1));
      EXPECT_EQ(ExtractNgrams(tokens, k).size(), expected) << m << " " << k;
    }
  }
}

TEST(ExtractNgrams, SurfaceRoundTrip) {
  for (const auto& g : ExtractNgrams(Analyze("one two three four"), 3)) {
    EXPECT_EQ(bd::JoinTokens(bd::SplitSurface(g), 0, bd::SplitSurface(g).size()), g);
  }
}

TEST(Ingest, CountsPerCommunity) {
  std::istringstream in(bdtest::Record("1", "a", "x") + bdtest::Record("2", "b", "y") +
                        bdtest::Record("3", "c", "x") + bdtest::Record("4", "d", "y"));
  const auto r = bd::Ingest(in);
  EXPECT_EQ(r.corpus.counts()[0], 2u);
  EXPECT_EQ(r.corpus.counts()[1], 2u);
  EXPECT_EQ(r.report.skipped, 0u);
  EXPECT_EQ(r.corpus.labels()[0], "x");
  EXPECT_EQ(r.corpus.doc(2).id, "3");
}

TEST(Ingest, MalformedRecordsSkipped) {
  std::istringstream in(bdtest::Record("1", "a", "x") + "{\"id\":\"2\",\"community\":\"y\"}\n" +
                        "not json\n" + std::string("{\"id\":\"3\",\"text\":\"\xff\",\"community\":\"y\"}\n") +
                        bdtest::Record("4", "b", "y"));
  const auto r = bd::Ingest(in);
  EXPECT_EQ(r.report.skipped, 3u);
  EXPECT_EQ(r.report.lines, 5u);
  EXPECT_EQ(r.corpus.size(), 2u);
}

TEST(Ingest, MissingTextCountsOneSkip) {
  std::istringstream in(bdtest::Record("1", "a", "x") + "{\"id\":\"2\",\"community\":\"y\"}\n" +
                        bdtest::Record("3", "b", "y"));
  EXPECT_EQ(bd::Ingest(in).report.skipped, 1u);
}

TEST(Ingest, ThirdCommunityIsFatal) {
  std::istringstream in(bdtest::Record("1", "a", "x") + bdtest::Record("2", "b", "y") +
                        bdtest::Record("3", "c", "z"));
  EXPECT_THROW(bd::Ingest(in), bd::Error);
}

TEST(Ingest, EmptyStreamIsFatal) {
  std::istringstream in("");
  EXPECT_THROW(bd::Ingest(in), bd::Error);
}

TEST(Ingest, ConfiguredLabelsFixPositions) {
  std::istringstream in(bdtest::Record("1", "a", "y") + bdtest::Record("2", "b", "x"));
  bd::Schema schema;
  schema.labels = std::array<std::string, 2>{"x", "y"};
  const auto r = bd::Ingest(in, schema);
  EXPECT_EQ(r.corpus.doc(0).community, bd::Community::kSecond);
  EXPECT_EQ(r.corpus.doc(1).community, bd::Community::kFirst);
}

TEST(Ingest, RemappedFields) {
  std::istringstream in("{\"tid\":\"7\",\"body\":\"Hi\",\"party\":\"x\"}\n"
                        "{\"tid\":\"8\",\"body\":\"Yo\",\"party\":\"y\"}\n");
  bd::Schema schema;
  schema.id_field = "tid";
  schema.text_field = "body";
  schema.community_field = "party";
  const auto r = bd::Ingest(in, schema);
  EXPECT_EQ(r.corpus.size(), 2u);
  EXPECT_EQ(r.corpus.doc(0).id, "7");
}

TEST(Ingest, TokensAreDerived) {
  std::istringstream in(bdtest::Record("1", "Hello @you #World", "x") + bdtest::Record("2", "b", "y"));
  const auto r = bd::Ingest(in);
  EXPECT_EQ(r.corpus.doc(0).tokens, (Tokens{"hello", "<user>", "world"}));
}

TEST(Ingest, FixtureCounts) {
  const auto r = bd::IngestFile(bdtest::FixtureCorpus());
  EXPECT_EQ(r.corpus.counts()[0], 2000u);
  EXPECT_EQ(r.corpus.counts()[1], 2000u);
  EXPECT_EQ(r.report.skipped, 0u);
}

TEST(Ingest, OrderStable) {
  const auto a = bd::IngestFile(bdtest::FixtureCorpus());
  const auto b = bd::IngestFile(bdtest::FixtureCorpus());
  EXPECT_EQ(a.corpus.ContentHash(), b.corpus.ContentHash());
}

TEST(Ingest, MissingFile) {
  try {
    bd::IngestFile("/nonexistent/corpus.jsonl");
    FAIL();
  } catch (const bd::Error& e) {
    EXPECT_EQ(e.kind(), bd::ErrorKind::kMissingInput);
  }
}

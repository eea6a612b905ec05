#include <gtest/gtest.h>

#include <random>

#include "bd/error.hpp"
#include "bd/index.hpp"
#include "bd/text.hpp"
#include "support.hpp"

using bdtest::Record;

namespace {

std::string Repeat(const std::string& text, const std::string& community, int n, int offset = 0) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    out += Record(community + std::to_string(offset + i), text, community);
  }
  return out;
}

}  // namespace

TEST(Index, TinyEnumeration) {
  const auto index = bdtest::IndexFromJsonl(Record("1", "a b", "x") + Record("2", "a b", "y"), 2);
  EXPECT_EQ(index.terms(), (std::vector<std::string>{"a", "a b", "b"}));
  for (const auto& t : index.terms()) {
    const auto* p = index.Lookup(t);
    ASSERT_NE(p, nullptr);
    EXPECT_EQ((*p)[0].size(), 1u);
    EXPECT_EQ((*p)[1].size(), 1u);
  }
}

TEST(Index, RepeatedTermPostedOnce) {
  const auto index = bdtest::IndexFromJsonl(Record("1", "go go go", "x") + Record("2", "b", "y"));
  EXPECT_EQ((*index.Lookup("go"))[0], bd::PostingList{0});
  EXPECT_EQ((*index.Lookup("go go"))[0], bd::PostingList{0});
}

TEST(Index, EmptyCommunityIsFatal) {
  EXPECT_THROW(bdtest::IndexFromJsonl(Record("1", "a", "x") + Record("2", "b", "x")), bd::Error);
}

TEST(Index, SentimentCached) {
  const auto index = bdtest::IndexFromJsonl(Record("1", "not good", "x") + Record("2", "great", "y"));
  EXPECT_DOUBLE_EQ(index.sentiment(0), -0.6);
  EXPECT_DOUBLE_EQ(index.sentiment(1), 0.8);
}

TEST(Index, FixtureTotals) {
  EXPECT_EQ(bdtest::FixtureIndex().totals()[0], 2000u);
  EXPECT_EQ(bdtest::FixtureIndex().totals()[1], 2000u);
}

TEST(Index, PostingsStrictlySorted) {
  const auto& index = bdtest::FixtureIndex();
  for (std::size_t t = 0; t < index.terms().size(); t += 37) {
    for (auto c : bd::kCommunities) {
      const auto& list = index.postings(t)[bd::Index(c)];
      for (std::size_t i = 1; i < list.size(); ++i) ASSERT_LT(list[i - 1], list[i]);
      for (auto d : list) ASSERT_EQ(index.corpus().doc(d).community, c);
    }
  }
}

TEST(Stats, AbsentTerm) {
  const auto s = bd::ComputeTermStats(bdtest::FixtureIndex(), "zzzqqq");
  EXPECT_EQ(s.rate_per_k[0], 0.0);
  EXPECT_EQ(s.rate_per_k[1], 0.0);
  EXPECT_FALSE(s.share.has_value());
  EXPECT_FALSE(s.sentiment_mean[0].has_value());
  EXPECT_FALSE(s.sentiment_mean[1].has_value());
}

TEST(Stats, RateAndShare) {
  const auto index = bdtest::IndexFromJsonl(Repeat("t", "x", 3) + Repeat("u", "x", 197, 3) +
                                            Repeat("t", "y", 6) + Repeat("u", "y", 194, 6));
  const auto s = bd::ComputeTermStats(index, "T!");
  EXPECT_EQ(s.term, "t");
  EXPECT_EQ(s.rate_per_k[0], 15.0);
  EXPECT_EQ(s.rate_per_k[1], 30.0);
  ASSERT_TRUE(s.share.has_value());
  EXPECT_DOUBLE_EQ((*s.share)[0], 1.0 / 3.0);
  EXPECT_NEAR((*s.share)[0] + (*s.share)[1], 1.0, 1e-12);
}

TEST(Stats, ShareFortySixty) {
  const auto index = bdtest::IndexFromJsonl(Repeat("t", "x", 40) + Repeat("t", "y", 60));
  const auto s = bd::ComputeTermStats(index, "t");
  EXPECT_DOUBLE_EQ((*s.share)[0], 0.4);
  EXPECT_DOUBLE_EQ((*s.share)[1], 0.6);
}

TEST(Stats, FilibusterRate) {
  const auto s = bd::ComputeTermStats(bdtest::FixtureIndex(), "filibuster");
  EXPECT_EQ(s.doc_count[0], 3u);
  EXPECT_EQ(s.rate_per_k[0], 1.5);
  EXPECT_EQ(s.doc_count[1], 0u);
  EXPECT_FALSE(s.sentiment_mean[1].has_value());
}

TEST(Stats, EmptyQuery) {
  try {
    bd::ComputeTermStats(bdtest::FixtureIndex(), " !! ");
    FAIL();
  } catch (const bd::Error& e) {
    EXPECT_STREQ(e.what(), "empty query");
  }
}

TEST(Stats, SentimentMeanOverMatches) {
  const auto index = bdtest::IndexFromJsonl(Record("1", "tax good", "x") + Record("2", "tax bad bad", "x") +
                                            Record("3", "other great", "x") + Record("4", "tax", "y"));
  const auto s = bd::ComputeTermStats(index, "tax");
  EXPECT_DOUBLE_EQ(*s.sentiment_mean[0], 0.0);
  EXPECT_DOUBLE_EQ(*s.sentiment_mean[1], 0.0);
}

TEST(Stats, LongPhraseVerifiedPositionally) {
  const auto index = bdtest::IndexFromJsonl(
      Record("1", "a b c d e", "x") + Record("2", "a b c x d e", "x") + Record("3", "d e a b c", "x") +
          Record("4", "b c d e a", "y"),
      2);
  EXPECT_EQ(bd::ComputeTermStats(index, "a b c d").doc_count[0], 1u);
  EXPECT_EQ(bd::ComputeTermStats(index, "b c d e").doc_count[1], 1u);
  EXPECT_EQ(bd::ComputeTermStats(index, "e a b").doc_count[0], 1u);
}

TEST(Stats, DuplicatingCorpusKeepsRates) {
  std::string once, twice;
  const std::vector<std::string> texts = {"a b", "b c", "a", "c a b", "b"};
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const std::string comm = i % 2 ? "y" : "x";
    once += Record(std::to_string(i), texts[i], comm);
    twice += Record(std::to_string(i), texts[i], comm) + Record("d" + std::to_string(i), texts[i], comm);
  }
  const auto a = bdtest::IndexFromJsonl(once);
  const auto b = bdtest::IndexFromJsonl(twice);
  for (const auto* q : {"a", "b", "a b", "c a"}) {
    const auto sa = bd::ComputeTermStats(a, q);
    const auto sb = bd::ComputeTermStats(b, q);
    EXPECT_DOUBLE_EQ(sa.rate_per_k[0], sb.rate_per_k[0]) << q;
    EXPECT_DOUBLE_EQ(sa.rate_per_k[1], sb.rate_per_k[1]) << q;
  }
}

TEST(Stats, AddingMatchingDocNeverDecreases) {
  std::string jsonl = Record("0", "a", "x") + Record("1", "b", "y");
  double rate = bd::ComputeTermStats(bdtest::IndexFromJsonl(jsonl), "a").rate_per_k[0];
  for (int i = 2; i < 12; ++i) {
    jsonl += Record(std::to_string(i), "z a", "x");
    const double next = bd::ComputeTermStats(bdtest::IndexFromJsonl(jsonl), "a").rate_per_k[0];
    EXPECT_GE(next, rate);
    rate = next;
  }
}

TEST(Compare, Examples) {
  bd::TermStats s;
  s.rate_per_k = {15.0, 15.0};
  auto v = bd::Compare(s);
  EXPECT_EQ(v.higher_rate, bd::Leader::kTie);
  EXPECT_EQ(v.rate_delta, 0.0);
  s.rate_per_k = {20.0, 5.0};
  v = bd::Compare(s);
  EXPECT_EQ(v.higher_rate, bd::Leader::kFirst);
  EXPECT_EQ(v.rate_delta, 15.0);
  s.sentiment_mean = {std::nullopt, 0.3};
  EXPECT_EQ(bd::Compare(s).higher_sentiment, bd::Leader::kUndefined);
  EXPECT_FALSE(bd::Compare(s).sentiment_delta.has_value());
  s.sentiment_mean = {-0.1, 0.3};
  EXPECT_EQ(bd::Compare(s).higher_sentiment, bd::Leader::kSecond);
  EXPECT_NEAR(*bd::Compare(s).sentiment_delta, -0.4, 1e-15);
}

TEST(Snapshot, RoundTrip) {
  bdtest::TempDir dir;
  const auto path = dir.path() / "index.bin";
  const auto& index = bdtest::FixtureIndex();
  index.Save(path, "abc");
  const auto loaded = bd::InvertedIndex::Load(path);
  EXPECT_EQ(loaded.source_hash(), "abc");
  EXPECT_EQ(loaded.terms(), index.terms());
  EXPECT_EQ(loaded.corpus().ContentHash(), index.corpus().ContentHash());
  EXPECT_EQ(loaded.lexicon_digest(), index.lexicon_digest());
  for (const auto* q : {"police", "climate crisis", "economy"}) {
    const auto a = bd::ComputeTermStats(index, q);
    const auto b = bd::ComputeTermStats(loaded, q);
    EXPECT_EQ(a.doc_count, b.doc_count);
    EXPECT_EQ(a.sentiment_mean, b.sentiment_mean);
  }
  const auto second = dir.path() / "again.bin";
  loaded.Save(second, "abc");
  EXPECT_EQ(bd::text::Sha256File(path), bd::text::Sha256File(second));
}

TEST(Snapshot, CorruptionDetected) {
  bdtest::TempDir dir;
  const auto path = dir.path() / "index.bin";
  bdtest::IndexFromJsonl(Record("1", "a b", "x") + Record("2", "c", "y")).Save(path, "h");
  auto bytes = bdtest::ReadFile(path);

  auto expect_corrupt = [&](const std::string& content) {
    bdtest::WriteFile(path, content);
    try {
      bd::InvertedIndex::Load(path);
      ADD_FAILURE();
    } catch (const bd::Error& e) {
      EXPECT_EQ(e.kind(), bd::ErrorKind::kCorruptArtifact);
    }
  };
  auto flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x5a;
  expect_corrupt(flipped);
  expect_corrupt(bytes.substr(0, bytes.size() - 3));
  expect_corrupt("garbage");
  auto version = bytes;
  version[8] ^= 0x7f;
  expect_corrupt(version);
}

TEST(Snapshot, Missing) {
  try {
    bd::InvertedIndex::Load("/nonexistent/index.bin");
    FAIL();
  } catch (const bd::Error& e) {
    EXPECT_EQ(e.kind(), bd::ErrorKind::kMissingInput);
  }
}

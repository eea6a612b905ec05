#include <gtest/gtest.h>

#include <cstdlib>

#include "bd/config.hpp"
#include "bd/error.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

bd::ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const bd::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return bd::ErrorKind::kInvalidArgument;
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = bd::LoadConfig(std::nullopt);
  EXPECT_EQ(cfg.curation.min_docs, 20u);
  EXPECT_EQ(cfg.curation.freq_z_threshold, 3.0);
  EXPECT_EQ(cfg.curation.sent_gap_threshold, 0.35);
  EXPECT_EQ(cfg.curation.sent_min_docs, 30u);
  EXPECT_EQ(cfg.curation.prior_alpha, 0.5);
  EXPECT_TRUE(cfg.curation.subsumption_filter);
  EXPECT_EQ(cfg.n_max, 3);
  EXPECT_EQ(cfg.rag.cap, 50u);
  EXPECT_EQ(cfg.rag.model_id, "gpt-3.5-turbo");
  EXPECT_EQ(cfg.rag.parallelism, 4);
  EXPECT_EQ(cfg.rag.timeout_ms, 30000);
  EXPECT_EQ(cfg.scatter.dim, 256);
  EXPECT_EQ(cfg.scatter.cluster.eps, 0.15);
  EXPECT_EQ(cfg.scatter.cluster.min_pts, 4);
}

TEST(Config, RepositoryFile) {
  const auto cfg = bd::LoadConfig(bdtest::SourceDir() / "bd.toml");
  EXPECT_EQ(cfg.names[0], "Republican");
  EXPECT_EQ(cfg.names[1], "Democrat");
  ASSERT_TRUE(cfg.schema.labels.has_value());
  EXPECT_EQ((*cfg.schema.labels)[0], "community_r");
  EXPECT_EQ(cfg.corpus_path, bdtest::FixtureCorpus().lexically_normal());
  EXPECT_TRUE(fs::exists(cfg.lexicon_path));
  EXPECT_TRUE(fs::exists(cfg.paths.templates));
}

TEST(Config, OverridesWin) {
  const auto cfg = bd::LoadConfig(bdtest::SourceDir() / "bd.toml",
                                  {{"curation.min_docs", "15"},
                                   {"rag.model_id", "other-model"},
                                   {"communities.names", "Left,Right"},
                                   {"curation.subsumption_filter", "false"},
                                   {"server.port", "0"}});
  EXPECT_EQ(cfg.curation.min_docs, 15u);
  EXPECT_EQ(cfg.rag.model_id, "other-model");
  EXPECT_EQ(cfg.names[0], "Left");
  EXPECT_FALSE(cfg.curation.subsumption_filter);
  EXPECT_EQ(cfg.server.port, 0);
}

TEST(Config, RejectsBadInput) {
  EXPECT_EQ(KindOf([] { bd::LoadConfig(std::nullopt, {{"curation.min_dcos", "3"}}); }),
            bd::ErrorKind::kInvalidArgument);
  EXPECT_EQ(KindOf([] { bd::LoadConfig(std::nullopt, {{"curation.min_docs", "many"}}); }),
            bd::ErrorKind::kInvalidArgument);
  EXPECT_EQ(KindOf([] { bd::LoadConfig(std::nullopt, {{"curation.min_docs", "0"}}); }),
            bd::ErrorKind::kInvalidArgument);
  EXPECT_EQ(KindOf([] { bd::LoadConfig(std::nullopt, {{"communities.names", "OnlyOne"}}); }),
            bd::ErrorKind::kInvalidArgument);
  EXPECT_EQ(KindOf([] { bd::LoadConfig(fs::path("/nonexistent/bd.toml")); }),
            bd::ErrorKind::kMissingInput);

  bdtest::TempDir dir;
  bdtest::WriteFile(dir.path() / "a.toml", "[curation]\nmin_docs = 3\nbogus = 1\n");
  EXPECT_EQ(KindOf([&] { bd::LoadConfig(dir.path() / "a.toml"); }), bd::ErrorKind::kInvalidArgument);
  bdtest::WriteFile(dir.path() / "b.toml", "[curation\n");
  EXPECT_EQ(KindOf([&] { bd::LoadConfig(dir.path() / "b.toml"); }), bd::ErrorKind::kInvalidArgument);
}

TEST(Config, RelativePathsFollowTheFile) {
  bdtest::TempDir dir;
  fs::create_directories(dir.path() / "conf");
  bdtest::WriteFile(dir.path() / "conf" / "x.toml",
                    "[corpus]\npath = \"../data/c.jsonl\"\n[paths]\nindex = \"out/i.bin\"\n");
  const auto cfg = bd::LoadConfig(dir.path() / "conf" / "x.toml");
  EXPECT_EQ(cfg.corpus_path, (dir.path() / "data" / "c.jsonl").lexically_normal());
  EXPECT_EQ(cfg.paths.index, (dir.path() / "conf" / "out" / "i.bin").lexically_normal());
}

TEST(Config, DigestTracksContentSettingsOnly) {
  const auto base = bd::LoadConfig(std::nullopt);
  EXPECT_EQ(base.Digest().size(), 16u);
  EXPECT_EQ(base.Digest(), bd::LoadConfig(std::nullopt, {{"paths.output", "/elsewhere"}}).Digest());
  EXPECT_EQ(base.Digest(), bd::LoadConfig(std::nullopt, {{"server.port", "9"}}).Digest());
  EXPECT_NE(base.Digest(), bd::LoadConfig(std::nullopt, {{"curation.min_docs", "21"}}).Digest());
  EXPECT_NE(base.Digest(), bd::LoadConfig(std::nullopt, {{"rag.seed", "1"}}).Digest());
}

TEST(Config, ResolvePath) {
  EXPECT_EQ(bd::ResolveConfigPath(fs::path("x.toml")), fs::path("x.toml"));
  ::setenv("BD_CONFIG", "/tmp/from-env.toml", 1);
  EXPECT_EQ(bd::ResolveConfigPath(std::nullopt), fs::path("/tmp/from-env.toml"));
  ::unsetenv("BD_CONFIG");
}

TEST(Config, BlockedIdentifiers) {
  const auto blocked = bd::BlockedIdentifiers({"Republican", "Democrat"}, {"community_r", "community_d"});
  EXPECT_EQ(blocked.size(), 4u);
}

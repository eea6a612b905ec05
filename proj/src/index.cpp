#include "bd/index.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "bd/error.hpp"
#include "bd/text.hpp"

namespace bd {
namespace {

constexpr char kMagic[8] = {'B', 'D', 'S', 'N', 'A', 'P', '\0', '\n'};

class Writer {
 public:
  void U8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) U8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) U8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<uint64_t>(v)); }
  void Str(std::string_view s) {
    U64(s.size());
    buf_.append(s);
  }
  void Raw(std::string_view s) { buf_.append(s); }
  std::string& buffer() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  uint8_t U8() {
    Need(1);
    return static_cast<uint8_t>(data_[pos_++]);
  }
  uint32_t U32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(U8()) << (8 * i);
    return v;
  }
  uint64_t U64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(U8()) << (8 * i);
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Str() {
    const uint64_t n = U64();
    Need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view Raw(std::size_t n) {
    Need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void Need(uint64_t n) const {
    if (n > data_.size() - pos_) Corrupt("truncated snapshot");
  }
  [[noreturn]] static void Corrupt(const std::string& why) {
    throw Error(ErrorKind::kCorruptArtifact, why);
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

[[noreturn]] void Corrupt(const std::string& why) { throw Error(ErrorKind::kCorruptArtifact, why); }

PostingList Intersect(const PostingList& a, const PostingList& b) {
  PostingList out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool ContainsRun(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
  if (needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

}  // namespace

InvertedIndex InvertedIndex::Build(Corpus corpus, int n_max, const SentimentLexicon& lexicon) {
  if (n_max < 1) throw Error(ErrorKind::kInvalidArgument, "n_max must be >= 1");
  for (auto c : kCommunities) {
    if (corpus.counts()[Index(c)] == 0) {
      throw Error(ErrorKind::kInvalidArgument,
                  "community " + std::to_string(Slot(c)) + " has no documents");
    }
  }

  InvertedIndex index;
  index.n_max_ = n_max;
  index.lexicon_digest_ = lexicon.Digest();

  std::unordered_map<std::string, uint32_t> ids;
  std::vector<std::string> surfaces;
  std::vector<Postings> postings;
  const auto& docs = corpus.documents();
  index.sentiment_.resize(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto ordinal = static_cast<DocOrdinal>(d);
    index.sentiment_[d] = ScoreTokens(docs[d].tokens, lexicon);
    auto grams = ExtractNgrams(docs[d].tokens, n_max);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) {
      auto [it, inserted] = ids.try_emplace(g, static_cast<uint32_t>(surfaces.size()));
      if (inserted) {
        surfaces.push_back(std::move(g));
        postings.emplace_back();
      }
      postings[it->second][Index(docs[d].community)].push_back(ordinal);
    }
  }

  std::vector<uint32_t> order(surfaces.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](uint32_t a, uint32_t b) { return surfaces[a] < surfaces[b]; });
  index.terms_.reserve(order.size());
  index.postings_.reserve(order.size());
  for (uint32_t id : order) {
    index.terms_.push_back(std::move(surfaces[id]));
    index.postings_.push_back(std::move(postings[id]));
  }
  index.corpus_ = std::move(corpus);
  return index;
}

const Postings* InvertedIndex::Lookup(std::string_view surface) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), surface,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == terms_.end() || *it != surface) return nullptr;
  return &postings_[static_cast<std::size_t>(it - terms_.begin())];
}

Postings InvertedIndex::Match(const std::vector<std::string>& tokens) const {
  if (tokens.empty()) return {};
  const bool has_sentinel = std::any_of(tokens.begin(), tokens.end(),
                                        [](const std::string& t) { return IsSentinel(t); });
  if (tokens.size() <= static_cast<std::size_t>(n_max_) && (tokens.size() == 1 || !has_sentinel)) {
    const Postings* p = Lookup(JoinTokens(tokens, 0, tokens.size()));
    return p == nullptr ? Postings{} : *p;
  }

  // Candidate documents contain every token; then verify contiguity.
  std::vector<std::string> distinct(tokens);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  Postings out;
  for (auto c : kCommunities) {
    PostingList candidates;
    bool first = true;
    for (const auto& tok : distinct) {
      const Postings* p = Lookup(tok);
      if (p == nullptr) return {};
      candidates = first ? (*p)[Index(c)] : Intersect(candidates, (*p)[Index(c)]);
      first = false;
      if (candidates.empty()) break;
    }
    for (DocOrdinal d : candidates) {
      if (ContainsRun(corpus_.doc(d).tokens, tokens)) out[Index(c)].push_back(d);
    }
  }
  return out;
}

void InvertedIndex::Save(const std::filesystem::path& path, const std::string& source_hash) const {
  Writer w;
  w.Raw(std::string_view(kMagic, sizeof(kMagic)));
  w.U32(kSnapshotVersion);
  w.Str(source_hash);
  w.Str(corpus_.ContentHash());
  w.Str(lexicon_digest_);
  w.U32(static_cast<uint32_t>(n_max_));
  w.Str(corpus_.labels()[0]);
  w.Str(corpus_.labels()[1]);
  w.U64(corpus_.size());
  for (std::size_t d = 0; d < corpus_.size(); ++d) {
    const auto& doc = corpus_.doc(static_cast<DocOrdinal>(d));
    w.Str(doc.id);
    w.Str(doc.text);
    w.U8(static_cast<uint8_t>(Index(doc.community)));
    w.F64(sentiment_[d]);
  }
  w.U64(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    w.Str(terms_[t]);
    for (const auto& list : postings_[t]) {
      w.U64(list.size());
      for (DocOrdinal d : list) w.U32(d);
    }
  }
  const std::string checksum = text::Sha256Hex(w.buffer());
  w.Raw(checksum);

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kMissingInput, "cannot write snapshot: " + tmp.string());
    out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
    if (!out) throw Error(ErrorKind::kMissingInput, "short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

InvertedIndex InvertedIndex::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kMissingInput, "cannot open index snapshot: " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  constexpr std::size_t kChecksumLen = 64;
  if (data.size() < sizeof(kMagic) + 4 + kChecksumLen ||
      std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    Corrupt("not an index snapshot: " + path.string());
  }
  const std::string_view body(data.data(), data.size() - kChecksumLen);
  Reader r(body);
  r.Raw(sizeof(kMagic));
  const uint32_t version = r.U32();
  if (version != kSnapshotVersion) {
    Corrupt("snapshot version " + std::to_string(version) + " does not match expected " +
            std::to_string(kSnapshotVersion) + "; rebuild with 'bd ingest'");
  }
  if (text::Sha256Hex(body) != std::string_view(data).substr(body.size())) {
    Corrupt("snapshot checksum mismatch: " + path.string());
  }

  InvertedIndex index;
  index.source_hash_ = r.Str();
  const std::string content_hash = r.Str();
  index.lexicon_digest_ = r.Str();
  index.n_max_ = static_cast<int>(r.U32());
  if (index.n_max_ < 1) Corrupt("snapshot n_max is invalid");
  std::array<std::string, 2> labels;
  labels[0] = r.Str();
  labels[1] = r.Str();
  const uint64_t ndocs = r.U64();
  std::vector<Document> docs;
  docs.reserve(ndocs);
  index.sentiment_.reserve(ndocs);
  for (uint64_t d = 0; d < ndocs; ++d) {
    Document doc;
    doc.id = r.Str();
    doc.text = r.Str();
    const uint8_t slot = r.U8();
    if (slot > 1) Corrupt("snapshot document has invalid community");
    doc.community = kCommunities[slot];
    doc.tokens = Analyze(doc.text);
    docs.push_back(std::move(doc));
    index.sentiment_.push_back(r.F64());
  }
  index.corpus_ = Corpus(std::move(labels), std::move(docs));
  if (index.corpus_.ContentHash() != content_hash) Corrupt("snapshot corpus hash mismatch");

  const uint64_t nterms = r.U64();
  index.terms_.reserve(nterms);
  index.postings_.reserve(nterms);
  for (uint64_t t = 0; t < nterms; ++t) {
    index.terms_.push_back(r.Str());
    if (t > 0 && !(index.terms_[t - 1] < index.terms_[t])) Corrupt("snapshot terms out of order");
    Postings p;
    for (auto c : kCommunities) {
      const uint64_t n = r.U64();
      auto& list = p[Index(c)];
      list.reserve(n);
      for (uint64_t k = 0; k < n; ++k) {
        const DocOrdinal d = r.U32();
        if (d >= ndocs || (!list.empty() && d <= list.back()) ||
            index.corpus_.doc(d).community != c) {
          Corrupt("snapshot posting list is invalid");
        }
        list.push_back(d);
      }
    }
    index.postings_.push_back(std::move(p));
  }
  if (!r.done()) Corrupt("trailing bytes in snapshot");
  return index;
}

TermStats StatsFromPostings(const InvertedIndex& index, std::string term, const Postings& postings) {
  TermStats s;
  s.term = std::move(term);
  const auto& totals = index.totals();
  for (auto c : kCommunities) {
    const auto i = Index(c);
    s.doc_count[i] = postings[i].size();
    s.rate_per_k[i] = totals[i] == 0 ? 0.0
                                     : 1000.0 * static_cast<double>(s.doc_count[i]) /
                                           static_cast<double>(totals[i]);
    if (!postings[i].empty()) {
      double sum = 0.0;
      for (DocOrdinal d : postings[i]) sum += index.sentiment(d);
      s.sentiment_mean[i] = sum / static_cast<double>(postings[i].size());
    }
  }
  const std::size_t both = s.doc_count[0] + s.doc_count[1];
  if (both > 0) {
    const double a = static_cast<double>(s.doc_count[0]) / static_cast<double>(both);
    s.share = std::array<double, 2>{a, 1.0 - a};
  }
  return s;
}

TermStats ComputeTermStats(const InvertedIndex& index, std::string_view phrase) {
  auto tokens = Analyze(phrase);
  if (tokens.empty()) throw Error(ErrorKind::kInvalidArgument, "empty query");
  const Postings postings = index.Match(tokens);
  return StatsFromPostings(index, JoinTokens(tokens, 0, tokens.size()), postings);
}

namespace {

Leader LeaderOf(double delta) {
  if (delta > 0) return Leader::kFirst;
  if (delta < 0) return Leader::kSecond;
  return Leader::kTie;
}

}  // namespace

ComparativeView Compare(const TermStats& stats) {
  ComparativeView v;
  v.rate_delta = stats.rate_per_k[0] - stats.rate_per_k[1];
  v.higher_rate = LeaderOf(v.rate_delta);
  if (stats.sentiment_mean[0] && stats.sentiment_mean[1]) {
    v.sentiment_delta = *stats.sentiment_mean[0] - *stats.sentiment_mean[1];
    v.higher_sentiment = LeaderOf(*v.sentiment_delta);
  }
  return v;
}

std::string LeaderName(Leader leader) {
  switch (leader) {
    case Leader::kFirst: return "1";
    case Leader::kSecond: return "2";
    case Leader::kTie: return "tie";
    case Leader::kUndefined: return "undefined";
  }
  return "undefined";
}

}  // namespace bd

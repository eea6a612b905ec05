#include "bd/config.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include "bd/error.hpp"
#include "bd/text.hpp"
#include "toml.hpp"

namespace bd {
namespace {

namespace fs = std::filesystem;

constexpr const char* kDefaultTemplates =
#include "default_templates.inc"
    ;

[[noreturn]] void Bad(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::kInvalidArgument, "config " + key + ": " + why);
}

std::vector<std::string> SplitList(const std::string& raw) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

// Typed lookups over the TOML table with overrides taking precedence. Every
// key asked for is remembered so leftovers can be reported as unknown.
class Source {
 public:
  Source(toml::table table, fs::path file_dir, const Overrides& overrides)
      : table_(std::move(table)), file_dir_(std::move(file_dir)), overrides_(overrides) {}

  std::optional<std::string> Str(const std::string& key) {
    known_.insert(key);
    if (auto it = overrides_.find(key); it != overrides_.end()) return it->second;
    auto node = table_.at_path(key);
    if (!node) return std::nullopt;
    if (auto v = node.value_exact<std::string>()) return *v;
    Bad(key, "expected a string");
  }

  std::optional<int64_t> Int(const std::string& key) {
    known_.insert(key);
    if (auto it = overrides_.find(key); it != overrides_.end()) {
      int64_t v = 0;
      const auto& s = it->second;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) Bad(key, "expected an integer");
      return v;
    }
    auto node = table_.at_path(key);
    if (!node) return std::nullopt;
    if (auto v = node.value_exact<int64_t>()) return *v;
    Bad(key, "expected an integer");
  }

  std::optional<double> Real(const std::string& key) {
    known_.insert(key);
    if (auto it = overrides_.find(key); it != overrides_.end()) {
      const auto& s = it->second;
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size()) Bad(key, "expected a number");
      return v;
    }
    auto node = table_.at_path(key);
    if (!node) return std::nullopt;
    if (auto v = node.value_exact<double>()) return *v;
    if (auto v = node.value_exact<int64_t>()) return static_cast<double>(*v);
    Bad(key, "expected a number");
  }

  std::optional<bool> Flag(const std::string& key) {
    known_.insert(key);
    if (auto it = overrides_.find(key); it != overrides_.end()) {
      if (it->second == "true") return true;
      if (it->second == "false") return false;
      Bad(key, "expected true or false");
    }
    auto node = table_.at_path(key);
    if (!node) return std::nullopt;
    if (auto v = node.value_exact<bool>()) return *v;
    Bad(key, "expected true or false");
  }

  std::optional<fs::path> Path(const std::string& key) {
    known_.insert(key);
    if (auto it = overrides_.find(key); it != overrides_.end()) {
      if (it->second.empty()) return fs::path();
      return fs::absolute(it->second).lexically_normal();
    }
    auto node = table_.at_path(key);
    if (!node) return std::nullopt;
    auto v = node.value_exact<std::string>();
    if (!v) Bad(key, "expected a path string");
    if (v->empty()) return fs::path();
    fs::path p(*v);
    return (p.is_absolute() ? p : file_dir_ / p).lexically_normal();
  }

  std::optional<std::array<std::string, 2>> Pair(const std::string& key) {
    known_.insert(key);
    std::vector<std::string> items;
    if (auto it = overrides_.find(key); it != overrides_.end()) {
      items = SplitList(it->second);
    } else {
      auto node = table_.at_path(key);
      if (!node) return std::nullopt;
      const auto* arr = node.as_array();
      if (arr == nullptr) Bad(key, "expected an array of two strings");
      for (const auto& el : *arr) {
        auto s = el.value_exact<std::string>();
        if (!s) Bad(key, "expected an array of two strings");
        items.push_back(*s);
      }
    }
    if (items.size() != 2) Bad(key, "expected exactly two entries");
    if (items[0].empty() || items[1].empty()) Bad(key, "entries must be nonempty");
    if (items[0] == items[1]) Bad(key, "entries must differ");
    return std::array<std::string, 2>{items[0], items[1]};
  }

  void RejectUnknown() const {
    for (const auto& [key, value] : overrides_) {
      if (!known_.contains(key)) Bad(key, "unknown key");
    }
    std::function<void(const toml::table&, const std::string&)> walk =
        [&](const toml::table& t, const std::string& prefix) {
          for (const auto& [k, node] : t) {
            const std::string key = prefix + std::string(k.str());
            if (const auto* sub = node.as_table()) {
              walk(*sub, key + ".");
            } else if (!known_.contains(key)) {
              Bad(key, "unknown key");
            }
          }
        };
    walk(table_, "");
  }

 private:
  toml::table table_;
  fs::path file_dir_;
  const Overrides& overrides_;
  std::set<std::string> known_;
};

template <typename T>
void Assign(T& field, const std::optional<T>& v) {
  if (v) field = *v;
}

int NarrowInt(const std::string& key, std::optional<int64_t> v, int64_t lo, int64_t hi, int fallback) {
  if (!v) return fallback;
  if (*v < lo || *v > hi) {
    Bad(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(*v);
}

std::size_t NarrowSize(const std::string& key, std::optional<int64_t> v, int64_t lo,
                       std::size_t fallback) {
  if (!v) return fallback;
  if (*v < lo) Bad(key, "must be >= " + std::to_string(lo));
  return static_cast<std::size_t>(*v);
}

}  // namespace

std::optional<fs::path> ResolveConfigPath(const std::optional<fs::path>& explicit_path) {
  if (explicit_path) return explicit_path;
  if (const char* env = std::getenv("BD_CONFIG"); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  if (fs::exists("bd.toml")) return fs::path("bd.toml");
  return std::nullopt;
}

AppConfig LoadConfig(const std::optional<fs::path>& file, const Overrides& overrides) {
  toml::table table;
  fs::path dir = fs::current_path();
  AppConfig c;
  if (file) {
    if (!fs::exists(*file)) {
      throw Error(ErrorKind::kMissingInput, "config file not found: " + file->string());
    }
    try {
      table = toml::parse_file(file->string());
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << "config " << file->string() << ": " << e.description() << " at line "
          << e.source().begin.line;
      throw Error(ErrorKind::kInvalidArgument, msg.str());
    }
    c.source = fs::absolute(*file).lexically_normal();
    dir = c.source.parent_path();
  }
  Source src(std::move(table), dir, overrides);

  Assign(c.corpus_path, src.Path("corpus.path"));
  Assign(c.schema.id_field, src.Str("corpus.id_field"));
  Assign(c.schema.text_field, src.Str("corpus.text_field"));
  Assign(c.schema.community_field, src.Str("corpus.community_field"));
  if (auto labels = src.Pair("corpus.labels")) c.schema.labels = *labels;
  Assign(c.names, src.Pair("communities.names"));
  Assign(c.title, src.Str("dataset.title"));
  Assign(c.description, src.Str("dataset.description"));
  Assign(c.lexicon_path, src.Path("sentiment.lexicon_path"));
  c.n_max = NarrowInt("index.n_max", src.Int("index.n_max"), 1, 8, c.n_max);

  auto& cur = c.curation;
  Assign(cur.min_rate_per_k, src.Real("curation.min_rate_per_k"));
  cur.min_docs = NarrowSize("curation.min_docs", src.Int("curation.min_docs"), 0, cur.min_docs);
  Assign(cur.freq_z_threshold, src.Real("curation.freq_z_threshold"));
  Assign(cur.sent_gap_threshold, src.Real("curation.sent_gap_threshold"));
  cur.sent_min_docs =
      NarrowSize("curation.sent_min_docs", src.Int("curation.sent_min_docs"), 0, cur.sent_min_docs);
  Assign(cur.prior_alpha, src.Real("curation.prior_alpha"));
  cur.n_max = NarrowInt("curation.n_max", src.Int("curation.n_max"), 1, 8, c.n_max);
  if (auto m = src.Int("curation.max_terms")) {
    cur.max_terms = NarrowSize("curation.max_terms", m, 1, 0);
  }
  Assign(cur.subsumption_filter, src.Flag("curation.subsumption_filter"));
  cur.Validate();

  auto& rag = c.rag;
  rag.cap = NarrowSize("rag.cap", src.Int("rag.cap"), 1, rag.cap);
  Assign(rag.model_id, src.Str("rag.model_id"));
  if (auto seed = src.Int("rag.seed")) {
    if (*seed < 0) Bad("rag.seed", "must be >= 0");
    rag.seed = static_cast<uint64_t>(*seed);
  }
  rag.parallelism = NarrowInt("rag.parallelism", src.Int("rag.parallelism"), 1, 256, rag.parallelism);
  rag.timeout_ms =
      NarrowInt("rag.timeout_ms", src.Int("rag.timeout_ms"), 1, 3'600'000, rag.timeout_ms);
  rag.max_retries = NarrowInt("rag.max_retries", src.Int("rag.max_retries"), 0, 10, rag.max_retries);
  rag.backoff_ms = NarrowInt("rag.backoff_ms", src.Int("rag.backoff_ms"), 0, 60'000, rag.backoff_ms);
  rag.sample_chars = NarrowSize("rag.sample_chars", src.Int("rag.sample_chars"), 1, rag.sample_chars);
  rag.budget_chars = NarrowSize("rag.budget_chars", src.Int("rag.budget_chars"), 1, rag.budget_chars);

  auto& sc = c.scatter;
  sc.dim = NarrowInt("scatter.dim", src.Int("scatter.dim"), 2, 1 << 16, sc.dim);
  Assign(sc.cluster.eps, src.Real("scatter.eps"));
  if (!(sc.cluster.eps > 0.0)) Bad("scatter.eps", "must be > 0");
  sc.cluster.min_pts = NarrowInt("scatter.min_pts", src.Int("scatter.min_pts"), 1, 1 << 20,
                                 sc.cluster.min_pts);

  auto& sv = c.server;
  Assign(sv.bind, src.Str("server.bind"));
  sv.port = NarrowInt("server.port", src.Int("server.port"), 0, 65535, sv.port);
  Assign(sv.cors_origin, src.Str("server.cors_origin"));
  Assign(sv.static_dir, src.Path("server.static_dir"));

  auto& p = c.paths;
  const fs::path artifacts = dir / "bd-artifacts";
  p.index = src.Path("paths.index").value_or(artifacts / "index.bdsnap");
  p.cache = src.Path("paths.cache").value_or(artifacts / "generations.sqlite");
  p.curated = src.Path("paths.curated").value_or(artifacts / "curated.jsonl");
  p.output = src.Path("paths.output").value_or(artifacts / "edition");
  Assign(p.templates, src.Path("paths.templates"));

  src.RejectUnknown();
  if (c.names[0] == c.names[1]) Bad("communities.names", "entries must differ");
  return c;
}

std::string AppConfig::Digest() const {
  const nlohmann::json j = {
      {"curation", ToJson(curation)},
      {"n_max", n_max},
      {"names", names},
      {"title", title},
      {"description", description},
      {"rag",
       {{"cap", rag.cap},
        {"model_id", rag.model_id},
        {"seed", rag.seed},
        {"sample_chars", rag.sample_chars},
        {"budget_chars", rag.budget_chars}}},
  };
  return text::Sha256Hex(j.dump()).substr(0, 16);
}

GenerationSettings AppConfig::Generation(const PromptTemplates& templates,
                                         const std::array<std::string, 2>& labels) const {
  GenerationSettings g;
  g.templates = templates;
  g.prompt.sample_chars = rag.sample_chars;
  g.prompt.budget_chars = rag.budget_chars;
  g.prompt.blocked = BlockedIdentifiers(names, labels);
  g.max_retries = rag.max_retries;
  g.initial_backoff = std::chrono::milliseconds(rag.backoff_ms);
  return g;
}

EditionSettings AppConfig::Edition(const PromptTemplates& templates,
                                   const std::array<std::string, 2>& labels) const {
  EditionSettings e;
  e.title = title;
  e.description = description;
  e.config_digest = Digest();
  e.names = names;
  e.cap = rag.cap;
  e.model_id = rag.model_id;
  e.seed = rag.seed;
  e.parallelism = rag.parallelism;
  e.generation = Generation(templates, labels);
  return e;
}

std::vector<std::string> BlockedIdentifiers(const std::array<std::string, 2>& names,
                                            const std::array<std::string, 2>& labels) {
  std::vector<std::string> out;
  for (const auto* group : {&names, &labels}) {
    for (const auto& s : *group) {
      if (!s.empty() && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
  }
  return out;
}

PromptTemplates DefaultTemplates() {
  std::istringstream in(kDefaultTemplates);
  return PromptTemplates::Parse(in);
}

PromptTemplates LoadTemplates(const AppConfig& config) {
  return config.paths.templates.empty() ? DefaultTemplates()
                                        : PromptTemplates::LoadFile(config.paths.templates);
}

}  // namespace bd

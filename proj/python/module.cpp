#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "bd/corpus.hpp"
#include "bd/curation.hpp"
#include "bd/error.hpp"
#include "bd/index.hpp"
#include "bd/rag.hpp"
#include "bd/scatter.hpp"
#include "bd/sentiment.hpp"

namespace py = pybind11;

namespace {

bd::Community CommunityArg(int slot) {
  auto c = bd::CommunityFromSlot(slot);
  if (!c) throw py::value_error("community must be 1 or 2");
  return *c;
}

py::dict StatsDict(const bd::TermStats& s) {
  py::dict d;
  d["term"] = s.term;
  d["doc_count"] = py::make_tuple(s.doc_count[0], s.doc_count[1]);
  d["rate_per_k"] = py::make_tuple(s.rate_per_k[0], s.rate_per_k[1]);
  d["share"] = s.share ? py::object(py::make_tuple((*s.share)[0], (*s.share)[1])) : py::none();
  d["sentiment_mean"] = py::make_tuple(s.sentiment_mean[0], s.sentiment_mean[1]);
  return d;
}

bd::CurationConfig CurationFromKwargs(const py::kwargs& kw) {
  bd::CurationConfig c;
  for (auto [key, value] : kw) {
    const auto k = key.cast<std::string>();
    if (k == "min_rate_per_k") c.min_rate_per_k = value.cast<double>();
    else if (k == "min_docs") c.min_docs = value.cast<std::size_t>();
    else if (k == "freq_z_threshold") c.freq_z_threshold = value.cast<double>();
    else if (k == "sent_gap_threshold") c.sent_gap_threshold = value.cast<double>();
    else if (k == "sent_min_docs") c.sent_min_docs = value.cast<std::size_t>();
    else if (k == "prior_alpha") c.prior_alpha = value.cast<double>();
    else if (k == "n_max") c.n_max = value.cast<int>();
    else if (k == "max_terms") c.max_terms = value.is_none() ? std::nullopt : std::optional(value.cast<std::size_t>());
    else if (k == "subsumption_filter") c.subsumption_filter = value.cast<bool>();
    else throw py::type_error("unknown curation option: " + k);
  }
  c.Validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_bridging, m) {
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const bd::Error& e) {
      switch (e.kind()) {
        case bd::ErrorKind::kMissingInput: PyErr_SetString(PyExc_FileNotFoundError, e.what()); return;
        case bd::ErrorKind::kInvalidArgument: PyErr_SetString(PyExc_ValueError, e.what()); return;
        default: PyErr_SetString(PyExc_RuntimeError, e.what()); return;
      }
    }
  });

  m.def("normalize", [](const std::string& s) { return bd::Normalize(s); });
  m.def("tokenize", [](const std::string& s) { return bd::Tokenize(s); });
  m.def("analyze", [](const std::string& s) { return bd::Analyze(s); });
  m.def("ngrams", &bd::ExtractNgrams, py::arg("tokens"), py::arg("n_max"));
  m.def("log_odds_z", &bd::LogOddsZ, py::arg("y1"), py::arg("n1"), py::arg("y2"), py::arg("n2"),
        py::arg("alpha") = 0.5);

  py::class_<bd::SentimentLexicon>(m, "Lexicon")
      .def_static("load", &bd::LoadLexiconFile, py::arg("path"))
      .def_static("parse",
                  [](const std::string& text) {
                    std::istringstream in(text);
                    return bd::LoadLexicon(in);
                  })
      .def("__len__", &bd::SentimentLexicon::size)
      .def_property_readonly("digest", &bd::SentimentLexicon::Digest)
      .def("score", [](const bd::SentimentLexicon& lex, const std::string& text) {
        return bd::ScoreTokens(bd::Analyze(text), lex);
      });

  py::class_<bd::InvertedIndex>(m, "Index")
      .def_static(
          "build",
          [](const std::filesystem::path& corpus, const bd::SentimentLexicon& lexicon, int n_max,
             std::optional<std::array<std::string, 2>> labels) {
            bd::Schema schema;
            schema.labels = std::move(labels);
            py::gil_scoped_release release;
            return bd::InvertedIndex::Build(bd::IngestFile(corpus, schema).corpus, n_max, lexicon);
          },
          py::arg("corpus"), py::arg("lexicon"), py::arg("n_max") = 3, py::arg("labels") = py::none())
      .def_static("load", &bd::InvertedIndex::Load, py::arg("path"))
      .def("save", &bd::InvertedIndex::Save, py::arg("path"), py::arg("source_hash") = "")
      .def_property_readonly("n_max", &bd::InvertedIndex::n_max)
      .def_property_readonly("totals", &bd::InvertedIndex::totals)
      .def_property_readonly("labels", [](const bd::InvertedIndex& i) { return i.corpus().labels(); })
      .def("__len__", [](const bd::InvertedIndex& i) { return i.terms().size(); })
      .def("stats", [](const bd::InvertedIndex& i, const std::string& term) {
        return StatsDict(bd::ComputeTermStats(i, term));
      })
      .def("curate",
           [](const bd::InvertedIndex& i, const py::kwargs& kw) {
             const auto config = CurationFromKwargs(kw);
             std::vector<bd::CuratedTerm> terms;
             {
               py::gil_scoped_release release;
               terms = bd::Curate(i, config);
             }
             py::list out;
             for (const auto& t : terms) {
               py::dict d;
               d["term"] = t.term;
               d["freq_z"] = t.score.freq_z;
               d["sent_gap"] = t.score.sent_gap;
               d["trigger"] = bd::TriggerName(t.score.trigger);
               d["rank_key"] = t.rank_key;
               d["stats"] = StatsDict(t.stats);
               out.append(std::move(d));
             }
             return out;
           })
      .def(
          "sample",
          [](const bd::InvertedIndex& i, const std::string& term, int community, std::size_t cap,
             uint64_t seed) {
            const auto s = bd::SampleMatches(i, term, CommunityArg(community), cap, seed);
            return py::make_tuple(s.doc_ids, s.texts);
          },
          py::arg("term"), py::arg("community"), py::arg("cap") = 50, py::arg("seed") = 0);

  m.def("project_2d", &bd::Project2d, py::arg("vectors"));
  m.def(
      "cluster",
      [](const std::vector<bd::Point2>& points, double eps, int min_pts) {
        return bd::Cluster(points, {eps, min_pts});
      },
      py::arg("points"), py::arg("eps") = 0.15, py::arg("min_pts") = 4);
  m.def(
      "embed",
      [](const std::vector<std::string>& texts, int dim) { return bd::HashedTfidfEmbedder(dim).Embed(texts); },
      py::arg("texts"), py::arg("dim") = 256);
}

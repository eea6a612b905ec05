#include "bd/scatter.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>

#include "bd/error.hpp"
#include "bd/rag.hpp"
#include "bd/text.hpp"

namespace bd {

HashedTfidfEmbedder::HashedTfidfEmbedder(int dim) : dim_(dim) {
  if (dim < 2) throw Error(ErrorKind::kInvalidArgument, "embedding dimension must be >= 2");
}

std::string HashedTfidfEmbedder::id() const {
  return "hashed-tfidf-" + std::to_string(dim_);
}

std::vector<std::string> HashedTfidfEmbedder::Features(const std::string& text) {
  std::vector<std::string> kept;
  for (auto& tok : Analyze(text)) {
    if (IsSentinel(tok) || text::IsStopword(tok)) continue;
    kept.push_back(std::move(tok));
  }
  std::vector<std::string> features = kept;
  for (std::size_t i = 0; i + 1 < kept.size(); ++i) features.push_back(kept[i] + " " + kept[i + 1]);
  return features;
}

std::vector<Embedding> HashedTfidfEmbedder::Embed(const std::vector<std::string>& texts) const {
  if (texts.empty()) throw Error(ErrorKind::kInvalidArgument, "nothing to embed");
  std::vector<std::map<std::string, int>> tf(texts.size());
  std::unordered_map<std::string, int> df;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (auto& f : Features(texts[i])) ++tf[i][std::move(f)];
    for (const auto& [f, n] : tf[i]) ++df[f];
  }
  const double n_docs = static_cast<double>(texts.size());
  std::vector<Embedding> out(texts.size(), Embedding(static_cast<std::size_t>(dim_), 0.0));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto& v = out[i];
    for (const auto& [f, count] : tf[i]) {
      const double idf = std::log((1.0 + n_docs) / (1.0 + df[f])) + 1.0;
      const uint64_t h = text::Fnv1a64(f);
      const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
      v[h % static_cast<uint64_t>(dim_)] += sign * count * idf;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& x : v) x /= norm;
    }
  }
  return out;
}

std::vector<Point2> Project2d(const std::vector<Embedding>& vectors) {
  if (vectors.size() < 3) {
    throw Error(ErrorKind::kInvalidArgument, "projection needs at least 3 vectors");
  }
  const auto n = static_cast<Eigen::Index>(vectors.size());
  const auto d = static_cast<Eigen::Index>(vectors.front().size());
  if (d < 1) throw Error(ErrorKind::kInvalidArgument, "empty vectors");
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = vectors[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(v.size()) != d) {
      throw Error(ErrorKind::kInvalidArgument, "vectors differ in dimension");
    }
    for (Eigen::Index k = 0; k < d; ++k) {
      if (!std::isfinite(v[static_cast<std::size_t>(k)])) {
        throw Error(ErrorKind::kInvalidArgument, "non-finite vector entry");
      }
      x(i, k) = v[static_cast<std::size_t>(k)];
    }
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  std::vector<Point2> out(vectors.size(), Point2{0.0, 0.0});
  if (x.cwiseAbs().maxCoeff() == 0.0) return out;

  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kInvalidArgument, "eigendecomposition failed");
  }
  // Eigenvalues ascend; the last columns are the leading directions.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double top = values(d - 1);
  for (int c = 0; c < 2 && c < d; ++c) {
    const Eigen::Index col = d - 1 - c;
    if (values(col) <= 1e-12 * top) continue;
    Eigen::VectorXd dir = solver.eigenvectors().col(col);
    Eigen::Index arg = 0;
    for (Eigen::Index k = 1; k < d; ++k) {
      if (std::abs(dir(k)) > std::abs(dir(arg))) arg = k;
    }
    if (dir(arg) < 0) dir = -dir;
    const Eigen::VectorXd scores = x * dir;
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)][c] = scores(i);
  }
  return out;
}

std::vector<int> Cluster(const std::vector<Point2>& points, const ClusterParams& params) {
  if (!(params.eps > 0.0)) throw Error(ErrorKind::kInvalidArgument, "eps must be > 0");
  if (params.min_pts < 1) throw Error(ErrorKind::kInvalidArgument, "min_pts must be >= 1");
  const std::size_t n = points.size();
  const double eps2 = params.eps * params.eps;
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = points[i][0] - points[j][0];
      const double dy = points[i][1] - points[j][1];
      if (dx * dx + dy * dy <= eps2) neighbors[i].push_back(j);
    }
  }
  auto is_core = [&](std::size_t i) {
    return neighbors[i].size() >= static_cast<std::size_t>(params.min_pts);
  };

  constexpr int kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    if (!is_core(i)) {
      label[i] = kNoise;
      continue;
    }
    const int id = next++;
    label[i] = id;
    std::deque<std::size_t> frontier = {i};
    while (!frontier.empty()) {
      const std::size_t q = frontier.front();
      frontier.pop_front();
      for (std::size_t r : neighbors[q]) {
        if (label[r] != kUnvisited && label[r] != kNoise) continue;
        const bool fresh = label[r] == kUnvisited;
        label[r] = id;
        if (fresh && is_core(r)) frontier.push_back(r);
      }
    }
  }

  std::vector<int> remap(static_cast<std::size_t>(next), kNoise);
  int assigned = 0;
  for (int& l : label) {
    if (l == kNoise) continue;
    if (remap[static_cast<std::size_t>(l)] == kNoise) remap[static_cast<std::size_t>(l)] = assigned++;
    l = remap[static_cast<std::size_t>(l)];
  }
  return label;
}

std::vector<Point2> ScaleToUnitBox(std::vector<Point2> points) {
  double extent = 0.0;
  for (const auto& p : points) extent = std::max({extent, std::abs(p[0]), std::abs(p[1])});
  if (extent > 0.0) {
    for (auto& p : points) {
      p[0] /= extent;
      p[1] /= extent;
    }
  }
  return points;
}

ScatterPayload BuildScatter(const InvertedIndex& index, const std::string& term, uint64_t seed,
                            std::size_t cap, const ClusterParams& params,
                            const Embedder& embedder) {
  ScatterPayload payload;
  payload.params = params;
  payload.seed = seed;
  payload.cap = cap;
  payload.embedder_id = embedder.id();
  for (auto c : kCommunities) {
    auto set = SampleMatches(index, term, c, cap, seed);
    for (std::size_t i = 0; i < set.doc_ids.size(); ++i) {
      payload.doc_ids.push_back(std::move(set.doc_ids[i]));
      payload.texts.push_back(std::move(set.texts[i]));
      payload.communities.push_back(c);
    }
  }
  if (payload.texts.size() < 3) {
    throw Error(ErrorKind::kInsufficientData, "insufficient data for scatterplot");
  }
  payload.points = ScaleToUnitBox(Project2d(embedder.Embed(payload.texts)));
  payload.labels = Cluster(payload.points, params);
  return payload;
}

nlohmann::json ToJson(const ScatterPayload& p) {
  nlohmann::json x = nlohmann::json::array();
  nlohmann::json y = nlohmann::json::array();
  nlohmann::json community = nlohmann::json::array();
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    x.push_back(p.points[i][0]);
    y.push_back(p.points[i][1]);
    community.push_back(Slot(p.communities[i]));
  }
  return {
      {"x", x},
      {"y", y},
      {"label", p.labels},
      {"community", community},
      {"text", p.texts},
      {"doc_id", p.doc_ids},
      {"params",
       {{"eps", p.params.eps},
        {"min_pts", p.params.min_pts},
        {"seed", p.seed},
        {"cap", p.cap},
        {"embedder", p.embedder_id},
        {"projection", "pca"},
        {"clustering", "dbscan"}}},
  };
}

}  // namespace bd

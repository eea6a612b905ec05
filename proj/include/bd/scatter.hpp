#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bd/index.hpp"
#include "json.hpp"

namespace bd {

using Embedding = std::vector<double>;
using Point2 = std::array<double, 2>;

// Embedding contract: one vector per text, same dimension, order preserved.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string id() const = 0;
  virtual std::vector<Embedding> Embed(const std::vector<std::string>& texts) const = 0;
};

// Feature-hashed tf-idf over unigrams and bigrams of non-stopword tokens.
// Feature strings are the token itself or two tokens joined by one space;
// bucket = fnv1a64(feature) % dim, sign = top bit of the same hash. idf is
// computed over the batch; rows are L2-normalized (all-zero rows stay zero).
class HashedTfidfEmbedder : public Embedder {
 public:
  explicit HashedTfidfEmbedder(int dim = 256);
  std::string id() const override;
  std::vector<Embedding> Embed(const std::vector<std::string>& texts) const override;

  static std::vector<std::string> Features(const std::string& text);

 private:
  int dim_;
};

// Exact PCA onto the top two principal directions. Each direction is signed
// so its largest-magnitude loading is positive. Needs >= 3 vectors.
std::vector<Point2> Project2d(const std::vector<Embedding>& vectors);

struct ClusterParams {
  double eps = 0.15;
  int min_pts = 4;
};

inline constexpr int kNoise = -1;

// DBSCAN over Euclidean distance. Neighborhoods are inclusive and count the
// point itself. Labels are renumbered 0..k-1 by first appearance.
std::vector<int> Cluster(const std::vector<Point2>& points, const ClusterParams& params);

// Scales points about the origin so the largest coordinate magnitude is 1.
std::vector<Point2> ScaleToUnitBox(std::vector<Point2> points);

struct ScatterPayload {
  std::vector<Point2> points;
  std::vector<int> labels;
  std::vector<Community> communities;
  std::vector<std::string> doc_ids;
  std::vector<std::string> texts;
  ClusterParams params;
  uint64_t seed = 0;
  std::size_t cap = 0;
  std::string embedder_id;
};

// Samples both communities exactly as the generation endpoints do, embeds
// the union as one batch, projects and clusters it. Throws kInsufficientData
// when fewer than three samples exist.
ScatterPayload BuildScatter(const InvertedIndex& index, const std::string& term, uint64_t seed,
                            std::size_t cap, const ClusterParams& params,
                            const Embedder& embedder);

nlohmann::json ToJson(const ScatterPayload& payload);

}  // namespace bd

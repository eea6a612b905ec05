#pragma once

// Brute-force reference implementations. They share no code with the library
// beyond the corpus type and the per-document token and sentiment caches.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bd/corpus.hpp"
#include "bd/index.hpp"

namespace oracle {

struct Counts {
  std::array<std::size_t, 2> docs{};
  std::array<double, 2> sentiment_sum{};
};

inline bool ContainsRun(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    bool all = true;
    for (std::size_t k = 0; k < phrase.size() && all; ++k) all = tokens[i + k] == phrase[k];
    if (all) return true;
  }
  return false;
}

// Linear scan over every document.
inline Counts ScanPhrase(const bd::InvertedIndex& index, const std::vector<std::string>& phrase) {
  Counts out;
  const auto& docs = index.corpus().documents();
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (!ContainsRun(docs[d].tokens, phrase)) continue;
    const auto c = static_cast<std::size_t>(docs[d].community);
    ++out.docs[c];
    out.sentiment_sum[c] += index.sentiment(static_cast<bd::DocOrdinal>(d));
  }
  return out;
}

// Every n-gram up to n_max with the set of documents containing it, computed
// by direct enumeration. Multi-token n-grams spanning a sentinel are skipped.
inline std::map<std::string, Counts> AllNgrams(const bd::InvertedIndex& index, int n_max) {
  std::map<std::string, Counts> out;
  const auto& docs = index.corpus().documents();
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& t = docs[d].tokens;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::string gram;
      for (std::size_t n = 1; n <= static_cast<std::size_t>(n_max) && i + n <= t.size(); ++n) {
        const auto& tok = t[i + n - 1];
        const bool sentinel = tok == "<url>" || tok == "<user>";
        if (n > 1 && (sentinel || t[i] == "<url>" || t[i] == "<user>")) break;
        gram += (n > 1 ? " " : "") + tok;
        seen.insert(gram);
        if (sentinel) break;
      }
    }
    const auto c = static_cast<std::size_t>(docs[d].community);
    for (const auto& g : seen) {
      auto& e = out[g];
      ++e.docs[c];
      e.sentiment_sum[c] += index.sentiment(static_cast<bd::DocOrdinal>(d));
    }
  }
  return out;
}

struct Thresholds {
  double min_rate_per_k = 0.5;
  std::size_t min_docs = 20;
  double freq_z = 3.0;
  double sent_gap = 0.35;
  std::size_t sent_min_docs = 30;
  double alpha = 0.5;
  int n_max = 3;
  bool subsumption = true;
};

struct Selected {
  std::string term;
  double z = 0.0;
  std::optional<double> gap;
  double rank = 0.0;
};

inline double Z(double y1, double n1, double y2, double n2, double a) {
  const double l1 = std::log(y1 + a) - std::log(n1 - y1 + a);
  const double l2 = std::log(y2 + a) - std::log(n2 - y2 + a);
  return (l1 - l2) / std::sqrt(1.0 / (y1 + a) + 1.0 / (y2 + a));
}

inline std::vector<std::string> Words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ' ') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

// Selection over precomputed n-gram counts, ordered by rank then surface.
inline std::vector<Selected> Curate(const std::map<std::string, Counts>& grams,
                                    const std::array<std::size_t, 2>& totals, const Thresholds& th) {
  std::vector<Selected> chosen;
  for (const auto& [term, c] : grams) {
    if (term == "<url>" || term == "<user>") continue;
    if (static_cast<int>(Words(term).size()) > th.n_max) continue;
    bool sufficient = true;
    for (int k = 0; k < 2; ++k) {
      const double rate = 1000.0 * static_cast<double>(c.docs[k]) / static_cast<double>(totals[k]);
      sufficient = sufficient && c.docs[k] >= th.min_docs && rate >= th.min_rate_per_k;
    }
    if (!sufficient) continue;
    Selected s;
    s.term = term;
    s.z = Z(static_cast<double>(c.docs[0]), static_cast<double>(totals[0]),
            static_cast<double>(c.docs[1]), static_cast<double>(totals[1]), th.alpha);
    if (c.docs[0] >= th.sent_min_docs && c.docs[1] >= th.sent_min_docs) {
      s.gap = std::fabs(c.sentiment_sum[0] / static_cast<double>(c.docs[0]) -
                        c.sentiment_sum[1] / static_cast<double>(c.docs[1]));
    }
    const bool by_freq = std::fabs(s.z) >= th.freq_z;
    const bool by_sent = s.gap && *s.gap >= th.sent_gap;
    if (!by_freq && !by_sent) continue;
    s.rank = std::fabs(s.z) + (s.gap ? *s.gap : 0.0);
    chosen.push_back(s);
  }
  if (th.subsumption) {
    std::vector<Selected> kept;
    for (const auto& shorter : chosen) {
      const auto sw = Words(shorter.term);
      bool dominated = false;
      for (const auto& longer : chosen) {
        const auto lw = Words(longer.term);
        if (lw.size() <= sw.size()) continue;
        if (ContainsRun(lw, sw) && std::fabs(longer.z) >= std::fabs(shorter.z)) dominated = true;
      }
      if (!dominated) kept.push_back(shorter);
    }
    chosen = kept;
  }
  std::sort(chosen.begin(), chosen.end(), [](const Selected& a, const Selected& b) {
    return a.rank != b.rank ? a.rank > b.rank : a.term < b.term;
  });
  return chosen;
}

// Cyclic Jacobi eigenvalues of a symmetric matrix, descending.
inline std::vector<double> JacobiEigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

inline std::vector<std::vector<double>> Covariance(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size(), d = rows[0].size();
  std::vector<double> mean(d, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
  for (auto& m : mean) m /= static_cast<double>(n);
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& r : rows)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
  for (auto& row : cov)
    for (auto& v : row) v /= static_cast<double>(n - 1);
  return cov;
}

// Sample variance of each output axis, summed.
inline double CapturedVariance(const std::vector<std::array<double, 2>>& pts) {
  double total = 0.0;
  for (int axis = 0; axis < 2; ++axis) {
    double mean = 0.0;
    for (const auto& p : pts) mean += p[axis];
    mean /= static_cast<double>(pts.size());
    double ss = 0.0;
    for (const auto& p : pts) ss += (p[axis] - mean) * (p[axis] - mean);
    total += ss / static_cast<double>(pts.size() - 1);
  }
  return total;
}

// DBSCAN reference: core points from the full neighborhood graph, clusters as
// connected components of core points (union-find), each border point joined
// to the adjacent component whose smallest core index is lowest, labels
// renumbered by first appearance.
inline std::vector<int> Dbscan(const std::vector<std::array<double, 2>>& pts, double eps, int min_pts) {
  const std::size_t n = pts.size();
  auto near = [&](std::size_t i, std::size_t j) {
    const double dx = pts[i][0] - pts[j][0], dy = pts[i][1] - pts[j][1];
    return dx * dx + dy * dy <= eps * eps;
  };
  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) count += near(i, j) ? 1 : 0;
    core[i] = count >= min_pts;
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (core[i] && core[j] && near(i, j)) {
        const auto a = find(i), b = find(j);
        parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<long> raw(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      raw[i] = static_cast<long>(find(i));
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (core[j] && near(i, j)) {
        const auto root = static_cast<long>(find(j));
        if (raw[i] < 0 || root < raw[i]) raw[i] = root;
      }
    }
  }
  std::map<long, int> renumber;
  std::vector<int> labels(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i] < 0) continue;
    auto it = renumber.try_emplace(raw[i], static_cast<int>(renumber.size())).first;
    labels[i] = it->second;
  }
  return labels;
}

}  // namespace oracle

#pragma once

// Synthetic corpora drawn from known topic and mixture matrices; the
// generator doubles as the recovery oracle for the samplers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mis/grid.hpp"
#include "mis/rng.hpp"
#include "mis/textprep.hpp"

namespace mis::test {

struct PlantedModel {
  Matrix phi;    // k x v ground-truth topics
  Matrix theta;  // m x k ground-truth mixtures
  Corpus corpus;
};

inline std::string word_name(int v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "w%03d", v);
  return buf;
}

inline std::string firm_name(int m) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "F%04d", m);
  return buf;
}

/// Block-structured topics: topic k owns v/k words (98% of its mass,
/// Dirichlet-spread within the block) plus a 2% uniform floor; document
/// mixtures are Dirichlet(doc_alpha).
inline Matrix planted_topics(int k, int v, Rng& rng) {
  Matrix phi(k, v, 0.02 / v);
  const int block = v / k;
  std::vector<double> within(block, 2.0);
  for (int t = 0; t < k; ++t) {
    const std::vector<double> w = rng.dirichlet(within);
    for (int j = 0; j < block; ++j) phi(t, t * block + j) += 0.98 * w[j];
  }
  normalize_rows(phi);
  return phi;
}

inline PlantedModel make_planted(int k, int v, int m, int n_per_doc,
                                 std::uint64_t seed, double doc_alpha = 0.3) {
  Rng rng(seed);
  PlantedModel p;
  p.phi = planted_topics(k, v, rng);
  p.theta = Matrix(m, k);
  p.corpus.vocab.reserve(v);
  for (int w = 0; w < v; ++w) p.corpus.vocab.push_back(word_name(w));

  const std::vector<double> doc_prior(k, doc_alpha);
  for (int d = 0; d < m; ++d) {
    const std::vector<double> theta = rng.dirichlet(doc_prior);
    for (int t = 0; t < k; ++t) p.theta(d, t) = theta[t];
    BagOfWords bag;
    for (int i = 0; i < n_per_doc; ++i) {
      const int topic = rng.discrete(theta);
      const int word = rng.discrete(p.phi.row(topic));
      bag.add(p.corpus.vocab[word]);
    }
    p.corpus.docs.emplace_back(firm_name(d), std::move(bag));
  }
  return p;
}

/// Same planted model, fresh token sample (a later "year" of the process).
inline Corpus resample_corpus(const PlantedModel& p, int n_per_doc,
                              std::uint64_t seed) {
  Rng rng(seed);
  Corpus corpus;
  corpus.vocab = p.corpus.vocab;
  for (int d = 0; d < p.theta.rows; ++d) {
    BagOfWords bag;
    for (int i = 0; i < n_per_doc; ++i) {
      const int topic = rng.discrete(p.theta.row(d));
      const int word = rng.discrete(p.phi.row(topic));
      bag.add(corpus.vocab[word]);
    }
    corpus.docs.emplace_back(firm_name(d), std::move(bag));
  }
  return corpus;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return num / std::sqrt(na * nb);
}

/// Greedy one-to-one matching on descending cosine; mean over the matched
/// pairs.
inline double mean_best_match_cosine(const Matrix& fitted, const Matrix& truth) {
  struct Pair {
    int f, t;
    double cos;
  };
  std::vector<Pair> pairs;
  for (int f = 0; f < fitted.rows; ++f)
    for (int t = 0; t < truth.rows; ++t)
      pairs.push_back({f, t, cosine(fitted.row(f), truth.row(t))});
  std::sort(pairs.begin(), pairs.end(),
            [](const Pair& a, const Pair& b) { return a.cos > b.cos; });
  std::vector<bool> used_f(fitted.rows, false), used_t(truth.rows, false);
  double total = 0.0;
  int matched = 0;
  for (const Pair& p : pairs) {
    if (used_f[p.f] || used_t[p.t]) continue;
    used_f[p.f] = true;
    used_t[p.t] = true;
    total += p.cos;
    ++matched;
  }
  return matched == 0 ? 0.0 : total / matched;
}

}  // namespace mis::test

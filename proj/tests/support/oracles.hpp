#pragma once

// Independent oracles for the samplers: exhaustive enumeration of the
// collapsed joint on tiny instances, and a from-the-formula rewrite of
// the joint log-likelihood. These deliberately share no code with the
// library implementations they check.

#include <cmath>
#include <vector>

#include "mis/lda.hpp"

namespace mis::test {

struct TinyInstance {
  std::vector<int> doc_of;   // doc index per token
  std::vector<int> word_of;  // word id per token
  int m = 0;
  int v = 0;
};

inline TinyInstance flatten(const Corpus& corpus) {
  TinyInstance t;
  t.m = corpus.size();
  t.v = static_cast<int>(corpus.vocab.size());
  for (int d = 0; d < corpus.size(); ++d) {
    const BagOfWords& bag = corpus.docs[d].second;
    for (const auto& [key, count] : bag.counts) {
      int word = -1;
      for (int w = 0; w < t.v; ++w)
        if (corpus.vocab[w] == key) word = w;
      for (int c = 0; c < count; ++c) {
        t.doc_of.push_back(d);
        t.word_of.push_back(word);
      }
    }
  }
  return t;
}

/// log of the collapsed joint P(z, w) for one assignment vector.
inline double collapsed_log_joint(const TinyInstance& inst,
                                  const std::vector<int>& z,
                                  const DirichletPrior& prior) {
  const int k = prior.k();
  std::vector<std::vector<int>> doc_topic(inst.m, std::vector<int>(k, 0));
  std::vector<std::vector<int>> topic_word(k, std::vector<int>(inst.v, 0));
  std::vector<int> topic_total(k, 0);
  std::vector<int> doc_total(inst.m, 0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    ++doc_topic[inst.doc_of[i]][z[i]];
    ++topic_word[z[i]][inst.word_of[i]];
    ++topic_total[z[i]];
    ++doc_total[inst.doc_of[i]];
  }

  double beta_sum = 0.0;
  for (double b : prior.beta) beta_sum += b;

  double value = 0.0;
  for (int d = 0; d < inst.m; ++d) {
    value += std::lgamma(beta_sum) - std::lgamma(beta_sum + doc_total[d]);
    for (int t = 0; t < k; ++t)
      value += std::lgamma(prior.beta[t] + doc_topic[d][t]) -
               std::lgamma(prior.beta[t]);
  }
  for (int t = 0; t < k; ++t) {
    double alpha_sum = 0.0;
    for (int w = 0; w < inst.v; ++w) alpha_sum += prior.alpha(t, w);
    value += std::lgamma(alpha_sum) - std::lgamma(alpha_sum + topic_total[t]);
    for (int w = 0; w < inst.v; ++w)
      value += std::lgamma(prior.alpha(t, w) + topic_word[t][w]) -
               std::lgamma(prior.alpha(t, w));
  }
  return value;
}

/// Exact per-token assignment marginals P(z_i = t) by enumerating all k^T
/// assignment vectors.
inline std::vector<std::vector<double>> enumerate_marginals(
    const Corpus& corpus, const DirichletPrior& prior) {
  const TinyInstance inst = flatten(corpus);
  const int k = prior.k();
  const int n = static_cast<int>(inst.doc_of.size());

  std::vector<std::vector<double>> marginals(n, std::vector<double>(k, 0.0));
  std::vector<int> z(n, 0);
  double normalizer = 0.0;
  for (;;) {
    const double weight = std::exp(collapsed_log_joint(inst, z, prior));
    normalizer += weight;
    for (int i = 0; i < n; ++i) marginals[i][z[i]] += weight;

    int pos = 0;  // odometer
    while (pos < n && ++z[pos] == k) z[pos++] = 0;
    if (pos == n) break;
  }
  for (auto& row : marginals)
    for (double& p : row) p /= normalizer;
  return marginals;
}

/// Gibbs estimate of the same marginals: frequency of each assignment
/// over post-burn-in sweeps.
inline std::vector<std::vector<double>> gibbs_marginals(
    const Corpus& corpus, const DirichletPrior& prior, int burn_in,
    int samples, std::uint64_t seed) {
  Rng rng(seed);
  Assignments a = init_assignments(corpus, prior.k(), rng);
  for (int sweep = 0; sweep < burn_in; ++sweep) gibbs_sweep(a, prior, rng);

  int n = 0;
  for (const auto& doc : a.z) n += static_cast<int>(doc.size());
  std::vector<std::vector<double>> marginals(
      n, std::vector<double>(prior.k(), 0.0));
  for (int s = 0; s < samples; ++s) {
    gibbs_sweep(a, prior, rng);
    int i = 0;
    for (const auto& doc : a.z)
      for (int zi : doc) marginals[i++][zi] += 1.0;
  }
  for (auto& row : marginals)
    for (double& p : row) p /= samples;
  return marginals;
}

/// Term-by-term rewrite of the joint log-likelihood, including Dirichlet
/// normalizing constants, with the same 1e-12 clamp.
inline double reference_log_likelihood(const LdaModel& model,
                                       const Assignments& a,
                                       const Corpus& corpus) {
  auto log_dirichlet = [](std::span<const double> x,
                          std::span<const double> alpha) {
    double sum_alpha = 0.0;
    double log_b = 0.0;  // log multivariate beta
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      sum_alpha += alpha[i];
      log_b += std::lgamma(alpha[i]);
    }
    log_b -= std::lgamma(sum_alpha);
    double value = -log_b;
    for (std::size_t i = 0; i < x.size(); ++i)
      value += (alpha[i] - 1.0) * std::log(std::max(x[i], 1e-12));
    return value;
  };

  double value = 0.0;
  for (int t = 0; t < model.k(); ++t)
    value += log_dirichlet(model.phi.row(t), model.prior.alpha.row(t));
  for (int m = 0; m < corpus.size(); ++m) {
    value += log_dirichlet(model.theta.row(m), model.prior.beta);
    for (std::size_t i = 0; i < a.tokens[m].size(); ++i) {
      value += std::log(std::max(model.theta(m, a.z[m][i]), 1e-12));
      value += std::log(std::max(model.phi(a.z[m][i], a.tokens[m][i]), 1e-12));
    }
  }
  return value;
}

/// Largest per-token total-variation gap between two marginal tables.
inline double max_tv_distance(const std::vector<std::vector<double>>& a,
                              const std::vector<std::vector<double>>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double tv = 0.0;
    for (std::size_t t = 0; t < a[i].size(); ++t)
      tv += std::abs(a[i][t] - b[i][t]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

}  // namespace mis::test

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mis/grid.hpp"
#include "mis/rng.hpp"
#include "mis/textprep.hpp"

namespace mis {

/// Asymmetric Dirichlet prior: per-topic keyphrase pseudo-counts (alpha,
/// K x V) and per-document topic pseudo-counts (beta, length K).
struct DirichletPrior {
  Matrix alpha;
  std::vector<double> beta;

  int k() const { return alpha.rows; }
  int v() const { return alpha.cols; }
  void validate() const;
};

DirichletPrior symmetric_prior(int k, int v, double alpha, double beta);

struct FitConfig {
  int sweeps = 1000;
  int burn_in = 200;
  int thin = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Token-level sampler state: word ids, topic indices, and the count
/// tallies they imply.
struct Assignments {
  std::vector<std::vector<int>> tokens;  // word id per token, per doc
  std::vector<std::vector<int>> z;       // topic per token, same shape
  IntGrid doc_topic_counts;              // M x K
  IntGrid topic_word_counts;             // K x V
  std::vector<int> topic_totals;         // K

  int total_tokens() const;
  /// Recompute all tallies from z (consistency repair / test helper).
  void rebuild_counts(int k, int v);
};

/// Assign every token a uniform random topic.
Assignments init_assignments(const Corpus& corpus, int k, std::uint64_t seed);
Assignments init_assignments(const Corpus& corpus, int k, Rng& rng);

/// One collapsed Gibbs pass: every token resampled once, in corpus order,
/// from p(z=k) ~ (n_mk + beta_k) * (n_kv + alpha_kv) / (n_k + sum_v alpha_kv).
void gibbs_sweep(Assignments& a, const DirichletPrior& prior, Rng& rng);

struct IndustryMixture {
  std::string firm_id;
  std::vector<double> theta;
};

struct LdaModel {
  std::vector<std::string> vocab;
  std::vector<std::string> firm_ids;  // one per theta row
  Matrix phi;    // K x V, row-stochastic
  Matrix theta;  // M x K, row-stochastic
  DirichletPrior prior;
  Matrix posterior_alpha;  // prior.alpha + final topic_word_counts
  FitConfig fit_meta;

  int k() const { return phi.rows; }
  int v() const { return phi.cols; }
};

/// Collapsed Gibbs fit. phi and theta are posterior means averaged over
/// post-burn-in thinned samples.
LdaModel fit_lda(const Corpus& corpus, const DirichletPrior& prior, int k,
                 const FitConfig& config);

/// Fold-in: sample topic assignments for one new bag with phi frozen;
/// returns the posterior-mean mixture. An empty bag returns the
/// normalized beta prior.
IndustryMixture infer_mixture(const LdaModel& model, const BagOfWords& bag,
                              const FitConfig& config,
                              const std::string& firm_id = {});

struct LogLikelihood {
  double value = 0.0;
  /// True when an assigned (topic, word) pair carried exactly zero
  /// probability; value is -inf in that case.
  bool zero_probability_conflict = false;
};

/// Joint log-likelihood of the generative process:
/// sum_k log P(phi_k) + sum_m [log P(theta_m) + sum_i (log theta_{m,z} +
/// log phi_{z,w})], with Dirichlet prior densities including their
/// normalizing constants. Positive entries are clamped at 1e-12 before
/// the log.
LogLikelihood joint_log_likelihood(const LdaModel& model,
                                   const Assignments& a, const Corpus& corpus);

/// log Dirichlet(x | alpha) with normalizing constant; x clamped at 1e-12.
double dirichlet_log_density(std::span<const double> x,
                             std::span<const double> alpha);

}  // namespace mis

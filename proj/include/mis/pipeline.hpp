#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mis/hdp.hpp"
#include "mis/lda.hpp"

namespace mis {

struct EnsembleConfig {
  int members = 8;
  int quorum = 0;  // 0 means default ceil(members / 2)
  double match_threshold = 0.8;   // cosine for cluster membership
  double prior_strength = 100.0;  // pseudo-count mass per consensus topic
  double dilution_exponent = 0.5;

  int resolved_quorum() const {
    return quorum > 0 ? quorum : (members + 1) / 2;
  }
  void validate() const;
};

/// Consensus extraction: cluster all members' topics by cosine similarity
/// (at most one topic per member per cluster), keep clusters reaching the
/// quorum, and average each cluster entrywise. Output is ordered by
/// cluster size then total topic mass.
std::vector<std::vector<double>> match_topics(
    const std::vector<HdpResult>& members, const EnsembleConfig& config);

/// Dirichlet prior with alpha row k = strength * consensus_k + 0.01 floor
/// and a unit beta vector.
DirichletPrior build_empirical_prior(
    const std::vector<std::vector<double>>& consensus, double strength, int v);

/// Next-year prior: entrywise posterior_alpha^exponent (the dilution
/// transform); beta carried over unchanged.
DirichletPrior chain_prior(const Matrix& posterior_alpha,
                           const std::vector<double>& beta,
                           double dilution_exponent);

struct PipelineConfig {
  EnsembleConfig ensemble;
  HdpConfig hdp;
  FitConfig fit;
  std::uint64_t master_seed = 42;
  bool allow_year_gaps = false;
  double drift_alarm = 0.05;  // warn when a topic's token share grows more
};

struct Provenance {
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> member_seeds;  // year-1 HDP members
  std::uint64_t lda_seed = 0;
  std::string config_digest;
  std::vector<std::string> warnings;
};

struct YearSnapshot {
  int year = 0;
  int k = 0;
  DirichletPrior prior;
  LdaModel model;
  std::vector<std::string> topic_labels;
  std::vector<double> topic_token_shares;  // theta weighted by doc length
  Provenance provenance;
};

/// Year 1: HDP ensemble -> consensus -> Empirical Bayes prior -> LDA.
/// Later years: chain the previous posterior (K stays fixed) and refit.
YearSnapshot run_year(const Corpus& corpus, const YearSnapshot* prev, int year,
                      const PipelineConfig& config);

/// Fold run_year over contiguous ascending years; year t sees no data
/// after t.
std::vector<YearSnapshot> run_pipeline(const std::map<int, Corpus>& corpora,
                                       const PipelineConfig& config);

}  // namespace mis

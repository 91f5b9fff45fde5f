#include "mis/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "mis/network.hpp"
#include "mis/snapshot.hpp"

namespace mis {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

struct MemberTopic {
  int member = 0;
  std::vector<double> phi;
  double mass = 0.0;
};

struct Cluster {
  std::vector<int> members;  // member indices, at most one topic each
  std::vector<double> sum;
  double total_mass = 0.0;

  std::vector<double> centroid() const {
    std::vector<double> c = sum;
    for (double& x : c) x /= static_cast<double>(members.size());
    return c;
  }
};

}  // namespace

void EnsembleConfig::validate() const {
  if (members < 1) throw std::invalid_argument("ensemble: members must be >= 1");
  const int q = resolved_quorum();
  if (q < 1 || q > members)
    throw std::invalid_argument("ensemble: quorum must be in [1, members]");
  if (!(match_threshold > 0.0) || match_threshold > 1.0)
    throw std::invalid_argument("ensemble: match_threshold must be in (0, 1]");
  if (!(prior_strength >= 0.0))
    throw std::invalid_argument("ensemble: prior_strength must be >= 0");
  if (!(dilution_exponent > 0.0) || dilution_exponent > 1.0)
    throw std::invalid_argument("ensemble: dilution_exponent must be in (0, 1]");
}

std::vector<std::vector<double>> match_topics(
    const std::vector<HdpResult>& members, const EnsembleConfig& config) {
  config.validate();
  if (members.empty())
    throw std::invalid_argument("match_topics: no ensemble members");

  std::vector<MemberTopic> topics;
  for (int s = 0; s < static_cast<int>(members.size()); ++s) {
    const HdpResult& member = members[s];
    for (int k = 0; k < member.k_found; ++k) {
      MemberTopic t;
      t.member = s;
      t.phi.assign(member.phi.row(k).begin(), member.phi.row(k).end());
      t.mass = member.topic_masses[k];
      topics.push_back(std::move(t));
    }
  }

  // Content-based processing order, so member-internal topic permutations
  // cannot change the outcome.
  std::stable_sort(topics.begin(), topics.end(),
                   [](const MemberTopic& a, const MemberTopic& b) {
                     if (a.mass != b.mass) return a.mass > b.mass;
                     if (a.phi != b.phi) return a.phi < b.phi;
                     return a.member < b.member;
                   });

  std::vector<Cluster> clusters;
  for (const MemberTopic& topic : topics) {
    int best = -1;
    double best_cos = config.match_threshold;
    for (int c = 0; c < static_cast<int>(clusters.size()); ++c) {
      const Cluster& cluster = clusters[c];
      if (std::find(cluster.members.begin(), cluster.members.end(),
                    topic.member) != cluster.members.end())
        continue;
      const double cs = cosine(topic.phi, cluster.centroid());
      if (cs >= best_cos) {
        best_cos = cs;
        best = c;
      }
    }
    if (best < 0) {
      Cluster fresh;
      fresh.members.push_back(topic.member);
      fresh.sum = topic.phi;
      fresh.total_mass = topic.mass;
      clusters.push_back(std::move(fresh));
    } else {
      Cluster& cluster = clusters[best];
      cluster.members.push_back(topic.member);
      for (std::size_t i = 0; i < topic.phi.size(); ++i)
        cluster.sum[i] += topic.phi[i];
      cluster.total_mass += topic.mass;
    }
  }

  const int quorum = config.resolved_quorum();
  std::vector<Cluster> kept;
  for (auto& cluster : clusters)
    if (static_cast<int>(cluster.members.size()) >= quorum)
      kept.push_back(std::move(cluster));

  std::stable_sort(kept.begin(), kept.end(), [](const Cluster& a,
                                                const Cluster& b) {
    if (a.members.size() != b.members.size())
      return a.members.size() > b.members.size();
    if (a.total_mass != b.total_mass) return a.total_mass > b.total_mass;
    return a.sum < b.sum;
  });

  std::vector<std::vector<double>> consensus;
  consensus.reserve(kept.size());
  for (const Cluster& cluster : kept) {
    std::vector<double> phi = cluster.centroid();
    const double total = std::accumulate(phi.begin(), phi.end(), 0.0);
    for (double& x : phi) x /= total;
    consensus.push_back(std::move(phi));
  }
  return consensus;
}

DirichletPrior build_empirical_prior(
    const std::vector<std::vector<double>>& consensus, double strength, int v) {
  if (consensus.empty())
    throw std::invalid_argument("build_empirical_prior: empty consensus");
  if (!(strength >= 0.0))
    throw std::invalid_argument("build_empirical_prior: strength must be >= 0");
  const int k = static_cast<int>(consensus.size());
  DirichletPrior prior;
  prior.alpha = Matrix(k, v);
  prior.beta.assign(k, 1.0);
  for (int t = 0; t < k; ++t) {
    if (static_cast<int>(consensus[t].size()) != v)
      throw std::invalid_argument("build_empirical_prior: phi length mismatch");
    for (int w = 0; w < v; ++w)
      prior.alpha(t, w) = strength * consensus[t][w] + 0.01;
  }
  return prior;
}

DirichletPrior chain_prior(const Matrix& posterior_alpha,
                           const std::vector<double>& beta,
                           double dilution_exponent) {
  if (!(dilution_exponent > 0.0) || dilution_exponent > 1.0)
    throw std::invalid_argument("chain_prior: exponent must be in (0, 1]");
  DirichletPrior prior;
  prior.alpha = posterior_alpha;
  for (double& x : prior.alpha.data) {
    if (!(x > 0.0))
      throw std::invalid_argument("chain_prior: nonpositive posterior entry");
    x = std::pow(x, dilution_exponent);
  }
  prior.beta = beta;
  return prior;
}

namespace {

std::vector<double> token_shares(const LdaModel& model, const Corpus& corpus) {
  std::vector<double> shares(model.k(), 0.0);
  double total = 0.0;
  for (int m = 0; m < corpus.size(); ++m) {
    const double n_m = corpus.docs[m].second.total;
    total += n_m;
    for (int t = 0; t < model.k(); ++t) shares[t] += n_m * model.theta(m, t);
  }
  if (total > 0.0)
    for (double& s : shares) s /= total;
  return shares;
}

}  // namespace

YearSnapshot run_year(const Corpus& corpus, const YearSnapshot* prev, int year,
                      const PipelineConfig& config) {
  config.ensemble.validate();
  if (corpus.total_tokens() == 0)
    throw std::invalid_argument("run_year: corpus has no tokens for year " +
                                std::to_string(year));

  YearSnapshot snapshot;
  snapshot.year = year;
  snapshot.provenance.master_seed = config.master_seed;
  snapshot.provenance.config_digest = config_digest(config);
  snapshot.provenance.lda_seed =
      Rng::derive(config.master_seed, "lda/" + std::to_string(year));

  FitConfig fit = config.fit;
  fit.seed = snapshot.provenance.lda_seed;

  if (prev == nullptr) {
    // Discovery year: ensemble of HDP fits with identical hyperparameters
    // and per-member derived seeds.
    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < config.ensemble.members; ++s)
      seeds.push_back(
          Rng::derive(config.master_seed, "hdp/" + std::to_string(s)));
    snapshot.provenance.member_seeds = seeds;

    std::vector<std::future<HdpResult>> futures;
    for (int s = 0; s < config.ensemble.members; ++s) {
      HdpConfig member_config = config.hdp;
      member_config.seed = seeds[s];
      futures.push_back(std::async(std::launch::async, [&corpus, member_config] {
        return fit_hdp(corpus, member_config);
      }));
    }
    std::vector<HdpResult> results;
    results.reserve(futures.size());
    for (auto& f : futures) results.push_back(f.get());
    for (int s = 0; s < static_cast<int>(results.size()); ++s)
      if (results[s].k_max_hit)
        snapshot.provenance.warnings.push_back(
            "hdp member " + std::to_string(s) + " hit the topic cap");

    const auto consensus = match_topics(results, config.ensemble);
    if (consensus.empty())
      throw std::runtime_error(
          "run_year: no consensus topics survived the quorum");
    snapshot.prior =
        build_empirical_prior(consensus, config.ensemble.prior_strength,
                              static_cast<int>(corpus.vocab.size()));
    snapshot.k = static_cast<int>(consensus.size());
    snapshot.model = fit_lda(corpus, snapshot.prior, snapshot.k, fit);
  } else {
    // Chained year: union vocabulary, diluted posterior as prior, K fixed.
    const std::vector<std::string>& prev_vocab = prev->model.vocab;
    std::vector<std::string> vocab = prev_vocab;
    {
      std::unordered_map<std::string, int> seen;
      for (int i = 0; i < static_cast<int>(vocab.size()); ++i)
        seen.emplace(vocab[i], i);
      for (const auto& word : corpus.vocab)
        if (seen.emplace(word, static_cast<int>(vocab.size())).second)
          vocab.push_back(word);
    }

    const DirichletPrior chained =
        chain_prior(prev->model.posterior_alpha, prev->prior.beta,
                    config.ensemble.dilution_exponent);
    // Keyphrases unseen in prior years get the floor pseudo-count.
    DirichletPrior prior;
    prior.beta = chained.beta;
    prior.alpha = Matrix(prev->k, static_cast<int>(vocab.size()), 0.01);
    for (int t = 0; t < prev->k; ++t)
      for (int w = 0; w < static_cast<int>(prev_vocab.size()); ++w)
        prior.alpha(t, w) = chained.alpha(t, w);

    Corpus extended = corpus;
    extended.vocab = vocab;
    snapshot.prior = std::move(prior);
    snapshot.k = prev->k;
    snapshot.model = fit_lda(extended, snapshot.prior, snapshot.k, fit);
  }

  snapshot.topic_labels = name_topics(snapshot.model.phi, snapshot.model.vocab);
  snapshot.topic_token_shares = token_shares(snapshot.model, corpus);

  if (prev != nullptr) {
    for (int t = 0; t < snapshot.k && t < static_cast<int>(
                                              prev->topic_token_shares.size());
         ++t) {
      const double growth =
          snapshot.topic_token_shares[t] - prev->topic_token_shares[t];
      if (growth > config.drift_alarm) {
        std::ostringstream msg;
        msg << "topic " << t << " (" << snapshot.topic_labels[t]
            << ") token share grew by " << growth << " since year "
            << prev->year;
        snapshot.provenance.warnings.push_back(msg.str());
      }
    }
  }
  return snapshot;
}

std::vector<YearSnapshot> run_pipeline(const std::map<int, Corpus>& corpora,
                                       const PipelineConfig& config) {
  if (corpora.empty())
    throw std::invalid_argument("run_pipeline: no corpora given");
  int expected = corpora.begin()->first;
  for (const auto& [year, corpus] : corpora) {
    if (year != expected && !config.allow_year_gaps)
      throw std::invalid_argument("run_pipeline: gap before year " +
                                  std::to_string(year));
    expected = year + 1;
  }

  std::vector<YearSnapshot> snapshots;
  for (const auto& [year, corpus] : corpora) {
    const YearSnapshot* prev = snapshots.empty() ? nullptr : &snapshots.back();
    snapshots.push_back(run_year(corpus, prev, year, config));
  }
  return snapshots;
}

}  // namespace mis

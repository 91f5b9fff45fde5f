#include "mis/lda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace mis {
namespace {

constexpr double kLogClamp = 1e-12;

std::vector<std::vector<int>> expand_tokens(const Corpus& corpus) {
  std::unordered_map<std::string, int> index;
  index.reserve(corpus.vocab.size());
  for (int v = 0; v < static_cast<int>(corpus.vocab.size()); ++v)
    index.emplace(corpus.vocab[v], v);

  std::vector<std::vector<int>> tokens(corpus.docs.size());
  for (std::size_t m = 0; m < corpus.docs.size(); ++m) {
    const BagOfWords& bag = corpus.docs[m].second;
    tokens[m].reserve(bag.total);
    for (const auto& [key, count] : bag.counts) {
      auto it = index.find(key);
      if (it == index.end())
        throw std::invalid_argument("corpus bag key '" + key +
                                    "' missing from vocabulary");
      tokens[m].insert(tokens[m].end(), count, it->second);
    }
  }
  return tokens;
}

}  // namespace

void DirichletPrior::validate() const {
  if (alpha.rows < 1 || alpha.cols < 1)
    throw std::invalid_argument("prior alpha must be non-empty");
  if (static_cast<int>(beta.size()) != alpha.rows)
    throw std::invalid_argument("prior beta length must equal alpha rows");
  for (double x : alpha.data)
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument("prior alpha entries must be positive finite");
  for (double x : beta)
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument("prior beta entries must be positive finite");
}

DirichletPrior symmetric_prior(int k, int v, double alpha, double beta) {
  DirichletPrior prior{Matrix(k, v, alpha), std::vector<double>(k, beta)};
  prior.validate();
  return prior;
}

void FitConfig::validate() const {
  if (burn_in < 0 || sweeps <= burn_in)
    throw std::invalid_argument("fit config requires sweeps > burn_in >= 0");
  if (thin < 1) throw std::invalid_argument("fit config requires thin >= 1");
}

int Assignments::total_tokens() const {
  int n = 0;
  for (const auto& doc : tokens) n += static_cast<int>(doc.size());
  return n;
}

void Assignments::rebuild_counts(int k, int v) {
  doc_topic_counts = IntGrid(static_cast<int>(tokens.size()), k);
  topic_word_counts = IntGrid(k, v);
  topic_totals.assign(k, 0);
  for (std::size_t m = 0; m < tokens.size(); ++m) {
    for (std::size_t i = 0; i < tokens[m].size(); ++i) {
      const int topic = z[m][i];
      ++doc_topic_counts(static_cast<int>(m), topic);
      ++topic_word_counts(topic, tokens[m][i]);
      ++topic_totals[topic];
    }
  }
}

Assignments init_assignments(const Corpus& corpus, int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  Assignments a;
  a.tokens = expand_tokens(corpus);
  a.z.resize(a.tokens.size());
  for (std::size_t m = 0; m < a.tokens.size(); ++m) {
    a.z[m].resize(a.tokens[m].size());
    for (int& zi : a.z[m]) zi = k == 1 ? 0 : rng.uniform_int(k);
  }
  a.rebuild_counts(k, static_cast<int>(corpus.vocab.size()));
  return a;
}

Assignments init_assignments(const Corpus& corpus, int k, std::uint64_t seed) {
  Rng rng(seed);
  return init_assignments(corpus, k, rng);
}

void gibbs_sweep(Assignments& a, const DirichletPrior& prior, Rng& rng) {
  const int k = prior.k();
  std::vector<double> alpha_row_sums(k, 0.0);
  for (int t = 0; t < k; ++t) alpha_row_sums[t] = row_sum(prior.alpha, t);

  std::vector<double> weights(k);
  for (std::size_t m = 0; m < a.tokens.size(); ++m) {
    const int mi = static_cast<int>(m);
    for (std::size_t i = 0; i < a.tokens[m].size(); ++i) {
      const int v = a.tokens[m][i];
      const int old_topic = a.z[m][i];
      --a.doc_topic_counts(mi, old_topic);
      --a.topic_word_counts(old_topic, v);
      --a.topic_totals[old_topic];

      for (int t = 0; t < k; ++t) {
        weights[t] = (a.doc_topic_counts(mi, t) + prior.beta[t]) *
                     (a.topic_word_counts(t, v) + prior.alpha(t, v)) /
                     (a.topic_totals[t] + alpha_row_sums[t]);
      }
      const int new_topic = k == 1 ? 0 : rng.discrete(weights);

      a.z[m][i] = new_topic;
      ++a.doc_topic_counts(mi, new_topic);
      ++a.topic_word_counts(new_topic, v);
      ++a.topic_totals[new_topic];
    }
  }
}

LdaModel fit_lda(const Corpus& corpus, const DirichletPrior& prior, int k,
                 const FitConfig& config) {
  prior.validate();
  config.validate();
  if (corpus.vocab.empty()) throw std::invalid_argument("empty vocabulary");
  if (prior.k() != k || prior.v() != static_cast<int>(corpus.vocab.size()))
    throw std::invalid_argument("prior dimensions do not match (k, V)");

  Rng rng(config.seed);
  Assignments a = init_assignments(corpus, k, rng);
  const int m_docs = corpus.size();
  const int v_words = static_cast<int>(corpus.vocab.size());

  std::vector<double> alpha_row_sums(k);
  for (int t = 0; t < k; ++t) alpha_row_sums[t] = row_sum(prior.alpha, t);
  double beta_sum = 0.0;
  for (double b : prior.beta) beta_sum += b;

  Matrix phi_acc(k, v_words, 0.0);
  Matrix theta_acc(m_docs, k, 0.0);
  int samples = 0;

  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    gibbs_sweep(a, prior, rng);
    if (sweep < config.burn_in || (sweep - config.burn_in) % config.thin != 0)
      continue;
    ++samples;
    for (int t = 0; t < k; ++t) {
      const double denom = a.topic_totals[t] + alpha_row_sums[t];
      for (int v = 0; v < v_words; ++v)
        phi_acc(t, v) += (a.topic_word_counts(t, v) + prior.alpha(t, v)) / denom;
    }
    for (int m = 0; m < m_docs; ++m) {
      const double n_m = static_cast<double>(a.tokens[m].size());
      for (int t = 0; t < k; ++t)
        theta_acc(m, t) += (a.doc_topic_counts(m, t) + prior.beta[t]) /
                           (beta_sum + n_m);
    }
  }

  LdaModel model;
  model.vocab = corpus.vocab;
  model.firm_ids.reserve(corpus.docs.size());
  for (const auto& [firm_id, bag] : corpus.docs) model.firm_ids.push_back(firm_id);
  model.prior = prior;
  model.fit_meta = config;
  for (double& x : phi_acc.data) x /= samples;
  for (double& x : theta_acc.data) x /= samples;
  normalize_rows(phi_acc);
  normalize_rows(theta_acc);
  model.phi = std::move(phi_acc);
  model.theta = std::move(theta_acc);

  model.posterior_alpha = prior.alpha;
  for (int t = 0; t < k; ++t)
    for (int v = 0; v < v_words; ++v)
      model.posterior_alpha(t, v) += a.topic_word_counts(t, v);
  return model;
}

IndustryMixture infer_mixture(const LdaModel& model, const BagOfWords& bag,
                              const FitConfig& config,
                              const std::string& firm_id) {
  config.validate();
  const int k = model.k();
  double beta_sum = 0.0;
  for (double b : model.prior.beta) beta_sum += b;

  IndustryMixture mix{firm_id, std::vector<double>(k, 0.0)};
  if (bag.total == 0) {
    for (int t = 0; t < k; ++t) mix.theta[t] = model.prior.beta[t] / beta_sum;
    return mix;
  }

  std::unordered_map<std::string, int> index;
  for (int v = 0; v < model.v(); ++v) index.emplace(model.vocab[v], v);
  std::vector<int> tokens;
  std::vector<std::string> unknown;
  tokens.reserve(bag.total);
  for (const auto& [key, count] : bag.counts) {
    auto it = index.find(key);
    if (it == index.end()) {
      unknown.push_back(key);
      continue;
    }
    tokens.insert(tokens.end(), count, it->second);
  }
  if (!unknown.empty()) {
    std::ostringstream msg;
    msg << "bag keys outside the model vocabulary:";
    for (const auto& key : unknown) msg << ' ' << key;
    throw std::invalid_argument(msg.str());
  }

  Rng rng(config.seed);
  const int n = static_cast<int>(tokens.size());
  std::vector<int> z(n);
  std::vector<int> doc_counts(k, 0);
  for (int i = 0; i < n; ++i) {
    z[i] = k == 1 ? 0 : rng.uniform_int(k);
    ++doc_counts[z[i]];
  }

  std::vector<double> weights(k);
  std::vector<double> theta_acc(k, 0.0);
  int samples = 0;
  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    for (int i = 0; i < n; ++i) {
      --doc_counts[z[i]];
      for (int t = 0; t < k; ++t)
        weights[t] =
            (doc_counts[t] + model.prior.beta[t]) * model.phi(t, tokens[i]);
      z[i] = k == 1 ? 0 : rng.discrete(weights);
      ++doc_counts[z[i]];
    }
    if (sweep < config.burn_in || (sweep - config.burn_in) % config.thin != 0)
      continue;
    ++samples;
    for (int t = 0; t < k; ++t)
      theta_acc[t] += (doc_counts[t] + model.prior.beta[t]) / (beta_sum + n);
  }

  double total = 0.0;
  for (double& x : theta_acc) {
    x /= samples;
    total += x;
  }
  for (double& x : theta_acc) x /= total;
  mix.theta = std::move(theta_acc);
  return mix;
}

double dirichlet_log_density(std::span<const double> x,
                             std::span<const double> alpha) {
  if (x.size() != alpha.size())
    throw std::invalid_argument("dirichlet_log_density: size mismatch");
  double alpha_sum = 0.0;
  double value = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    alpha_sum += alpha[i];
    value -= std::lgamma(alpha[i]);
    value += (alpha[i] - 1.0) * std::log(std::max(x[i], kLogClamp));
  }
  return value + std::lgamma(alpha_sum);
}

LogLikelihood joint_log_likelihood(const LdaModel& model, const Assignments& a,
                                   const Corpus& corpus) {
  const int k = model.k();
  if (model.theta.rows != corpus.size())
    throw std::invalid_argument("model theta rows do not match corpus size");
  if (static_cast<int>(a.tokens.size()) != corpus.size())
    throw std::invalid_argument("assignments do not match corpus size");

  LogLikelihood out;
  for (int t = 0; t < k; ++t)
    out.value += dirichlet_log_density(model.phi.row(t), model.prior.alpha.row(t));
  for (int m = 0; m < corpus.size(); ++m) {
    out.value += dirichlet_log_density(model.theta.row(m), model.prior.beta);
    for (std::size_t i = 0; i < a.tokens[m].size(); ++i) {
      const int topic = a.z[m][i];
      const int word = a.tokens[m][i];
      const double th = model.theta(m, topic);
      const double ph = model.phi(topic, word);
      if (th == 0.0 || ph == 0.0) {
        out.zero_probability_conflict = true;
        out.value = -std::numeric_limits<double>::infinity();
        return out;
      }
      out.value += std::log(std::max(th, kLogClamp)) +
                   std::log(std::max(ph, kLogClamp));
    }
  }
  return out;
}

}  // namespace mis

#include "mis/hdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace mis {
namespace {

std::vector<std::vector<int>> expand_tokens(const Corpus& corpus) {
  std::unordered_map<std::string, int> index;
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

int alloc_slot(HdpState& s) {
  if (!s.free_slots.empty()) {
    const int slot = s.free_slots.back();
    s.free_slots.pop_back();
    s.live[slot] = 1;
    std::fill(s.slot_word_counts[slot].begin(), s.slot_word_counts[slot].end(),
              0);
    s.slot_totals[slot] = 0;
    return slot;
  }
  const int slot = static_cast<int>(s.live.size());
  s.live.push_back(1);
  s.slot_word_counts.emplace_back(s.vocab_size, 0);
  s.slot_totals.push_back(0);
  s.eta.push_back(0.0);
  for (auto& per_doc : s.doc_slot_counts) per_doc.push_back(0);
  return slot;
}

void kill_slot(HdpState& s, int slot) {
  s.live[slot] = 0;
  s.eta_new += s.eta[slot];
  s.eta[slot] = 0.0;
  s.free_slots.push_back(slot);
  --s.live_count;
}

/// Redraw the global weights: per live topic, sample its table count via
/// the Antoniak scheme (t = sum_j Bernoulli(a / (a + j)) with
/// a = alpha0 * eta_k over that doc's n_mk customers), then
/// eta ~ Dirichlet(t_1, ..., t_K, gamma) with the last component as the
/// new-topic remainder.
void resample_eta(HdpState& s, const HdpConfig& config, Rng& rng) {
  const int n_slots = static_cast<int>(s.live.size());
  std::vector<double> tables(n_slots, 0.0);
  for (const auto& doc_counts : s.doc_slot_counts) {
    for (int slot = 0; slot < n_slots; ++slot) {
      const int n = doc_counts[slot];
      if (n == 0 || !s.live[slot]) continue;
      const double a = config.alpha0 * std::max(s.eta[slot], 1e-300);
      int t = 0;
      for (int j = 0; j < n; ++j)
        if (rng.uniform() < a / (a + j)) ++t;
      tables[slot] += t;
    }
  }

  std::vector<double> alpha;
  std::vector<int> order;
  alpha.reserve(s.live_count + 1);
  order.reserve(s.live_count);
  for (int slot = 0; slot < n_slots; ++slot) {
    if (!s.live[slot]) continue;
    order.push_back(slot);
    alpha.push_back(std::max(tables[slot], 1.0));
  }
  alpha.push_back(config.gamma);

  const std::vector<double> draw = rng.dirichlet(alpha);
  for (std::size_t i = 0; i < order.size(); ++i) s.eta[order[i]] = draw[i];
  s.eta_new = draw.back();
}

}  // namespace

void HdpConfig::validate() const {
  if (!(gamma > 0.0) || !(alpha0 > 0.0) || !(word_prior > 0.0))
    throw std::invalid_argument("hdp: gamma, alpha0, word_prior must be > 0");
  if (burn_in < 0 || sweeps <= burn_in)
    throw std::invalid_argument("hdp: requires sweeps > burn_in >= 0");
  if (prune_threshold < 0.0 || prune_threshold >= 1.0)
    throw std::invalid_argument("hdp: prune_threshold must be in [0, 1)");
  if (k_max < 1) throw std::invalid_argument("hdp: k_max must be >= 1");
}

int HdpState::total_tokens() const {
  int n = 0;
  for (const auto& doc : tokens) n += static_cast<int>(doc.size());
  return n;
}

double HdpState::eta_sum() const {
  double s = eta_new;
  for (std::size_t i = 0; i < eta.size(); ++i)
    if (live[i]) s += eta[i];
  return s;
}

HdpState init_hdp_state(const Corpus& corpus, const HdpConfig& config,
                        Rng& rng) {
  HdpState s;
  s.vocab_size = static_cast<int>(corpus.vocab.size());
  s.tokens = expand_tokens(corpus);
  if (s.total_tokens() == 0)
    throw std::invalid_argument("hdp: corpus has no tokens");

  s.doc_slot_counts.assign(s.tokens.size(), {});
  const int slot = alloc_slot(s);  // everything starts in one topic
  s.live_count = 1;
  s.eta[slot] = 0.5;
  s.eta_new = 0.5;
  s.z.resize(s.tokens.size());
  for (std::size_t m = 0; m < s.tokens.size(); ++m) {
    s.z[m].assign(s.tokens[m].size(), slot);
    s.doc_slot_counts[m][slot] = static_cast<int>(s.tokens[m].size());
    for (int v : s.tokens[m]) ++s.slot_word_counts[slot][v];
    s.slot_totals[slot] += static_cast<int>(s.tokens[m].size());
  }
  resample_eta(s, config, rng);
  return s;
}

void hdp_sweep(HdpState& s, const HdpConfig& config, Rng& rng) {
  const double aw = config.word_prior;
  const double aw_total = aw * s.vocab_size;
  std::vector<double> weights;
  std::vector<int> slots;

  for (std::size_t m = 0; m < s.tokens.size(); ++m) {
    auto& doc_counts = s.doc_slot_counts[m];
    for (std::size_t i = 0; i < s.tokens[m].size(); ++i) {
      const int v = s.tokens[m][i];
      const int old_slot = s.z[m][i];
      --doc_counts[old_slot];
      --s.slot_word_counts[old_slot][v];
      if (--s.slot_totals[old_slot] == 0) kill_slot(s, old_slot);

      weights.clear();
      slots.clear();
      const int n_slots = static_cast<int>(s.live.size());
      for (int slot = 0; slot < n_slots; ++slot) {
        if (!s.live[slot]) continue;
        slots.push_back(slot);
        weights.push_back(
            (doc_counts[slot] + config.alpha0 * s.eta[slot]) *
            (s.slot_word_counts[slot][v] + aw) / (s.slot_totals[slot] + aw_total));
      }
      const bool allow_new = s.live_count < config.k_max;
      if (allow_new) {
        slots.push_back(-1);
        weights.push_back(config.alpha0 * s.eta_new / s.vocab_size);
      } else {
        s.k_max_hit = true;
      }

      int chosen = slots[rng.discrete(weights)];
      if (chosen == -1) {
        chosen = alloc_slot(s);
        ++s.live_count;
        const double b = rng.beta(1.0, config.gamma);
        s.eta[chosen] = b * s.eta_new;
        s.eta_new *= 1.0 - b;
      }
      s.z[m][i] = chosen;
      ++doc_counts[chosen];
      ++s.slot_word_counts[chosen][v];
      ++s.slot_totals[chosen];
    }
  }
  resample_eta(s, config, rng);
}

HdpResult fit_hdp(const Corpus& corpus, const HdpConfig& config) {
  config.validate();
  if (corpus.docs.empty()) throw std::invalid_argument("hdp: empty corpus");

  Rng rng(config.seed);
  HdpState s = init_hdp_state(corpus, config, rng);
  for (int sweep = 0; sweep < config.sweeps; ++sweep)
    hdp_sweep(s, config, rng);

  // Final-state estimates: smoothed counts for phi, token fractions for
  // mass, the last eta draw for global weights.
  const double total = s.total_tokens();
  const double aw = config.word_prior;
  const double aw_total = aw * s.vocab_size;

  std::vector<int> order;
  for (int slot = 0; slot < static_cast<int>(s.live.size()); ++slot)
    if (s.live[slot]) order.push_back(slot);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return s.slot_totals[a] > s.slot_totals[b];
  });

  HdpResult result;
  result.vocab = corpus.vocab;
  result.k_max_hit = s.k_max_hit;
  result.k_found = static_cast<int>(order.size());
  result.phi = Matrix(result.k_found, s.vocab_size);
  for (int r = 0; r < result.k_found; ++r) {
    const int slot = order[r];
    result.topic_masses.push_back(s.slot_totals[slot] / total);
    result.eta.push_back(s.eta[slot]);
    for (int v = 0; v < s.vocab_size; ++v)
      result.phi(r, v) =
          (s.slot_word_counts[slot][v] + aw) / (s.slot_totals[slot] + aw_total);
  }
  double eta_total = std::accumulate(result.eta.begin(), result.eta.end(), 0.0);
  for (double& e : result.eta) e /= eta_total;

  return prune_topics(result, config.prune_threshold);
}

HdpResult prune_topics(const HdpResult& result, double threshold) {
  if (threshold < 0.0 || threshold >= 1.0)
    throw std::invalid_argument("prune_topics: threshold must be in [0, 1)");

  std::vector<int> keep;
  for (int k = 0; k < result.k_found; ++k)
    if (result.topic_masses[k] >= threshold) keep.push_back(k);
  if (keep.empty())
    throw std::runtime_error("prune_topics: threshold removes every topic");
  if (static_cast<int>(keep.size()) == result.k_found) return result;

  HdpResult pruned;
  pruned.vocab = result.vocab;
  pruned.k_max_hit = result.k_max_hit;
  pruned.k_found = static_cast<int>(keep.size());
  pruned.phi = Matrix(pruned.k_found, result.phi.cols);
  double eta_total = 0.0;
  for (int r = 0; r < pruned.k_found; ++r) {
    const int src = keep[r];
    pruned.topic_masses.push_back(result.topic_masses[src]);
    pruned.eta.push_back(result.eta[src]);
    eta_total += result.eta[src];
    for (int v = 0; v < result.phi.cols; ++v)
      pruned.phi(r, v) = result.phi(src, v);
  }
  for (double& e : pruned.eta) e /= eta_total;
  return pruned;
}

}  // namespace mis

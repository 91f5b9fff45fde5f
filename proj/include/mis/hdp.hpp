#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mis/grid.hpp"
#include "mis/rng.hpp"
#include "mis/textprep.hpp"

namespace mis {

struct HdpConfig {
  double gamma = 1.0;        // top-level concentration; higher -> higher K
  double alpha0 = 1.0;       // document-level concentration
  double word_prior = 0.25;  // symmetric prior over the vocabulary
  int sweeps = 200;
  int burn_in = 100;
  std::uint64_t seed = 0;
  double prune_threshold = 0.01;  // minimum token mass to keep a topic
  int k_max = 200;                // computational cap; hitting it is a warning

  void validate() const;
};

/// Direct-assignment sampler state. Topics live in slots; a slot whose
/// last token is removed dies and its global weight folds back into the
/// new-topic remainder.
struct HdpState {
  std::vector<std::vector<int>> tokens;  // word id per token, per doc
  std::vector<std::vector<int>> z;       // slot per token
  std::vector<char> live;                // slot liveness
  std::vector<std::vector<int>> slot_word_counts;  // per slot, length V
  std::vector<int> slot_totals;
  std::vector<std::vector<int>> doc_slot_counts;  // per doc, per slot
  std::vector<double> eta;                        // per slot; 0 when dead
  double eta_new = 1.0;                           // new-topic remainder
  int live_count = 0;
  int vocab_size = 0;
  bool k_max_hit = false;
  std::vector<int> free_slots;

  int total_tokens() const;
  /// eta over live slots plus eta_new; 1 up to rounding.
  double eta_sum() const;
};

struct HdpResult {
  int k_found = 0;
  Matrix phi;                        // k_found x V, row-stochastic
  std::vector<double> eta;           // global weights over kept topics
  std::vector<double> topic_masses;  // fraction of tokens per topic
  std::vector<std::string> vocab;
  bool k_max_hit = false;
};

HdpState init_hdp_state(const Corpus& corpus, const HdpConfig& config,
                        Rng& rng);

/// One full pass: every token resampled against existing topics plus the
/// new-topic option, then eta redrawn from Antoniak table counts.
void hdp_sweep(HdpState& state, const HdpConfig& config, Rng& rng);

/// Fit on a nonempty corpus; topics below prune_threshold token mass are
/// dropped from the result.
HdpResult fit_hdp(const Corpus& corpus, const HdpConfig& config);

/// Drop topics with token mass below threshold and renormalize eta.
/// Rejects thresholds that would remove every topic.
HdpResult prune_topics(const HdpResult& result, double threshold);

}  // namespace mis

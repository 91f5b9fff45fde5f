#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mis/hdp.hpp"
#include "support/planted.hpp"

using namespace mis;
using namespace mis::test;

namespace {

Corpus one_word_corpus(int docs, int tokens_per_doc) {
  std::vector<std::pair<std::string, BagOfWords>> bags;
  for (int d = 0; d < docs; ++d) {
    BagOfWords bag;
    bag.add("only", tokens_per_doc);
    bags.emplace_back("d" + std::to_string(d), std::move(bag));
  }
  return corpus_from_bags(bags);
}

HdpResult synthetic_result(std::vector<double> masses) {
  HdpResult r;
  r.k_found = static_cast<int>(masses.size());
  r.topic_masses = masses;
  r.eta = masses;
  r.phi = Matrix(r.k_found, 4, 0.25);
  r.vocab = {"a", "b", "c", "d"};
  return r;
}

}  // namespace

TEST_CASE("identical one-word documents collapse to a single topic") {
  // Large enough that prior-driven stragglers sit below the mass prune.
  HdpConfig config;
  config.sweeps = 60;
  config.burn_in = 30;
  config.seed = 12;
  const HdpResult r = fit_hdp(one_word_corpus(300, 60), config);
  CHECK(r.k_found == 1);
  CHECK(r.topic_masses[0] == doctest::Approx(1.0));
  CHECK(r.eta[0] == doctest::Approx(1.0));
}

TEST_CASE("empty corpora are rejected") {
  HdpConfig config;
  CHECK_THROWS_AS(fit_hdp(Corpus{}, config), std::invalid_argument);

  Corpus no_tokens;
  no_tokens.vocab = {"x"};
  no_tokens.docs.emplace_back("empty", BagOfWords{});
  CHECK_THROWS_AS(fit_hdp(no_tokens, config), std::invalid_argument);
}

TEST_CASE("state invariants hold across sweeps") {
  const PlantedModel p = make_planted(3, 18, 40, 30, 99);
  HdpConfig config;
  config.seed = 5;
  Rng rng(config.seed);
  HdpState state = init_hdp_state(p.corpus, config, rng);
  const int total = state.total_tokens();

  for (int sweep = 0; sweep < 30; ++sweep) {
    hdp_sweep(state, config, rng);
    CHECK(state.eta_sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(state.eta_new > 0.0);

    int live_total = 0;
    for (std::size_t slot = 0; slot < state.live.size(); ++slot) {
      if (!state.live[slot]) continue;
      CHECK(state.slot_totals[slot] > 0);
      live_total += state.slot_totals[slot];
      int word_sum = std::accumulate(state.slot_word_counts[slot].begin(),
                                     state.slot_word_counts[slot].end(), 0);
      CHECK(word_sum == state.slot_totals[slot]);
    }
    CHECK(live_total == total);
    for (std::size_t m = 0; m < state.z.size(); ++m)
      for (int zi : state.z[m]) CHECK(state.live[zi] == 1);
  }
}

TEST_CASE("fits are seed-deterministic") {
  const PlantedModel p = make_planted(3, 18, 30, 25, 7);
  HdpConfig config;
  config.sweeps = 60;
  config.burn_in = 30;
  config.seed = 41;
  const HdpResult a = fit_hdp(p.corpus, config);
  const HdpResult b = fit_hdp(p.corpus, config);
  CHECK(a.k_found == b.k_found);
  CHECK(a.phi.data == b.phi.data);
  CHECK(a.eta == b.eta);
  CHECK(a.topic_masses == b.topic_masses);
}

TEST_CASE("planted topic count is discovered within tolerance") {
  const PlantedModel p = make_planted(5, 50, 500, 100, 2024);
  int in_bracket = 0;
  for (int s = 0; s < 10; ++s) {
    HdpConfig config;
    config.sweeps = 150;
    config.burn_in = 75;
    config.seed = static_cast<std::uint64_t>(300 + s);
    const HdpResult r = fit_hdp(p.corpus, config);
    CHECK(r.k_found >= 1);
    CHECK(r.k_found <= p.corpus.total_tokens());
    in_bracket += (r.k_found >= 4 && r.k_found <= 8);
  }
  CHECK(in_bracket >= 8);
}

TEST_CASE("higher gamma finds at least as many topics on average") {
  const PlantedModel p = make_planted(5, 50, 200, 60, 17);
  auto mean_k = [&](double gamma) {
    double total = 0.0;
    for (int s = 0; s < 10; ++s) {
      HdpConfig config;
      config.gamma = gamma;
      config.sweeps = 100;
      config.burn_in = 50;
      config.seed = static_cast<std::uint64_t>(600 + s);
      total += fit_hdp(p.corpus, config).k_found;
    }
    return total / 10.0;
  };
  CHECK(mean_k(10.0) >= mean_k(0.1));
}

TEST_CASE("topic cap is enforced and reported") {
  const PlantedModel p = make_planted(5, 50, 100, 40, 3);
  HdpConfig config;
  config.sweeps = 40;
  config.burn_in = 20;
  config.k_max = 2;
  config.seed = 9;
  const HdpResult r = fit_hdp(p.corpus, config);
  CHECK(r.k_found <= 2);
  CHECK(r.k_max_hit);
}

TEST_CASE("prune_topics filters by mass") {
  const HdpResult r = synthetic_result({0.6, 0.39, 0.01});

  SUBCASE("threshold zero is the identity") {
    const HdpResult pruned = prune_topics(r, 0.0);
    CHECK(pruned.k_found == 3);
    CHECK(pruned.eta == r.eta);
    CHECK(pruned.topic_masses == r.topic_masses);
  }

  SUBCASE("small topics drop and eta renormalizes") {
    const HdpResult pruned = prune_topics(r, 0.05);
    CHECK(pruned.k_found == 2);
    CHECK(pruned.topic_masses == std::vector<double>{0.6, 0.39});
    const double eta_sum =
        std::accumulate(pruned.eta.begin(), pruned.eta.end(), 0.0);
    CHECK(eta_sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pruned.eta[0] == doctest::Approx(0.6 / 0.99));
  }

  SUBCASE("removing every topic is an error") {
    CHECK_THROWS_AS(prune_topics(r, 0.7), std::runtime_error);
  }

  SUBCASE("threshold outside [0,1) is rejected") {
    CHECK_THROWS_AS(prune_topics(r, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(prune_topics(r, -0.1), std::invalid_argument);
  }
}

TEST_CASE("recovered topics resemble the planted ones") {
  const PlantedModel p = make_planted(5, 50, 300, 80, 77);
  HdpConfig config;
  config.sweeps = 150;
  config.burn_in = 75;
  config.seed = 21;
  const HdpResult r = fit_hdp(p.corpus, config);
  // Every planted topic should have a close match among the survivors.
  CHECK(mean_best_match_cosine(r.phi, p.phi) >= 0.85);
}

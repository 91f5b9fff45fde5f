#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mis/pipeline.hpp"
#include "mis/snapshot.hpp"
#include "support/planted.hpp"

using namespace mis;
using namespace mis::test;

namespace {

HdpResult member_from_rows(const std::vector<std::vector<double>>& rows,
                           const std::vector<double>& masses) {
  HdpResult r;
  r.k_found = static_cast<int>(rows.size());
  r.phi = Matrix(r.k_found, static_cast<int>(rows[0].size()));
  for (int k = 0; k < r.k_found; ++k)
    for (std::size_t v = 0; v < rows[k].size(); ++v) r.phi(k, v) = rows[k][v];
  r.topic_masses = masses;
  r.eta = masses;
  return r;
}

std::vector<std::vector<double>> block_rows(int k, int v, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix phi = planted_topics(k, v, rng);
  std::vector<std::vector<double>> rows;
  for (int t = 0; t < k; ++t)
    rows.emplace_back(phi.row(t).begin(), phi.row(t).end());
  return rows;
}

PipelineConfig fast_config() {
  PipelineConfig config;
  config.ensemble.members = 4;
  config.hdp.sweeps = 120;
  config.hdp.burn_in = 60;
  config.fit.sweeps = 250;
  config.fit.burn_in = 100;
  config.fit.thin = 5;
  config.master_seed = 20240601;
  return config;
}

}  // namespace

TEST_CASE("identical members reproduce their own topic set") {
  const auto rows = block_rows(4, 20, 3);
  const HdpResult member = member_from_rows(rows, {0.4, 0.3, 0.2, 0.1});
  EnsembleConfig config;
  config.members = 5;
  const auto consensus =
      match_topics(std::vector<HdpResult>(5, member), config);
  REQUIRE(consensus.size() == 4);
  // Consensus order is by mass here; each vector must equal a member row.
  for (std::size_t c = 0; c < consensus.size(); ++c) {
    double best = 0.0;
    for (const auto& row : rows)
      best = std::max(best, cosine(consensus[c], row));
    CHECK(best == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("a one-member noise topic misses the quorum") {
  const auto rows = block_rows(3, 24, 7);
  std::vector<HdpResult> members(3, member_from_rows(rows, {0.5, 0.3, 0.2}));

  // Orthogonal noise topic injected into one member only.
  std::vector<double> noise(24, 0.0);
  noise[23] = 1.0;
  auto noisy_rows = rows;
  noisy_rows.push_back(noise);
  members[1] = member_from_rows(noisy_rows, {0.45, 0.3, 0.2, 0.05});

  EnsembleConfig config;
  config.members = 3;
  config.quorum = 2;
  const auto consensus = match_topics(members, config);
  CHECK(consensus.size() == 3);
  for (const auto& vec : consensus)
    CHECK(cosine(vec, noise) < 0.2);
}

TEST_CASE("consensus ignores member-internal topic order") {
  const auto rows = block_rows(4, 20, 11);
  std::vector<HdpResult> members;
  members.push_back(member_from_rows(rows, {0.4, 0.3, 0.2, 0.1}));
  members.push_back(member_from_rows({rows[2], rows[0], rows[3], rows[1]},
                                     {0.2, 0.4, 0.1, 0.3}));
  members.push_back(member_from_rows({rows[3], rows[2], rows[1], rows[0]},
                                     {0.1, 0.2, 0.3, 0.4}));
  EnsembleConfig config;
  config.members = 3;

  const auto a = match_topics(members, config);
  std::swap(members[0], members[2]);
  const auto b = match_topics(members, config);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("raising the quorum never adds topics") {
  const auto rows = block_rows(4, 20, 13);
  std::vector<HdpResult> members;
  members.push_back(member_from_rows(rows, {0.4, 0.3, 0.2, 0.1}));
  members.push_back(
      member_from_rows({rows[0], rows[1]}, {0.6, 0.4}));  // partial member
  members.push_back(
      member_from_rows({rows[0], rows[2], rows[3]}, {0.5, 0.3, 0.2}));

  EnsembleConfig config;
  config.members = 3;
  std::size_t previous = 100;
  for (int quorum = 1; quorum <= 3; ++quorum) {
    config.quorum = quorum;
    const auto consensus = match_topics(members, config);
    CHECK(consensus.size() <= previous);
    previous = consensus.size();
  }

  config.quorum = 0;
  CHECK_THROWS_AS(match_topics({}, config), std::invalid_argument);
}

TEST_CASE("empirical prior arithmetic") {
  const int v = 10;
  SUBCASE("uniform consensus") {
    const std::vector<std::vector<double>> consensus = {
        std::vector<double>(v, 1.0 / v)};
    const DirichletPrior prior = build_empirical_prior(consensus, 100.0, v);
    CHECK(prior.k() == 1);
    for (int w = 0; w < v; ++w)
      CHECK(prior.alpha(0, w) == doctest::Approx(100.0 / v + 0.01).epsilon(1e-15));
    CHECK(prior.beta == std::vector<double>(1, 1.0));
  }
  SUBCASE("zero strength leaves the floor") {
    const std::vector<std::vector<double>> consensus = {
        std::vector<double>(v, 1.0 / v)};
    const DirichletPrior prior = build_empirical_prior(consensus, 0.0, v);
    for (int w = 0; w < v; ++w) CHECK(prior.alpha(0, w) == 0.01);
  }
  SUBCASE("row sums are strength + floor mass") {
    Rng rng(5);
    std::vector<std::vector<double>> consensus;
    for (int k = 0; k < 3; ++k)
      consensus.push_back(rng.dirichlet(std::vector<double>(v, 0.7)));
    const DirichletPrior prior = build_empirical_prior(consensus, 42.0, v);
    for (int k = 0; k < 3; ++k)
      CHECK(row_sum(prior.alpha, k) ==
            doctest::Approx(42.0 + 0.01 * v).epsilon(1e-9));
  }
  SUBCASE("empty consensus is rejected") {
    CHECK_THROWS_AS(build_empirical_prior({}, 10.0, v), std::invalid_argument);
  }
}

TEST_CASE("chain_prior applies the dilution transform") {
  Matrix posterior(2, 2);
  posterior(0, 0) = 4.0;
  posterior(0, 1) = 1.0;
  posterior(1, 0) = 9.0;
  posterior(1, 1) = 16.0;
  const std::vector<double> beta = {1.5, 2.5};

  SUBCASE("exponent one is the identity") {
    const DirichletPrior prior = chain_prior(posterior, beta, 1.0);
    CHECK(prior.alpha.data == posterior.data);
    CHECK(prior.beta == beta);
  }
  SUBCASE("square root halves the exponents") {
    const DirichletPrior prior = chain_prior(posterior, beta, 0.5);
    CHECK(prior.alpha(0, 0) == 2.0);
    CHECK(prior.alpha(0, 1) == 1.0);
    CHECK(prior.alpha(1, 0) == 3.0);
    CHECK(prior.alpha(1, 1) == 4.0);
  }
  SUBCASE("dilution pulls rows toward uniform") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      Matrix alpha(1, 6);
      for (double& x : alpha.data) x = 0.05 + 30.0 * rng.uniform();
      double lo = alpha.data[0], hi = alpha.data[0];
      for (double x : alpha.data) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      for (double exponent : {1.0, 0.7, 0.3, 0.05}) {
        const DirichletPrior prior = chain_prior(alpha, {1.0}, exponent);
        double plo = prior.alpha.data[0], phi_ = prior.alpha.data[0];
        for (double x : prior.alpha.data) {
          plo = std::min(plo, x);
          phi_ = std::max(phi_, x);
        }
        CHECK(phi_ / plo <= hi / lo * (1.0 + 1e-12));
      }
    }
  }
  SUBCASE("nonpositive entries are rejected") {
    Matrix bad(1, 2, 1.0);
    bad(0, 1) = 0.0;
    CHECK_THROWS_AS(chain_prior(bad, {1.0}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(chain_prior(posterior, beta, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(chain_prior(posterior, beta, 1.5), std::invalid_argument);
  }
}

TEST_CASE("discovery year recovers the planted structure") {
  const PlantedModel p = make_planted(5, 50, 300, 60, 414);
  const PipelineConfig config = fast_config();
  const YearSnapshot snapshot = run_year(p.corpus, nullptr, 2021, config);

  CHECK(snapshot.k >= 4);
  CHECK(snapshot.k <= 8);
  CHECK(mean_best_match_cosine(snapshot.model.phi, p.phi) >= 0.85);
  CHECK(snapshot.provenance.member_seeds.size() == 4);
  CHECK(snapshot.topic_labels.size() ==
        static_cast<std::size_t>(snapshot.k));
}

TEST_CASE("chained years stay aligned on stationary data") {
  const PlantedModel p = make_planted(5, 50, 300, 60, 515);
  const PipelineConfig config = fast_config();

  const YearSnapshot year1 = run_year(p.corpus, nullptr, 2021, config);
  const Corpus corpus2 = resample_corpus(p, 60, 99);
  const YearSnapshot year2 = run_year(corpus2, &year1, 2022, config);

  REQUIRE(year2.k == year1.k);
  for (int t = 0; t < year1.k; ++t)
    CHECK(cosine(year1.model.phi.row(t), year2.model.phi.row(t)) >= 0.95);
}

TEST_CASE("a drifted topic tracks its new distribution") {
  PlantedModel p = make_planted(4, 48, 300, 60, 616);
  const PipelineConfig config = fast_config();
  const YearSnapshot year1 = run_year(p.corpus, nullptr, 2021, config);

  // Year 2: topic 0's within-block profile is reshuffled.
  PlantedModel drifted = p;
  const int block = 48 / 4;
  std::vector<double> old_row(p.phi.row(0).begin(), p.phi.row(0).end());
  for (int j = 0; j < block; ++j)
    drifted.phi(0, j) = old_row[block - 1 - j];
  std::vector<double> new_row(drifted.phi.row(0).begin(),
                              drifted.phi.row(0).end());
  REQUIRE(cosine(old_row, new_row) < 0.9);

  const Corpus corpus2 = resample_corpus(drifted, 60, 77);
  const YearSnapshot year2 = run_year(corpus2, &year1, 2022, config);

  // Find the fitted index matching the planted topic 0 in year 1.
  int index = 0;
  double best = -1.0;
  for (int t = 0; t < year1.k; ++t) {
    const double cs = cosine(year1.model.phi.row(t), old_row);
    if (cs > best) {
      best = cs;
      index = t;
    }
  }
  REQUIRE(best >= 0.8);
  const auto fitted = year2.model.phi.row(index);
  CHECK(cosine(fitted, new_row) > cosine(fitted, old_row));
}

TEST_CASE("run_pipeline is causal and rejects year gaps") {
  const PlantedModel p = make_planted(3, 24, 80, 30, 717);
  PipelineConfig config = fast_config();
  config.ensemble.members = 3;
  config.hdp.sweeps = 60;
  config.hdp.burn_in = 30;
  config.fit.sweeps = 80;
  config.fit.burn_in = 30;
  config.fit.thin = 2;

  const Corpus year2a = resample_corpus(p, 30, 1);
  Corpus year2b = resample_corpus(p, 30, 2);
  // Scrambled variant: rotate bags across firms.
  std::rotate(year2b.docs.begin(), year2b.docs.begin() + 7, year2b.docs.end());
  for (std::size_t d = 0; d < year2b.docs.size(); ++d)
    year2b.docs[d].first = firm_name(static_cast<int>(d));

  const auto run_a =
      run_pipeline({{2021, p.corpus}, {2022, year2a}}, config);
  const auto run_b =
      run_pipeline({{2021, p.corpus}, {2022, year2b}}, config);
  REQUIRE(run_a.size() == 2);

  // Year-1 snapshots are bit-identical however year 2 looks.
  CHECK(snapshot_to_json(run_a[0]).dump() ==
        snapshot_to_json(run_b[0]).dump());

  // Same inputs twice: whole run is bit-identical.
  const auto run_c =
      run_pipeline({{2021, p.corpus}, {2022, year2a}}, config);
  CHECK(snapshot_to_json(run_a[1]).dump() ==
        snapshot_to_json(run_c[1]).dump());

  CHECK_THROWS_AS(run_pipeline({{2021, p.corpus}, {2023, year2a}}, config),
                  std::invalid_argument);
  config.allow_year_gaps = true;
  CHECK_NOTHROW(run_pipeline({{2021, p.corpus}, {2023, year2a}}, config));
}

TEST_CASE("chained vocabulary grows by union with floor pseudo-counts") {
  const PlantedModel p = make_planted(3, 24, 80, 30, 818);
  PipelineConfig config = fast_config();
  config.ensemble.members = 3;
  config.hdp.sweeps = 60;
  config.hdp.burn_in = 30;
  config.fit.sweeps = 80;
  config.fit.burn_in = 30;
  config.fit.thin = 2;

  const YearSnapshot year1 = run_year(p.corpus, nullptr, 2021, config);

  Corpus corpus2 = resample_corpus(p, 30, 5);
  corpus2.vocab.push_back("novelword");
  BagOfWords extra;
  extra.add("novelword", 3);
  corpus2.docs[0].second = extra;

  const YearSnapshot year2 = run_year(corpus2, &year1, 2022, config);
  CHECK(year2.model.vocab.size() == p.corpus.vocab.size() + 1);
  CHECK(year2.model.vocab.back() == "novelword");
  const int last = static_cast<int>(year2.model.vocab.size()) - 1;
  for (int t = 0; t < year2.k; ++t)
    CHECK(year2.prior.alpha(t, last) == 0.01);
}

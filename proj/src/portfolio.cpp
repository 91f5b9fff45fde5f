#include "mis/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace mis {

int ReturnsPanel::firm_index(const std::string& firm_id) const {
  for (int i = 0; i < static_cast<int>(firm_ids.size()); ++i)
    if (firm_ids[i] == firm_id) return i;
  return -1;
}

std::span<const double> ReturnsPanel::series(const std::string& firm_id) const {
  const int idx = firm_index(firm_id);
  if (idx < 0)
    throw std::invalid_argument("returns panel has no firm '" + firm_id + "'");
  return returns.row(idx);
}

void ReturnsPanel::validate() const {
  if (returns.rows != static_cast<int>(firm_ids.size()) ||
      returns.cols != static_cast<int>(dates.size()))
    throw std::invalid_argument("returns panel shape mismatch");
  std::unordered_set<std::string> seen;
  for (const auto& d : dates)
    if (!seen.insert(d).second)
      throw std::invalid_argument("returns panel has duplicated date " + d);
}

void SimilarityWeights::validate() const {
  if (text < 0.0 || returns < 0.0 || factors < 0.0)
    throw std::invalid_argument("similarity weights must be nonnegative");
  if (std::abs(text + returns + factors - 1.0) > 1e-9)
    throw std::invalid_argument("similarity weights must sum to 1");
}

double text_similarity(const IndustryMixture& a, const IndustryMixture& b) {
  if (a.theta.size() != b.theta.size())
    throw std::invalid_argument("text_similarity: mixture dimension mismatch");
  double overlap = 0.0;
  for (std::size_t k = 0; k < a.theta.size(); ++k)
    overlap += std::min(a.theta[k], b.theta[k]);
  return overlap;
}

double returns_correlation(std::span<const double> a,
                           std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("returns_correlation: length mismatch");
  const std::size_t n = a.size();
  if (n < 2)
    throw std::invalid_argument("returns_correlation: need at least 2 points");
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0)
    throw std::invalid_argument("returns_correlation: zero-variance series");
  return cov / std::sqrt(var_a * var_b);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: length mismatch");
  double num = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("cosine_similarity: zero vector");
  return num / std::sqrt(na * nb);
}

double composite_similarity(const FirmRecord& i, const FirmRecord& j,
                            const SimilarityWeights& weights,
                            const ReturnsPanel* panel) {
  weights.validate();
  double score = 0.0;
  if (weights.text > 0.0)
    score += weights.text * text_similarity(i.mixture, j.mixture);
  if (weights.returns > 0.0) {
    if (panel == nullptr)
      throw std::invalid_argument(
          "composite_similarity: returns weight set but no panel given");
    score += weights.returns *
             returns_correlation(panel->series(i.firm_id), panel->series(j.firm_id));
  }
  if (weights.factors > 0.0) {
    if (!i.factor_loadings || !j.factor_loadings)
      throw std::invalid_argument(
          "composite_similarity: factor weight set but loadings missing");
    score += weights.factors *
             cosine_similarity(*i.factor_loadings, *j.factor_loadings);
  }
  return score;
}

double dollar_exposure(const FirmRecord& firm, const std::string& theme) {
  if (firm.market_cap < 0.0)
    throw std::invalid_argument("dollar_exposure: negative market cap for " +
                                firm.firm_id);
  auto it = firm.relevance.scores.find(theme);
  if (it == firm.relevance.scores.end()) return 0.0;
  return firm.market_cap * it->second;
}

namespace {

/// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  int rho = 0;
  for (int i = 0; i < static_cast<int>(u.size()); ++i) {
    cumulative += u[i];
    const double candidate = (cumulative - 1.0) / (i + 1);
    if (u[i] - candidate > 0.0) {
      rho = i + 1;
      tau = candidate;
    }
  }
  (void)rho;
  for (double& x : v) x = std::max(x - tau, 0.0);
  return v;
}

}  // namespace

std::vector<double> mean_variance_weights(const Matrix& covariance) {
  const int n = covariance.rows;
  if (n < 1 || covariance.cols != n)
    throw std::invalid_argument("mean_variance_weights: covariance must be square");

  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(covariance(i, i)));
  const double tol = 1e-8 * std::max(scale, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(covariance(i, j) - covariance(j, i)) > tol)
        throw std::invalid_argument("mean_variance_weights: covariance not symmetric");

  // PSD check via pivoted Cholesky with tolerance.
  {
    Matrix chol = covariance;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = chol(i, j);
        for (int k = 0; k < j; ++k) s -= chol(i, k) * chol(j, k);
        if (i == j) {
          if (s < -tol)
            throw std::invalid_argument(
                "mean_variance_weights: covariance not positive semidefinite");
          chol(i, i) = std::sqrt(std::max(s, 0.0));
        } else {
          chol(i, j) = chol(j, j) > 0.0 ? s / chol(j, j) : 0.0;
        }
      }
    }
  }

  std::vector<double> w(n, 1.0 / n);
  if (n == 1) return w;

  // Step size from a spectral-norm upper bound (max absolute row sum).
  double lipschitz = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += std::abs(covariance(i, j));
    lipschitz = std::max(lipschitz, row);
  }
  if (lipschitz == 0.0) return w;
  const double step = 1.0 / (2.0 * lipschitz);

  std::vector<double> grad(n);
  for (int iter = 0; iter < 20000; ++iter) {
    for (int i = 0; i < n; ++i) {
      double g = 0.0;
      for (int j = 0; j < n; ++j) g += covariance(i, j) * w[j];
      grad[i] = 2.0 * g;
    }
    std::vector<double> next(n);
    for (int i = 0; i < n; ++i) next[i] = w[i] - step * grad[i];
    next = project_simplex(std::move(next));
    double delta = 0.0;
    for (int i = 0; i < n; ++i) delta = std::max(delta, std::abs(next[i] - w[i]));
    w = std::move(next);
    if (delta < 1e-12) break;
  }
  return w;
}

ThematicPortfolio thematic_portfolio(const std::vector<FirmRecord>& universe,
                                     const std::string& theme, int n,
                                     const Matrix* covariance) {
  if (n < 1) throw std::invalid_argument("thematic_portfolio: n must be >= 1");
  if (universe.empty())
    throw std::invalid_argument("thematic_portfolio: empty universe");
  if (covariance != nullptr &&
      (covariance->rows != static_cast<int>(universe.size()) ||
       covariance->cols != static_cast<int>(universe.size())))
    throw std::invalid_argument(
        "thematic_portfolio: covariance must align with the universe");

  struct Candidate {
    int index;
    double exposure;
  };
  std::vector<Candidate> candidates;
  for (int i = 0; i < static_cast<int>(universe.size()); ++i) {
    const double exposure = dollar_exposure(universe[i], theme);
    if (exposure > 0.0) candidates.push_back({i, exposure});
  }

  ThematicPortfolio portfolio;
  if (candidates.empty()) {
    portfolio.warnings.push_back("no firm has positive exposure to '" + theme +
                                 "'");
    return portfolio;
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](const Candidate& a, const Candidate& b) {
              if (a.exposure != b.exposure) return a.exposure > b.exposure;
              return universe[a.index].firm_id < universe[b.index].firm_id;
            });
  if (static_cast<int>(candidates.size()) < n)
    portfolio.warnings.push_back(
        "only " + std::to_string(candidates.size()) + " firms have positive exposure (requested " +
        std::to_string(n) + ")");
  else
    candidates.resize(n);

  std::vector<double> weights;
  if (covariance != nullptr) {
    Matrix sub(static_cast<int>(candidates.size()),
               static_cast<int>(candidates.size()));
    for (std::size_t r = 0; r < candidates.size(); ++r)
      for (std::size_t c = 0; c < candidates.size(); ++c)
        sub(static_cast<int>(r), static_cast<int>(c)) =
            (*covariance)(candidates[r].index, candidates[c].index);
    weights = mean_variance_weights(sub);
  } else {
    weights.assign(candidates.size(), 1.0 / candidates.size());
  }

  for (std::size_t i = 0; i < candidates.size(); ++i)
    portfolio.holdings.push_back({universe[candidates[i].index].firm_id,
                                  weights[i], candidates[i].exposure});
  return portfolio;
}

NeighborList nearest_neighbors(const FirmRecord& firm,
                               const std::vector<FirmRecord>& universe,
                               const SimilarityWeights& weights,
                               const ReturnsPanel* panel, int n) {
  if (n < 1) throw std::invalid_argument("nearest_neighbors: n must be >= 1");
  bool found = false;
  for (const auto& candidate : universe)
    if (candidate.firm_id == firm.firm_id) found = true;
  if (!found)
    throw std::invalid_argument("nearest_neighbors: firm '" + firm.firm_id +
                                "' is not in the universe");

  NeighborList out;
  if (universe.size() == 1) {
    out.warnings.push_back("universe has no candidates besides the firm");
    return out;
  }

  std::vector<RankedFirm> ranked;
  for (const auto& candidate : universe) {
    if (candidate.firm_id == firm.firm_id) continue;  // always excluded
    ranked.push_back(
        {candidate.firm_id, composite_similarity(firm, candidate, weights, panel)});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedFirm& a, const RankedFirm& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.firm_id < b.firm_id;
            });
  if (static_cast<int>(ranked.size()) > n) ranked.resize(n);
  out.neighbors = std::move(ranked);
  return out;
}

GroupStats summarize(std::vector<double> values) {
  GroupStats stats;
  stats.count = static_cast<int>(values.size());
  if (values.empty()) return stats;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    // Linear interpolation between order statistics.
    const double pos = q * (values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  stats.q1 = quantile(0.25);
  stats.median = quantile(0.5);
  stats.q3 = quantile(0.75);
  return stats;
}

EvalReport oos_test(const std::vector<FirmRecord>& universe,
                    const ReturnsPanel& panel_train,
                    const ReturnsPanel& panel_test,
                    const SimilarityWeights& weights, int n_neighbors) {
  weights.validate();
  panel_train.validate();
  panel_test.validate();
  if (panel_test.dates.empty())
    throw std::invalid_argument("oos_test: empty test window");

  auto peer_series = [&](const std::vector<std::string>& peers) {
    std::vector<double> series(panel_test.dates.size(), 0.0);
    for (const auto& peer : peers) {
      const auto r = panel_test.series(peer);
      for (std::size_t d = 0; d < series.size(); ++d) series[d] += r[d];
    }
    for (double& x : series) x /= static_cast<double>(peers.size());
    return series;
  };

  EvalReport report;
  std::map<std::string, std::vector<double>> sector_diffs;
  std::map<std::string, std::vector<double>> industry_diffs;

  for (const auto& firm : universe) {
    std::vector<std::string> gics_peers;
    for (const auto& candidate : universe) {
      if (candidate.firm_id == firm.firm_id) continue;
      if (candidate.gics_industry == firm.gics_industry)
        gics_peers.push_back(candidate.firm_id);
    }
    if (gics_peers.empty()) {
      report.skipped.push_back(firm.firm_id + ": no GICS peers");
      continue;
    }
    if (!panel_test.has_firm(firm.firm_id)) {
      report.skipped.push_back(firm.firm_id + ": missing from test panel");
      continue;
    }

    NeighborList mis = nearest_neighbors(firm, universe, weights, &panel_train,
                                         n_neighbors);
    if (mis.neighbors.empty()) {
      report.skipped.push_back(firm.firm_id + ": no MIS neighbors");
      continue;
    }

    FirmEval eval;
    eval.firm_id = firm.firm_id;
    for (const auto& neighbor : mis.neighbors)
      eval.mis_peers.push_back(neighbor.firm_id);
    eval.gics_peers = gics_peers;

    const auto firm_series = panel_test.series(firm.firm_id);
    const std::vector<double> mis_series = peer_series(eval.mis_peers);
    const std::vector<double> gics_series = peer_series(eval.gics_peers);
    eval.mis_corr = returns_correlation(firm_series, mis_series);
    eval.gics_corr = returns_correlation(firm_series, gics_series);
    eval.diff = eval.mis_corr - eval.gics_corr;

    sector_diffs[firm.gics_sector].push_back(eval.diff);
    industry_diffs[firm.gics_industry].push_back(eval.diff);
    report.per_firm.push_back(std::move(eval));
  }

  for (auto& [sector, diffs] : sector_diffs)
    report.by_sector[sector] = summarize(std::move(diffs));
  for (auto& [industry, diffs] : industry_diffs)
    report.by_industry[industry] = summarize(std::move(diffs));
  return report;
}

}  // namespace mis

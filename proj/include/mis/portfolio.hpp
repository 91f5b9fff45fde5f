#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mis/grid.hpp"
#include "mis/lda.hpp"
#include "mis/network.hpp"

namespace mis {

struct FirmRecord {
  std::string firm_id;
  double market_cap = 0.0;
  std::string gics_sector;
  std::string gics_industry;
  IndustryMixture mixture;
  RelevanceScores relevance;
  std::optional<std::vector<double>> factor_loadings;
};

/// Aligned periodic return series, one row per firm.
struct ReturnsPanel {
  std::vector<std::string> dates;
  std::vector<std::string> firm_ids;
  Matrix returns;  // firms x dates

  int firm_index(const std::string& firm_id) const;
  bool has_firm(const std::string& firm_id) const {
    return firm_index(firm_id) >= 0;
  }
  std::span<const double> series(const std::string& firm_id) const;
  void validate() const;
};

struct SimilarityWeights {
  double text = 1.0 / 3.0;
  double returns = 1.0 / 3.0;
  double factors = 1.0 / 3.0;

  void validate() const;  // nonnegative, summing to 1 within 1e-9
};

/// Mixture overlap sum_k min(theta_i, theta_j); 1 iff identical.
double text_similarity(const IndustryMixture& a, const IndustryMixture& b);

/// Pearson correlation of two aligned series (length >= 2, nonzero
/// variance).
double returns_correlation(std::span<const double> a,
                           std::span<const double> b);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// weights.text * overlap + weights.returns * return correlation +
/// weights.factors * loading cosine. Components with zero weight may be
/// missing; components with positive weight must be available.
double composite_similarity(const FirmRecord& i, const FirmRecord& j,
                            const SimilarityWeights& weights,
                            const ReturnsPanel* panel);

/// market_cap * relevance[theme]; a theme absent from the relevance map
/// scores zero.
double dollar_exposure(const FirmRecord& firm, const std::string& theme);

struct Holding {
  std::string firm_id;
  double weight = 0.0;
  double exposure = 0.0;
};

struct ThematicPortfolio {
  std::vector<Holding> holdings;
  std::vector<std::string> warnings;
};

/// Top-n firms by dollar exposure (ties by firm_id), weighted by
/// minimum-variance when a covariance over the universe is supplied,
/// equal-weighted otherwise.
ThematicPortfolio thematic_portfolio(const std::vector<FirmRecord>& universe,
                                     const std::string& theme, int n = 50,
                                     const Matrix* covariance = nullptr);

/// Long-only minimum-variance weights: min w'Cw s.t. w >= 0, sum w = 1,
/// by projected gradient descent from the equal-weight start (which is
/// also the documented tie rule for degenerate covariances).
std::vector<double> mean_variance_weights(const Matrix& covariance);

struct RankedFirm {
  std::string firm_id;
  double score = 0.0;
};

struct NeighborList {
  std::vector<RankedFirm> neighbors;
  std::vector<std::string> warnings;
};

/// Top-n by composite similarity, excluding the firm itself; ties by
/// firm_id.
NeighborList nearest_neighbors(const FirmRecord& firm,
                               const std::vector<FirmRecord>& universe,
                               const SimilarityWeights& weights,
                               const ReturnsPanel* panel, int n = 50);

struct FirmEval {
  std::string firm_id;
  double mis_corr = 0.0;
  double gics_corr = 0.0;
  double diff = 0.0;  // mis_corr - gics_corr
  std::vector<std::string> mis_peers;
  std::vector<std::string> gics_peers;
};

struct GroupStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  int count = 0;
};

struct EvalReport {
  std::vector<FirmEval> per_firm;
  std::map<std::string, GroupStats> by_sector;
  std::map<std::string, GroupStats> by_industry;
  std::vector<std::string> skipped;  // firm id + reason
};

GroupStats summarize(std::vector<double> values);

/// Out-of-sample comparison: per firm, MIS peers are the nearest
/// neighbors on train-period data and GICS peers share the firm's GICS
/// industry; both peer portfolios are equal-weighted and correlated
/// against the firm over the test period.
EvalReport oos_test(const std::vector<FirmRecord>& universe,
                    const ReturnsPanel& panel_train,
                    const ReturnsPanel& panel_test,
                    const SimilarityWeights& weights, int n_neighbors = 50);

}  // namespace mis

#pragma once

#include <map>
#include <string>
#include <vector>

#include "mis/network.hpp"
#include "mis/portfolio.hpp"
#include "mis/textprep.hpp"

namespace mis {

/// One JSON record per line, either {"firm_id", "text"} or
/// {"firm_id", "counts": {keyphrase: n}}. Text records require a lexicon.
Corpus load_corpus_jsonl(const std::string& path,
                         const SemanticLexicon* lexicon = nullptr,
                         CorpusBuildReport* report = nullptr);
void save_corpus_jsonl(const std::string& path, const Corpus& corpus);

/// Delimited panel: header "date,<firm>,<firm>,...", one row per date.
ReturnsPanel load_returns_csv(const std::string& path);

/// Restrict a panel to dates whose year falls in [first, last].
ReturnsPanel slice_panel_years(const ReturnsPanel& panel, int first, int last);

struct GicsEntry {
  std::string sector;
  std::string industry;
};

/// Delimited map: firm_id,sector,industry (header optional).
std::map<std::string, GicsEntry> load_gics_csv(const std::string& path);

/// Delimited map: firm_id,market_cap (header optional).
std::map<std::string, double> load_caps_csv(const std::string& path);

/// Delimited map: firm_id,f1,f2,... (header optional).
std::map<std::string, std::vector<double>> load_loadings_csv(
    const std::string& path);

struct LabeledCovariance {
  std::vector<std::string> firm_ids;
  Matrix matrix;
};

/// Square matrix with a firm-id header row and leading id column.
LabeledCovariance load_covariance_csv(const std::string& path);

/// Per-firm relevance card: ranked (label, score) records plus a
/// plain-text table.
void write_cards_jsonl(const std::string& path,
                       const std::vector<RelevanceScores>& cards);
std::string render_card_table(const RelevanceScores& card, int top_n = 15);

/// Minimal SVG box plot, one box per labeled group (quartile box, median
/// line, min/max whiskers).
void write_boxplot_svg(
    const std::string& path, const std::string& title,
    const std::vector<std::pair<std::string, std::vector<double>>>& groups);

}  // namespace mis

#include "mis/commands.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "mis/io.hpp"
#include "mis/network.hpp"
#include "mis/snapshot.hpp"

namespace fs = std::filesystem;

namespace mis::cli {
namespace {

void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw std::invalid_argument("output directory not set");
  fs::create_directories(dir);
}

void write_command_manifest(const std::string& out_dir,
                            const std::string& command, const Json& inputs,
                            const Json& options) {
  write_json_file((fs::path(out_dir) / "manifest.json").string(),
                  Json{{"schema", "mis.cmdrun/1"},
                       {"command", command},
                       {"inputs", inputs},
                       {"options", options}});
}

/// Firm universe out of a snapshot plus side tables. Relevance comes from
/// the network adjustment when a network is given, raw theta otherwise.
std::vector<FirmRecord> build_universe(
    const YearSnapshot& snapshot, const IndustryNetwork* network,
    const std::map<std::string, GicsEntry>* gics,
    const std::map<std::string, double>* caps,
    const std::map<std::string, std::vector<double>>* loadings) {
  const LdaModel& model = snapshot.model;
  std::vector<FirmRecord> universe;
  universe.reserve(model.firm_ids.size());
  for (int m = 0; m < static_cast<int>(model.firm_ids.size()); ++m) {
    FirmRecord firm;
    firm.firm_id = model.firm_ids[m];
    firm.mixture.firm_id = firm.firm_id;
    firm.mixture.theta.assign(model.theta.row(m).begin(),
                              model.theta.row(m).end());
    if (network != nullptr) {
      firm.relevance = adjust(firm.mixture, snapshot.topic_labels, *network);
    } else {
      firm.relevance.firm_id = firm.firm_id;
      for (int k = 0; k < snapshot.k; ++k)
        firm.relevance.scores[snapshot.topic_labels[k]] = firm.mixture.theta[k];
    }
    if (gics != nullptr) {
      auto it = gics->find(firm.firm_id);
      if (it != gics->end()) {
        firm.gics_sector = it->second.sector;
        firm.gics_industry = it->second.industry;
      }
    }
    if (caps != nullptr) {
      auto it = caps->find(firm.firm_id);
      if (it != caps->end()) firm.market_cap = it->second;
    }
    if (loadings != nullptr) {
      auto it = loadings->find(firm.firm_id);
      if (it != loadings->end()) firm.factor_loadings = it->second;
    }
    universe.push_back(std::move(firm));
  }
  return universe;
}

SimilarityWeights default_weights(bool have_returns, bool have_loadings) {
  if (have_returns && have_loadings) return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  if (have_returns) return {0.5, 0.5, 0.0};
  return {1.0, 0.0, 0.0};
}

}  // namespace

void cmd_prep(const PrepOptions& options) {
  if (options.docs_path.empty() || options.lexicon_path.empty())
    throw std::invalid_argument("prep needs --docs and --lexicon");
  ensure_dir(options.out_dir);

  const SemanticLexicon lexicon = SemanticLexicon::load(options.lexicon_path);
  CorpusBuildReport report;
  const Corpus corpus =
      load_corpus_jsonl(options.docs_path, &lexicon, &report);
  if (corpus.docs.empty())
    throw std::invalid_argument("prep: no documents in " + options.docs_path);

  const fs::path out(options.out_dir);
  save_corpus_jsonl((out / "corpus.jsonl").string(), corpus);
  write_json_file(
      (out / "report.json").string(),
      Json{{"schema", "mis.prep/1"},
           {"documents", corpus.size()},
           {"vocabulary", corpus.vocab.size()},
           {"tokens_seen", report.stats.tokens_seen},
           {"tokens_kept", report.stats.tokens_kept},
           {"tokens_discarded", report.stats.tokens_discarded},
           {"empty_docs", report.empty_docs}});
  write_command_manifest(options.out_dir, "prep",
                         Json{{"docs", options.docs_path},
                              {"lexicon", options.lexicon_path}},
                         Json::object());
}

void cmd_fit(const FitOptions& options) {
  if (options.corpus_dir.empty())
    throw std::invalid_argument("fit needs --corpus-dir");
  if (options.year_first == 0 || options.year_last < options.year_first)
    throw std::invalid_argument("fit needs --years <first>:<last>");
  ensure_dir(options.out_dir);

  std::optional<SemanticLexicon> lexicon;
  if (!options.lexicon_path.empty())
    lexicon = SemanticLexicon::load(options.lexicon_path);

  std::map<int, Corpus> corpora;
  for (int year = options.year_first; year <= options.year_last; ++year) {
    const fs::path path =
        fs::path(options.corpus_dir) / (std::to_string(year) + ".jsonl");
    if (!fs::exists(path))
      throw std::invalid_argument("fit: missing corpus file " + path.string());
    corpora.emplace(year, load_corpus_jsonl(
                              path.string(),
                              lexicon.has_value() ? &*lexicon : nullptr));
  }

  const std::vector<YearSnapshot> snapshots =
      run_pipeline(corpora, options.pipeline);

  RunManifest manifest;
  manifest.config_digest = config_digest(options.pipeline);
  manifest.master_seed = options.pipeline.master_seed;
  const fs::path out(options.out_dir);
  for (const YearSnapshot& snapshot : snapshots) {
    const std::string name = "year_" + std::to_string(snapshot.year) + ".json";
    save_snapshot((out / name).string(), snapshot);
    manifest.years.push_back(snapshot.year);
    manifest.snapshot_files.push_back(name);
    for (const auto& warning : snapshot.provenance.warnings)
      manifest.warnings.push_back("year " + std::to_string(snapshot.year) +
                                  ": " + warning);
  }
  manifest.vocab = snapshots.back().model.vocab;
  save_manifest((out / "run.json").string(), manifest);
  write_command_manifest(options.out_dir, "fit",
                         Json{{"corpus_dir", options.corpus_dir},
                              {"lexicon", options.lexicon_path},
                              {"years", {options.year_first, options.year_last}}},
                         config_to_json(options.pipeline));
}

void cmd_adjust(const AdjustOptions& options) {
  if (options.snapshot_path.empty())
    throw std::invalid_argument("adjust needs --snapshot");
  ensure_dir(options.out_dir);
  const YearSnapshot snapshot = load_snapshot(options.snapshot_path);

  std::optional<IndustryNetwork> network;
  if (!options.network_path.empty()) {
    network = IndustryNetwork::load(options.network_path);
    const NetworkValidation check =
        validate_network(*network, snapshot.topic_labels);
    if (!check.passed) {
      std::string msg = "network validation failed:";
      for (const auto& failure : check.failures) msg += "\n  " + failure;
      throw std::invalid_argument(msg);
    }
  }

  const std::vector<FirmRecord> universe = build_universe(
      snapshot, network.has_value() ? &*network : nullptr, nullptr, nullptr,
      nullptr);

  std::vector<RelevanceScores> cards;
  for (const FirmRecord& firm : universe) {
    if (!options.firm_id.empty() && firm.firm_id != options.firm_id) continue;
    cards.push_back(threshold_scores(firm.relevance, options.cutoff));
  }
  if (cards.empty())
    throw std::invalid_argument("adjust: unknown firm id '" + options.firm_id +
                                "'");

  const fs::path out(options.out_dir);
  write_cards_jsonl((out / "cards.jsonl").string(), cards);
  std::ofstream table((out / "cards.txt").string());
  if (!table)
    throw std::runtime_error("cannot write " + (out / "cards.txt").string());
  for (const auto& card : cards) table << render_card_table(card) << '\n';
  write_command_manifest(options.out_dir, "adjust",
                         Json{{"snapshot", options.snapshot_path},
                              {"network", options.network_path}},
                         Json{{"firm", options.firm_id},
                              {"cutoff", options.cutoff}});
}

void cmd_similar(const SimilarOptions& options) {
  if (options.snapshot_path.empty() || options.firm_id.empty())
    throw std::invalid_argument("similar needs --snapshot and --firm");
  const YearSnapshot snapshot = load_snapshot(options.snapshot_path);

  std::optional<ReturnsPanel> panel;
  if (!options.returns_path.empty())
    panel = load_returns_csv(options.returns_path);
  std::map<std::string, std::vector<double>> loadings;
  if (!options.loadings_path.empty())
    loadings = load_loadings_csv(options.loadings_path);

  const SimilarityWeights weights = options.weights.value_or(
      default_weights(panel.has_value(), !loadings.empty()));
  weights.validate();

  const std::vector<FirmRecord> universe =
      build_universe(snapshot, nullptr, nullptr, nullptr,
                     loadings.empty() ? nullptr : &loadings);
  const FirmRecord* firm = nullptr;
  for (const auto& candidate : universe)
    if (candidate.firm_id == options.firm_id) firm = &candidate;
  if (firm == nullptr)
    throw std::invalid_argument("similar: unknown firm id '" +
                                options.firm_id + "'");

  const NeighborList neighbors =
      nearest_neighbors(*firm, universe, weights,
                        panel.has_value() ? &*panel : nullptr, options.n);

  Json ranked = Json::array();
  int rank = 1;
  for (const auto& neighbor : neighbors.neighbors)
    ranked.push_back(Json{{"firm_id", neighbor.firm_id},
                          {"score", neighbor.score},
                          {"rank", rank++}});
  write_json_file(options.out_path,
                  Json{{"schema", "mis.similar/1"},
                       {"firm_id", options.firm_id},
                       {"weights",
                        {{"text", weights.text},
                         {"returns", weights.returns},
                         {"factors", weights.factors}}},
                       {"neighbors", ranked},
                       {"warnings", neighbors.warnings}});
}

void cmd_thematic(const ThematicOptions& options) {
  if (options.snapshot_path.empty() || options.theme.empty() ||
      options.caps_path.empty())
    throw std::invalid_argument("thematic needs --snapshot, --theme, --caps");
  const YearSnapshot snapshot = load_snapshot(options.snapshot_path);

  std::optional<IndustryNetwork> network;
  if (!options.network_path.empty())
    network = IndustryNetwork::load(options.network_path);
  const std::map<std::string, double> caps = load_caps_csv(options.caps_path);

  std::vector<FirmRecord> universe =
      build_universe(snapshot, network.has_value() ? &*network : nullptr,
                     nullptr, &caps, nullptr);

  std::optional<Matrix> covariance;
  if (!options.covariance_path.empty()) {
    const LabeledCovariance labeled =
        load_covariance_csv(options.covariance_path);
    // Align with the universe order.
    Matrix aligned(static_cast<int>(universe.size()),
                   static_cast<int>(universe.size()));
    std::vector<int> pos(universe.size(), -1);
    for (std::size_t i = 0; i < universe.size(); ++i) {
      for (std::size_t j = 0; j < labeled.firm_ids.size(); ++j)
        if (labeled.firm_ids[j] == universe[i].firm_id)
          pos[i] = static_cast<int>(j);
      if (pos[i] < 0)
        throw std::invalid_argument("thematic: covariance is missing firm '" +
                                    universe[i].firm_id + "'");
    }
    for (std::size_t r = 0; r < universe.size(); ++r)
      for (std::size_t c = 0; c < universe.size(); ++c)
        aligned(static_cast<int>(r), static_cast<int>(c)) =
            labeled.matrix(pos[r], pos[c]);
    covariance = std::move(aligned);
  }

  const ThematicPortfolio portfolio = thematic_portfolio(
      universe, options.theme, options.n,
      covariance.has_value() ? &*covariance : nullptr);

  Json holdings = Json::array();
  for (const auto& holding : portfolio.holdings)
    holdings.push_back(Json{{"firm_id", holding.firm_id},
                            {"weight", holding.weight},
                            {"dollar_exposure", holding.exposure}});
  write_json_file(options.out_path, Json{{"schema", "mis.thematic/1"},
                                         {"theme", options.theme},
                                         {"holdings", holdings},
                                         {"warnings", portfolio.warnings}});
}

void cmd_evaluate(const EvaluateOptions& options) {
  if (options.snapshot_path.empty() || options.returns_path.empty() ||
      options.gics_path.empty())
    throw std::invalid_argument(
        "evaluate needs --snapshot, --returns and --gics");
  if (options.train_first == 0 || options.test_first == 0)
    throw std::invalid_argument("evaluate needs --train and --test ranges");
  if (options.test_first <= options.train_last)
    throw std::invalid_argument(
        "evaluate: test window must start after the train window");
  ensure_dir(options.out_dir);

  const YearSnapshot snapshot = load_snapshot(options.snapshot_path);
  const ReturnsPanel full = load_returns_csv(options.returns_path);
  const ReturnsPanel train =
      slice_panel_years(full, options.train_first, options.train_last);
  const ReturnsPanel test =
      slice_panel_years(full, options.test_first, options.test_last);
  if (train.dates.empty())
    throw std::invalid_argument("evaluate: train window has no dates");
  if (test.dates.empty())
    throw std::invalid_argument("evaluate: test window has no dates");

  const std::map<std::string, GicsEntry> gics = load_gics_csv(options.gics_path);
  std::map<std::string, std::vector<double>> loadings;
  if (!options.loadings_path.empty())
    loadings = load_loadings_csv(options.loadings_path);

  const SimilarityWeights weights =
      options.weights.value_or(default_weights(true, !loadings.empty()));
  weights.validate();

  std::vector<FirmRecord> universe =
      build_universe(snapshot, nullptr, &gics, nullptr,
                     loadings.empty() ? nullptr : &loadings);
  // Firms without GICS labels cannot enter the comparison.
  std::erase_if(universe, [](const FirmRecord& firm) {
    return firm.gics_industry.empty();
  });
  if (universe.empty())
    throw std::invalid_argument("evaluate: no firm has a GICS label");

  const EvalReport report =
      oos_test(universe, train, test, weights, options.n);

  const fs::path out(options.out_dir);
  {
    std::ofstream per_firm((out / "per_firm.jsonl").string());
    if (!per_firm) throw std::runtime_error("cannot write per_firm.jsonl");
    for (const auto& eval : report.per_firm)
      per_firm << Json{{"firm_id", eval.firm_id},
                       {"mis_corr", eval.mis_corr},
                       {"gics_corr", eval.gics_corr},
                       {"diff", eval.diff},
                       {"mis_peers", eval.mis_peers},
                       {"gics_peers", eval.gics_peers}}
                      .dump()
               << '\n';
  }

  auto stats_json = [](const std::map<std::string, GroupStats>& groups) {
    Json j = Json::object();
    for (const auto& [name, stats] : groups)
      j[name] = Json{{"median", stats.median},
                     {"q1", stats.q1},
                     {"q3", stats.q3},
                     {"count", stats.count}};
    return j;
  };
  write_json_file((out / "group_stats.json").string(),
                  Json{{"schema", "mis.eval/1"},
                       {"by_sector", stats_json(report.by_sector)},
                       {"by_industry", stats_json(report.by_industry)},
                       {"skipped", report.skipped}});

  // Boxplots of per-firm diff, grouped two ways.
  std::map<std::string, std::vector<double>> sector_diffs, industry_diffs;
  std::map<std::string, std::string> sector_of;
  for (const auto& firm : universe) sector_of[firm.firm_id] = firm.gics_sector;
  std::map<std::string, std::string> industry_of;
  for (const auto& firm : universe)
    industry_of[firm.firm_id] = firm.gics_industry;
  for (const auto& eval : report.per_firm) {
    sector_diffs[sector_of[eval.firm_id]].push_back(eval.diff);
    industry_diffs[industry_of[eval.firm_id]].push_back(eval.diff);
  }
  auto to_groups = [](const std::map<std::string, std::vector<double>>& byk) {
    std::vector<std::pair<std::string, std::vector<double>>> groups(
        byk.begin(), byk.end());
    return groups;
  };
  write_boxplot_svg((out / "diff_by_sector.svg").string(),
                    "MIS minus GICS correlation, by GICS sector",
                    to_groups(sector_diffs));
  write_boxplot_svg((out / "diff_by_industry.svg").string(),
                    "MIS minus GICS correlation, by GICS industry",
                    to_groups(industry_diffs));

  write_command_manifest(
      options.out_dir, "evaluate",
      Json{{"snapshot", options.snapshot_path},
           {"returns", options.returns_path},
           {"gics", options.gics_path},
           {"loadings", options.loadings_path}},
      Json{{"train", {options.train_first, options.train_last}},
           {"test", {options.test_first, options.test_last}},
           {"n", options.n},
           {"weights",
            {{"text", weights.text},
             {"returns", weights.returns},
             {"factors", weights.factors}}}});
}

}  // namespace mis::cli

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mis/commands.hpp"
#include "mis/snapshot.hpp"

namespace {

using mis::Json;

struct YearRange {
  int first = 0;
  int last = 0;
};

YearRange parse_year_range(const std::string& text) {
  YearRange range;
  const std::size_t colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      range.first = range.last = std::stoi(text);
    } else {
      range.first = std::stoi(text.substr(0, colon));
      range.last = std::stoi(text.substr(colon + 1));
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError("years", "expected <year> or <first>:<last>");
  }
  if (range.first <= 0 || range.last < range.first)
    throw CLI::ValidationError("years", "expected <year> or <first>:<last>");
  return range;
}

mis::SimilarityWeights parse_weights(const std::string& text) {
  mis::SimilarityWeights weights{};
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &weights.text, &weights.returns,
                  &weights.factors) != 3)
    throw CLI::ValidationError("weights", "expected <text>,<returns>,<factors>");
  return weights;
}

void emit_error(const char* type, const std::string& message) {
  std::cerr << Json{{"error", Json{{"type", type}, {"message", message}}}}.dump()
            << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-industry classification from business descriptions"};
  app.require_subcommand(1);

  // prep
  mis::cli::PrepOptions prep;
  CLI::App* prep_cmd =
      app.add_subcommand("prep", "Extract keyphrase bags from raw documents");
  prep_cmd->add_option("--docs", prep.docs_path, "JSONL of {firm_id, text}")
      ->required();
  prep_cmd->add_option("--lexicon", prep.lexicon_path, "Semantic lexicon file")
      ->required();
  prep_cmd->add_option("--out", prep.out_dir, "Output directory")->required();

  // fit
  mis::cli::FitOptions fit;
  std::string fit_years;
  std::string fit_config_path;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Fit the year-chained ensemble model");
  fit_cmd->add_option("--corpus-dir", fit.corpus_dir,
                      "Directory of <year>.jsonl corpora")
      ->required();
  fit_cmd->add_option("--years", fit_years, "<first>:<last>")->required();
  fit_cmd->add_option("--lexicon", fit.lexicon_path,
                      "Lexicon (only needed for raw-text corpora)");
  fit_cmd->add_option("--members", fit.pipeline.ensemble.members,
                      "HDP ensemble size");
  fit_cmd->add_option("--quorum", fit.pipeline.ensemble.quorum,
                      "Consensus quorum (default: majority)");
  fit_cmd->add_option("--seed", fit.pipeline.master_seed, "Master seed");
  fit_cmd->add_option("--sweeps", fit.pipeline.fit.sweeps, "LDA sweeps");
  fit_cmd->add_option("--hdp-sweeps", fit.pipeline.hdp.sweeps, "HDP sweeps");
  fit_cmd->add_option("--gamma", fit.pipeline.hdp.gamma,
                      "HDP top-level concentration");
  fit_cmd->add_option("--config", fit_config_path,
                      "JSON config; overrides flags");
  fit_cmd->add_option("--out", fit.out_dir, "Run directory")->required();

  // adjust
  mis::cli::AdjustOptions adjust;
  CLI::App* adjust_cmd = app.add_subcommand(
      "adjust", "Export network-adjusted relevance scores (baseball cards)");
  adjust_cmd->add_option("--snapshot", adjust.snapshot_path, "Year snapshot")
      ->required();
  adjust_cmd->add_option("--network", adjust.network_path,
                         "Industry network file");
  adjust_cmd->add_option("--firm", adjust.firm_id, "Only this firm");
  adjust_cmd->add_option("--cutoff", adjust.cutoff,
                         "Zero out scores below this");
  adjust_cmd->add_option("--out", adjust.out_dir, "Output directory")
      ->required();

  // similar
  mis::cli::SimilarOptions similar;
  std::string similar_weights;
  CLI::App* similar_cmd =
      app.add_subcommand("similar", "Rank a firm's nearest neighbors");
  similar_cmd->add_option("--snapshot", similar.snapshot_path, "Year snapshot")
      ->required();
  similar_cmd->add_option("--firm", similar.firm_id, "Query firm")->required();
  similar_cmd->add_option("--n", similar.n, "Neighbor count");
  similar_cmd->add_option("--returns", similar.returns_path,
                          "Returns panel CSV");
  similar_cmd->add_option("--loadings", similar.loadings_path,
                          "Factor loadings CSV");
  similar_cmd->add_option("--weights", similar_weights,
                          "text,returns,factors (default from inputs)");
  similar_cmd->add_option("--out", similar.out_path, "Output JSON")->required();

  // thematic
  mis::cli::ThematicOptions thematic;
  CLI::App* thematic_cmd =
      app.add_subcommand("thematic", "Build a thematic portfolio");
  thematic_cmd
      ->add_option("--snapshot", thematic.snapshot_path, "Year snapshot")
      ->required();
  thematic_cmd->add_option("--theme", thematic.theme, "MIS-industry label")
      ->required();
  thematic_cmd->add_option("--caps", thematic.caps_path, "Market caps CSV")
      ->required();
  thematic_cmd->add_option("--network", thematic.network_path,
                           "Industry network file");
  thematic_cmd->add_option("--covariance", thematic.covariance_path,
                           "Covariance CSV for risk-managed weights");
  thematic_cmd->add_option("--n", thematic.n, "Holdings count");
  thematic_cmd->add_option("--out", thematic.out_path, "Output JSON")
      ->required();

  // evaluate
  mis::cli::EvaluateOptions evaluate;
  std::string train_years, test_years, eval_weights;
  CLI::App* evaluate_cmd = app.add_subcommand(
      "evaluate", "Out-of-sample MIS vs GICS correlation comparison");
  evaluate_cmd
      ->add_option("--snapshot", evaluate.snapshot_path, "Year snapshot")
      ->required();
  evaluate_cmd->add_option("--returns", evaluate.returns_path, "Panel CSV")
      ->required();
  evaluate_cmd->add_option("--gics", evaluate.gics_path, "GICS map CSV")
      ->required();
  evaluate_cmd->add_option("--loadings", evaluate.loadings_path,
                           "Factor loadings CSV");
  evaluate_cmd->add_option("--train", train_years, "<first>:<last>")
      ->required();
  evaluate_cmd->add_option("--test", test_years, "<first>:<last>")->required();
  evaluate_cmd->add_option("--weights", eval_weights,
                           "text,returns,factors (default from inputs)");
  evaluate_cmd->add_option("--n", evaluate.n, "Neighbor count");
  evaluate_cmd->add_option("--out", evaluate.out_dir, "Output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0)
      emit_error("usage", e.what());
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*prep_cmd) {
      mis::cli::cmd_prep(prep);
    } else if (*fit_cmd) {
      const YearRange years = parse_year_range(fit_years);
      fit.year_first = years.first;
      fit.year_last = years.last;
      if (!fit_config_path.empty())
        fit.pipeline = mis::config_from_json(
            mis::read_json_file(fit_config_path), fit.pipeline);
      mis::cli::cmd_fit(fit);
    } else if (*adjust_cmd) {
      mis::cli::cmd_adjust(adjust);
    } else if (*similar_cmd) {
      if (!similar_weights.empty())
        similar.weights = parse_weights(similar_weights);
      mis::cli::cmd_similar(similar);
    } else if (*thematic_cmd) {
      mis::cli::cmd_thematic(thematic);
    } else if (*evaluate_cmd) {
      const YearRange train = parse_year_range(train_years);
      const YearRange test = parse_year_range(test_years);
      evaluate.train_first = train.first;
      evaluate.train_last = train.last;
      evaluate.test_first = test.first;
      evaluate.test_last = test.last;
      if (!eval_weights.empty()) evaluate.weights = parse_weights(eval_weights);
      mis::cli::cmd_evaluate(evaluate);
    }
  } catch (const CLI::ValidationError& e) {
    emit_error("validation", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    emit_error("validation", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return 2;
  }
  return 0;
}

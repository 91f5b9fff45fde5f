#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mis/pipeline.hpp"
#include "mis/portfolio.hpp"

namespace mis::cli {

/// prep: raw documents + lexicon -> extracted corpus + coverage report.
struct PrepOptions {
  std::string docs_path;
  std::string lexicon_path;
  std::string out_dir;
};
void cmd_prep(const PrepOptions& options);

/// fit: per-year corpora -> run directory of snapshots + manifest.
struct FitOptions {
  std::string corpus_dir;  // expects <dir>/<year>.jsonl
  std::string lexicon_path;  // optional; needed for raw-text records
  int year_first = 0;
  int year_last = 0;
  PipelineConfig pipeline;
  std::string out_dir;
};
void cmd_fit(const FitOptions& options);

/// adjust: snapshot + industry network -> relevance-score baseball cards.
struct AdjustOptions {
  std::string snapshot_path;
  std::string network_path;  // empty = raw theta passthrough
  std::string firm_id;       // empty = every firm
  double cutoff = 0.0;
  std::string out_dir;
};
void cmd_adjust(const AdjustOptions& options);

struct SimilarOptions {
  std::string snapshot_path;
  std::string firm_id;
  int n = 50;
  std::optional<SimilarityWeights> weights;  // defaulted from inputs given
  std::string returns_path;   // optional
  std::string loadings_path;  // optional
  std::string out_path;
};
void cmd_similar(const SimilarOptions& options);

struct ThematicOptions {
  std::string snapshot_path;
  std::string network_path;  // optional
  std::string theme;
  std::string caps_path;
  std::string covariance_path;  // optional
  int n = 50;
  std::string out_path;
};
void cmd_thematic(const ThematicOptions& options);

struct EvaluateOptions {
  std::string snapshot_path;
  std::string returns_path;
  std::string gics_path;
  std::string loadings_path;  // optional
  int train_first = 0;
  int train_last = 0;
  int test_first = 0;
  int test_last = 0;
  std::optional<SimilarityWeights> weights;
  int n = 50;
  std::string out_dir;
};
void cmd_evaluate(const EvaluateOptions& options);

}  // namespace mis::cli

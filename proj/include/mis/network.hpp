#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mis/grid.hpp"
#include "mis/lda.hpp"

namespace mis {

/// Expert-authored industry relationships: undirected correlation links
/// and directed (child, parent) hierarchy links. Node ids are topic
/// labels.
struct IndustryNetwork {
  std::vector<std::string> nodes;  // first-appearance order, unique
  std::vector<std::pair<std::string, std::string>> correlation_edges;
  std::vector<std::pair<std::string, std::string>> hierarchy_edges;

  /// Parse the network text format; '#' starts a comment:
  ///   corr: <id> -- <id>
  ///   sub: <child> -> <parent>
  /// Nodes are derived from edge endpoints.
  static IndustryNetwork parse(std::istream& in);
  static IndustryNetwork parse_string(const std::string& text);
  static IndustryNetwork load(const std::string& path);

  bool has_node(const std::string& id) const;
  bool empty() const {
    return correlation_edges.empty() && hierarchy_edges.empty();
  }
};

struct NetworkValidation {
  bool passed = true;
  std::vector<std::string> failures;
};

/// Structural checks: hierarchy edges form a DAG, correlation edges are
/// irreflexive, endpoints are nodes, and every node appears among the
/// model's topic labels.
NetworkValidation validate_network(const IndustryNetwork& network,
                                   const std::vector<std::string>& topic_labels);

/// Post-adjustment per-firm scores; an improper simplex (entries may sum
/// above one).
struct RelevanceScores {
  std::string firm_id;
  std::map<std::string, double> scores;
};

/// Each industry also collects the raw theta of its correlated partners.
/// One hop only, always from raw values.
RelevanceScores correlation_adjust(const IndustryMixture& theta,
                                   const std::vector<std::string>& industry_ids,
                                   const IndustryNetwork& network);

/// A child also collects its direct parent's raw theta; a parent collects
/// the sum of its direct children's raw theta.
RelevanceScores hierarchy_adjust(const IndustryMixture& theta,
                                 const std::vector<std::string>& industry_ids,
                                 const IndustryNetwork& network);

/// Both increments, each computed from raw theta, summed.
RelevanceScores adjust(const IndustryMixture& theta,
                       const std::vector<std::string>& industry_ids,
                       const IndustryNetwork& network);

/// Label each topic by its highest-probability keyphrase; ties go to the
/// lexicographically smallest keyphrase and duplicates get "-2", "-3", ...
/// in topic order.
std::vector<std::string> name_topics(const Matrix& phi,
                                     const std::vector<std::string>& vocab);

/// Zero out entries below cutoff; no renormalization (display/export
/// only). Sets *all_zero when a nonzero input became all zeros.
std::vector<double> threshold_scores(std::vector<double> values, double cutoff,
                                     bool* all_zero = nullptr);
RelevanceScores threshold_scores(RelevanceScores scores, double cutoff,
                                 bool* all_zero = nullptr);

}  // namespace mis

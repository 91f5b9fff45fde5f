#include "mis/network.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace mis {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw std::invalid_argument("network line " + std::to_string(line) + ": " +
                              msg);
}

}  // namespace

bool IndustryNetwork::has_node(const std::string& id) const {
  return std::find(nodes.begin(), nodes.end(), id) != nodes.end();
}

IndustryNetwork IndustryNetwork::parse(std::istream& in) {
  IndustryNetwork net;
  std::unordered_set<std::string> seen;
  auto note_node = [&](const std::string& id) {
    if (seen.insert(id).second) net.nodes.push_back(id);
  };

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::size_t colon = line.find(':');
    if (colon == std::string::npos) parse_fail(lineno, "expected 'corr:' or 'sub:'");
    const std::string key = trim(line.substr(0, colon));
    const std::string rest = trim(line.substr(colon + 1));
    if (key == "corr") {
      std::size_t sep = rest.find("--");
      if (sep == std::string::npos) parse_fail(lineno, "expected '<id> -- <id>'");
      const std::string a = trim(rest.substr(0, sep));
      const std::string b = trim(rest.substr(sep + 2));
      if (a.empty() || b.empty()) parse_fail(lineno, "empty endpoint");
      note_node(a);
      note_node(b);
      net.correlation_edges.emplace_back(a, b);
    } else if (key == "sub") {
      std::size_t sep = rest.find("->");
      if (sep == std::string::npos) parse_fail(lineno, "expected '<child> -> <parent>'");
      const std::string child = trim(rest.substr(0, sep));
      const std::string parent = trim(rest.substr(sep + 2));
      if (child.empty() || parent.empty()) parse_fail(lineno, "empty endpoint");
      note_node(child);
      note_node(parent);
      net.hierarchy_edges.emplace_back(child, parent);
    } else {
      parse_fail(lineno, "unknown directive '" + key + "'");
    }
  }
  return net;
}

IndustryNetwork IndustryNetwork::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

IndustryNetwork IndustryNetwork::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file: " + path);
  return parse(in);
}

NetworkValidation validate_network(const IndustryNetwork& network,
                                   const std::vector<std::string>& topic_labels) {
  NetworkValidation report;
  auto fail = [&](std::string msg) {
    report.passed = false;
    report.failures.push_back(std::move(msg));
  };

  std::unordered_set<std::string> nodes(network.nodes.begin(),
                                        network.nodes.end());
  std::unordered_set<std::string> labels(topic_labels.begin(),
                                         topic_labels.end());

  for (const auto& [a, b] : network.correlation_edges) {
    if (a == b) fail("correlation edge is reflexive: " + a);
    if (!nodes.contains(a)) fail("correlation endpoint is not a node: " + a);
    if (!nodes.contains(b)) fail("correlation endpoint is not a node: " + b);
  }
  for (const auto& [child, parent] : network.hierarchy_edges) {
    if (child == parent) fail("hierarchy edge is reflexive: " + child);
    if (!nodes.contains(child)) fail("hierarchy endpoint is not a node: " + child);
    if (!nodes.contains(parent)) fail("hierarchy endpoint is not a node: " + parent);
  }
  for (const auto& node : network.nodes) {
    if (!labels.contains(node))
      fail("network node does not match any topic label: " + node);
  }

  // Cycle detection over the hierarchy edges (iterative DFS, 3 colors).
  std::unordered_map<std::string, std::vector<std::string>> children_of;
  for (const auto& [child, parent] : network.hierarchy_edges)
    children_of[parent].push_back(child);
  std::unordered_map<std::string, int> color;  // 0 white, 1 gray, 2 black
  for (const auto& start : network.nodes) {
    if (color[start] != 0) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{start, 0}};
    color[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      auto& kids = children_of[node];
      if (next < kids.size()) {
        const std::string& kid = kids[next++];
        if (color[kid] == 1) {
          std::string cycle = kid;
          for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            cycle += " <- " + it->first;
            if (it->first == kid) break;
          }
          fail("hierarchy cycle: " + cycle);
        } else if (color[kid] == 0) {
          color[kid] = 1;
          stack.emplace_back(kid, 0);
        }
      } else {
        color[node] = 2;
        stack.pop_back();
      }
    }
  }
  return report;
}

namespace {

struct Indexed {
  std::unordered_map<std::string, int> pos;

  Indexed(const IndustryMixture& theta,
          const std::vector<std::string>& industry_ids) {
    if (theta.theta.size() != industry_ids.size())
      throw std::invalid_argument("mixture and industry id list differ in length");
    for (int i = 0; i < static_cast<int>(industry_ids.size()); ++i) {
      if (!pos.emplace(industry_ids[i], i).second)
        throw std::invalid_argument("duplicate industry id: " + industry_ids[i]);
    }
  }

  int find(const std::string& id) const {
    auto it = pos.find(id);
    return it == pos.end() ? -1 : it->second;
  }
};

std::vector<double> correlation_increments(const std::vector<double>& theta,
                                           const Indexed& index,
                                           const IndustryNetwork& network) {
  std::vector<double> inc(theta.size(), 0.0);
  for (const auto& [a, b] : network.correlation_edges) {
    const int ia = index.find(a);
    const int ib = index.find(b);
    if (ia < 0 || ib < 0) continue;
    inc[ia] += theta[ib];
    inc[ib] += theta[ia];
  }
  return inc;
}

std::vector<double> hierarchy_increments(const std::vector<double>& theta,
                                         const Indexed& index,
                                         const IndustryNetwork& network) {
  std::vector<double> inc(theta.size(), 0.0);
  for (const auto& [child, parent] : network.hierarchy_edges) {
    const int ic = index.find(child);
    const int ip = index.find(parent);
    if (ic < 0 || ip < 0) continue;
    inc[ic] += theta[ip];
    inc[ip] += theta[ic];
  }
  return inc;
}

RelevanceScores pack(const IndustryMixture& theta,
                     const std::vector<std::string>& industry_ids,
                     const std::vector<double>& scores) {
  RelevanceScores out;
  out.firm_id = theta.firm_id;
  for (std::size_t i = 0; i < industry_ids.size(); ++i)
    out.scores[industry_ids[i]] = scores[i];
  return out;
}

}  // namespace

RelevanceScores correlation_adjust(const IndustryMixture& theta,
                                   const std::vector<std::string>& industry_ids,
                                   const IndustryNetwork& network) {
  Indexed index(theta, industry_ids);
  std::vector<double> inc = correlation_increments(theta.theta, index, network);
  std::vector<double> scores(theta.theta.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    scores[i] = theta.theta[i] + inc[i];
  return pack(theta, industry_ids, scores);
}

RelevanceScores hierarchy_adjust(const IndustryMixture& theta,
                                 const std::vector<std::string>& industry_ids,
                                 const IndustryNetwork& network) {
  Indexed index(theta, industry_ids);
  std::vector<double> inc = hierarchy_increments(theta.theta, index, network);
  std::vector<double> scores(theta.theta.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    scores[i] = theta.theta[i] + inc[i];
  return pack(theta, industry_ids, scores);
}

RelevanceScores adjust(const IndustryMixture& theta,
                       const std::vector<std::string>& industry_ids,
                       const IndustryNetwork& network) {
  Indexed index(theta, industry_ids);
  std::vector<double> corr = correlation_increments(theta.theta, index, network);
  std::vector<double> hier = hierarchy_increments(theta.theta, index, network);
  std::vector<double> scores(theta.theta.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    scores[i] = theta.theta[i] + corr[i] + hier[i];
  return pack(theta, industry_ids, scores);
}

std::vector<std::string> name_topics(const Matrix& phi,
                                     const std::vector<std::string>& vocab) {
  if (phi.cols != static_cast<int>(vocab.size()))
    throw std::invalid_argument("phi columns and vocabulary differ in size");
  std::vector<std::string> labels;
  labels.reserve(phi.rows);
  for (int k = 0; k < phi.rows; ++k) {
    int best = 0;
    for (int v = 1; v < phi.cols; ++v) {
      if (phi(k, v) > phi(k, best) ||
          (phi(k, v) == phi(k, best) && vocab[v] < vocab[best]))
        best = v;
    }
    labels.push_back(vocab[best]);
  }
  std::unordered_map<std::string, int> uses;
  for (auto& label : labels) {
    const int n = ++uses[label];
    if (n > 1) label += "-" + std::to_string(n);
  }
  return labels;
}

std::vector<double> threshold_scores(std::vector<double> values, double cutoff,
                                     bool* all_zero) {
  if (cutoff < 0.0 || cutoff >= 1.0)
    throw std::invalid_argument("threshold cutoff must be in [0, 1)");
  bool had_nonzero = false;
  bool any_left = false;
  for (double& x : values) {
    if (x != 0.0) had_nonzero = true;
    if (x < cutoff) x = 0.0;
    if (x != 0.0) any_left = true;
  }
  if (all_zero != nullptr) *all_zero = had_nonzero && !any_left;
  return values;
}

RelevanceScores threshold_scores(RelevanceScores scores, double cutoff,
                                 bool* all_zero) {
  if (cutoff < 0.0 || cutoff >= 1.0)
    throw std::invalid_argument("threshold cutoff must be in [0, 1)");
  bool had_nonzero = false;
  bool any_left = false;
  for (auto& [id, x] : scores.scores) {
    if (x != 0.0) had_nonzero = true;
    if (x < cutoff) x = 0.0;
    if (x != 0.0) any_left = true;
  }
  if (all_zero != nullptr) *all_zero = had_nonzero && !any_left;
  return scores;
}

}  // namespace mis

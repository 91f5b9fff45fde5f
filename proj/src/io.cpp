#include "mis/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mis {
namespace {

using Json = nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    // Trim surrounding whitespace; no quoting support.
    std::size_t b = field.find_first_not_of(" \t\r");
    std::size_t e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? ""
                                            : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool looks_numeric(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

}  // namespace

Corpus load_corpus_jsonl(const std::string& path,
                         const SemanticLexicon* lexicon,
                         CorpusBuildReport* report) {
  std::ifstream in = open_or_throw(path);
  std::vector<std::pair<std::string, BagOfWords>> bags;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                  ": " + e.what());
    }
    if (!record.contains("firm_id"))
      throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                  ": missing firm_id");
    const std::string firm_id = record.at("firm_id").get<std::string>();
    BagOfWords bag;
    if (record.contains("counts")) {
      for (const auto& [key, value] : record.at("counts").items()) {
        const int count = value.get<int>();
        if (count <= 0)
          throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                      ": counts must be positive");
        bag.add(key, count);
      }
    } else if (record.contains("text")) {
      if (lexicon == nullptr)
        throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                    ": raw text record needs a lexicon");
      ExtractionStats* stats = report != nullptr ? &report->stats : nullptr;
      bag = extract_keyphrases(record.at("text").get<std::string>(), *lexicon,
                               stats);
    } else {
      throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                  ": record needs 'text' or 'counts'");
    }
    if (bag.total == 0 && report != nullptr)
      report->empty_docs.push_back(firm_id);
    bags.emplace_back(firm_id, std::move(bag));
  }
  return corpus_from_bags(bags, lexicon != nullptr ? lexicon->vocabulary()
                                                   : std::vector<std::string>{});
}

void save_corpus_jsonl(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& [firm_id, bag] : corpus.docs) {
    Json counts = Json::object();
    for (const auto& [key, count] : bag.counts) counts[key] = count;
    out << Json{{"firm_id", firm_id}, {"counts", counts}}.dump() << '\n';
  }
}

ReturnsPanel load_returns_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument(path + ": empty returns file");
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2)
    throw std::invalid_argument(path + ": header needs date and firm columns");

  ReturnsPanel panel;
  panel.firm_ids.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> by_date;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                  ": expected " + std::to_string(header.size()) +
                                  " fields");
    panel.dates.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (!looks_numeric(fields[i]))
        throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                    ": bad number '" + fields[i] + "'");
      row.push_back(std::stod(fields[i]));
    }
    by_date.push_back(std::move(row));
  }

  panel.returns = Matrix(static_cast<int>(panel.firm_ids.size()),
                         static_cast<int>(panel.dates.size()));
  for (int d = 0; d < static_cast<int>(panel.dates.size()); ++d)
    for (int f = 0; f < static_cast<int>(panel.firm_ids.size()); ++f)
      panel.returns(f, d) = by_date[d][f];
  panel.validate();
  return panel;
}

ReturnsPanel slice_panel_years(const ReturnsPanel& panel, int first, int last) {
  std::vector<int> keep;
  for (int d = 0; d < static_cast<int>(panel.dates.size()); ++d) {
    const std::string& date = panel.dates[d];
    if (date.size() < 4) continue;
    int year = 0;
    try {
      year = std::stoi(date.substr(0, 4));
    } catch (const std::exception&) {
      continue;
    }
    if (year >= first && year <= last) keep.push_back(d);
  }
  ReturnsPanel out;
  out.firm_ids = panel.firm_ids;
  for (int d : keep) out.dates.push_back(panel.dates[d]);
  out.returns =
      Matrix(panel.returns.rows, static_cast<int>(keep.size()));
  for (int f = 0; f < panel.returns.rows; ++f)
    for (int i = 0; i < static_cast<int>(keep.size()); ++i)
      out.returns(f, i) = panel.returns(f, keep[i]);
  return out;
}

std::map<std::string, GicsEntry> load_gics_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::map<std::string, GicsEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (lineno == 1 && fields.size() >= 1 &&
        (fields[0] == "firm_id" || fields[0] == "id"))
      continue;  // header
    if (fields.size() != 3)
      throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                  ": expected firm_id,sector,industry");
    out[fields[0]] = GicsEntry{fields[1], fields[2]};
  }
  return out;
}

std::map<std::string, double> load_caps_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::map<std::string, double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (lineno == 1 && fields.size() >= 2 && !looks_numeric(fields[1]))
      continue;  // header
    if (fields.size() != 2 || !looks_numeric(fields[1]))
      throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                  ": expected firm_id,market_cap");
    out[fields[0]] = std::stod(fields[1]);
  }
  return out;
}

std::map<std::string, std::vector<double>> load_loadings_csv(
    const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::map<std::string, std::vector<double>> out;
  std::string line;
  int lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (lineno == 1 && fields.size() >= 2 && !looks_numeric(fields[1]))
      continue;  // header
    if (fields.size() < 2)
      throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                  ": expected firm_id,f1,...");
    std::vector<double> loadings;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (!looks_numeric(fields[i]))
        throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                    ": bad number '" + fields[i] + "'");
      loadings.push_back(std::stod(fields[i]));
    }
    if (width == 0) width = loadings.size();
    if (loadings.size() != width)
      throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                  ": ragged loading row");
    out[fields[0]] = std::move(loadings);
  }
  return out;
}

LabeledCovariance load_covariance_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument(path + ": empty covariance file");
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2)
    throw std::invalid_argument(path + ": covariance needs a header row");

  LabeledCovariance out;
  out.firm_ids.assign(header.begin() + 1, header.end());
  const int n = static_cast<int>(out.firm_ids.size());
  out.matrix = Matrix(n, n);
  int row = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (row >= n)
      throw std::invalid_argument(path + ": more rows than header firms");
    std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != n + 1)
      throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                  ": expected " + std::to_string(n + 1) +
                                  " fields");
    if (fields[0] != out.firm_ids[row])
      throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                  ": row label '" + fields[0] +
                                  "' does not match header order");
    for (int c = 0; c < n; ++c) out.matrix(row, c) = std::stod(fields[c + 1]);
    ++row;
  }
  if (row != n)
    throw std::invalid_argument(path + ": fewer rows than header firms");
  return out;
}

void write_cards_jsonl(const std::string& path,
                       const std::vector<RelevanceScores>& cards) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& card : cards) {
    std::vector<std::pair<std::string, double>> ranked(card.scores.begin(),
                                                       card.scores.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) {
                       if (a.second != b.second) return a.second > b.second;
                       return a.first < b.first;
                     });
    Json entries = Json::array();
    int rank = 1;
    for (const auto& [label, score] : ranked)
      entries.push_back(
          Json{{"label", label}, {"score", score}, {"rank", rank++}});
    out << Json{{"schema", "mis.cards/1"},
                {"firm_id", card.firm_id},
                {"scores", entries}}
               .dump()
        << '\n';
  }
}

std::string render_card_table(const RelevanceScores& card, int top_n) {
  std::vector<std::pair<std::string, double>> ranked(card.scores.begin(),
                                                     card.scores.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  std::size_t label_width = 8;
  for (const auto& [label, score] : ranked)
    label_width = std::max(label_width, label.size());

  std::ostringstream out;
  out << card.firm_id << '\n';
  out << std::string(card.firm_id.size(), '=') << '\n';
  out << std::left << std::setw(6) << "rank" << std::setw(label_width + 2)
      << "industry" << "relevance" << '\n';
  int rank = 1;
  for (const auto& [label, score] : ranked) {
    if (rank > top_n) break;
    out << std::left << std::setw(6) << rank << std::setw(label_width + 2)
        << label << std::fixed << std::setprecision(4) << score << '\n';
    ++rank;
  }
  return out.str();
}

void write_boxplot_svg(
    const std::string& path, const std::string& title,
    const std::vector<std::pair<std::string, std::vector<double>>>& groups) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);

  const int box_w = 46;
  const int gap = 24;
  const int left = 80;
  const int top = 50;
  const int plot_h = 300;
  const int width =
      left + static_cast<int>(groups.size()) * (box_w + gap) + 60;
  const int height = top + plot_h + 110;

  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& [label, values] : groups) {
    for (double v : values) {
      if (first || v < lo) lo = v;
      if (first || v > hi) hi = v;
      first = false;
    }
  }
  if (first) {
    lo = -1.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    hi += 0.5;
    lo -= 0.5;
  }
  const double pad = 0.08 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto y_of = [&](double v) {
    return top + plot_h * (1.0 - (v - lo) / (hi - lo));
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";

  // Horizontal zero line when visible.
  if (lo < 0.0 && hi > 0.0)
    out << "<line x1=\"" << left - 10 << "\" y1=\"" << y_of(0.0) << "\" x2=\""
        << width - 30 << "\" y2=\"" << y_of(0.0)
        << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";

  // Y axis with a few ticks.
  out << "<line x1=\"" << left - 10 << "\" y1=\"" << top << "\" x2=\""
      << left - 10 << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    out << "<text x=\"" << left - 16 << "\" y=\"" << y_of(v) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << std::fixed << std::setprecision(3) << v << "</text>\n";
  }

  int x = left;
  for (const auto& [label, values] : groups) {
    if (!values.empty()) {
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      const GroupStats stats = summarize(sorted);
      const double vmin = sorted.front();
      const double vmax = sorted.back();
      const int cx = x + box_w / 2;

      out << "<line x1=\"" << cx << "\" y1=\"" << y_of(vmin) << "\" x2=\""
          << cx << "\" y2=\"" << y_of(vmax) << "\" stroke=\"black\"/>\n";
      out << "<rect x=\"" << x << "\" y=\"" << y_of(stats.q3) << "\" width=\""
          << box_w << "\" height=\"" << y_of(stats.q1) - y_of(stats.q3)
          << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
      out << "<line x1=\"" << x << "\" y1=\"" << y_of(stats.median)
          << "\" x2=\"" << x + box_w << "\" y2=\"" << y_of(stats.median)
          << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    out << "<text x=\"" << x + box_w / 2 << "\" y=\"" << top + plot_h + 16
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
           "transform=\"rotate(-45 "
        << x + box_w / 2 << ' ' << top + plot_h + 16 << ")\">" << label
        << "</text>\n";
    x += box_w + gap;
  }
  out << "</svg>\n";
}

}  // namespace mis

#include "mis/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mis {
namespace {

bool is_word_char(unsigned char c) {
  // Bytes >= 0x80 are kept so UTF-8 words survive intact.
  return std::isalnum(c) || c >= 0x80;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool valid_token(const std::string& t) {
  if (t.empty()) return false;
  for (unsigned char c : t) {
    if (std::isspace(c) || std::isupper(c)) return false;
  }
  return true;
}

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw std::invalid_argument("lexicon line " + std::to_string(line) + ": " +
                              msg);
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_char(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace

const std::vector<StemRule>& default_stem_rules() {
  static const std::vector<StemRule> rules = {
      {"es", ""}, {"s", ""}, {"er", ""}, {"ing", ""}, {"ation", ""}};
  return rules;
}

std::string stem(const std::string& token, const std::vector<StemRule>& rules) {
  for (const auto& rule : rules) {
    if (token.size() <= rule.suffix.size()) continue;
    if (!token.ends_with(rule.suffix)) continue;
    const std::size_t stem_len = token.size() - rule.suffix.size();
    if (stem_len + rule.replacement.size() < 2) continue;
    return token.substr(0, stem_len) + rule.replacement;
  }
  return token;
}

SemanticLexicon::SemanticLexicon(std::vector<SemanticTree> trees,
                                 std::vector<StemRule> stem_rules,
                                 int max_ngram)
    : trees_(std::move(trees)),
      stem_rules_(std::move(stem_rules)),
      max_ngram_(max_ngram) {
  if (max_ngram_ < 1) throw std::invalid_argument("max_ngram must be >= 1");
  validate_and_index();
}

void SemanticLexicon::validate_and_index() {
  auto add_follow = [&](std::unordered_map<std::string, std::string>& map,
                        const std::string& from, const std::string& to,
                        const char* kind) {
    if (!valid_token(from) || !valid_token(to))
      throw std::invalid_argument(std::string(kind) + " edge has an invalid token: '" +
                                  from + "' -> '" + to + "'");
    auto [it, inserted] = map.emplace(from, to);
    if (!inserted && it->second != to)
      throw std::invalid_argument("token '" + from +
                                  "' is mapped to two different targets ('" +
                                  it->second + "' and '" + to + "')");
  };

  for (const auto& tree : trees_) {
    if (!valid_token(tree.root))
      throw std::invalid_argument("invalid tree root '" + tree.root + "'");
    if (root_set_.contains(tree.root))
      throw std::invalid_argument("duplicate tree root '" + tree.root + "'");
    roots_.push_back(tree.root);
    root_set_.insert(tree.root);

    for (const auto& [from, to] : tree.synonym_edges) {
      add_follow(synonyms_, from, to, "synonym");
      add_follow(follow_, from, to, "synonym");
    }
    for (const auto& [from, to] : tree.terminal_edges) {
      if (to != tree.root)
        throw std::invalid_argument("terminal edge '" + from +
                                    "' must target the tree root");
      add_follow(follow_, from, to, "terminal");
    }
    for (const auto& [pair, to] : tree.compound_edges) {
      if (!valid_token(pair.first) || !valid_token(pair.second) ||
          !valid_token(to))
        throw std::invalid_argument("compound edge has an invalid token");
      auto [it, inserted] = compounds_.emplace(pair, to);
      if (!inserted && it->second != to)
        throw std::invalid_argument("compound (" + pair.first + ", " +
                                    pair.second + ") mapped to two targets");
    }
  }

  // No cycles: every follow chain must stop within the number of edges.
  const std::size_t bound = follow_.size() + 1;
  for (const auto& [start, unused] : follow_) {
    std::string cur = start;
    std::size_t steps = 0;
    while (true) {
      auto it = follow_.find(cur);
      if (it == follow_.end()) break;
      cur = it->second;
      if (++steps > bound)
        throw std::invalid_argument("cycle detected through token '" + start +
                                    "'");
    }
  }
}

const std::string* SemanticLexicon::synonym(const std::string& token) const {
  auto it = synonyms_.find(token);
  return it == synonyms_.end() ? nullptr : &it->second;
}

const std::string* SemanticLexicon::follow(const std::string& token) const {
  auto it = follow_.find(token);
  return it == follow_.end() ? nullptr : &it->second;
}

const std::string* SemanticLexicon::compound(const std::string& left,
                                             const std::string& right) const {
  auto it = compounds_.find({left, right});
  return it == compounds_.end() ? nullptr : &it->second;
}

SemanticLexicon SemanticLexicon::parse(std::istream& in) {
  std::vector<SemanticTree> trees;
  int max_ngram = 3;
  bool saw_tree = false;
  std::string line;
  int lineno = 0;

  auto split_arrow = [&](const std::string& s) {
    std::size_t pos = s.find("->");
    if (pos == std::string::npos)
      parse_fail(lineno, "expected '<from> -> <to>'");
    return std::pair{trim(s.substr(0, pos)), trim(s.substr(pos + 2))};
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::size_t colon = line.find(':');
    if (colon == std::string::npos)
      parse_fail(lineno, "expected '<directive>: ...'");
    const std::string key = trim(line.substr(0, colon));
    const std::string rest = trim(line.substr(colon + 1));

    if (key == "max_ngram") {
      if (saw_tree)
        parse_fail(lineno, "max_ngram must appear before the first tree");
      try {
        max_ngram = std::stoi(rest);
      } catch (const std::exception&) {
        parse_fail(lineno, "max_ngram expects an integer");
      }
    } else if (key == "root") {
      if (rest.empty()) parse_fail(lineno, "root expects a keyphrase");
      trees.push_back(SemanticTree{.root = rest});
      saw_tree = true;
    } else if (!saw_tree) {
      parse_fail(lineno, "'" + key + "' before any 'root:'");
    } else if (key == "syn") {
      auto [from, to] = split_arrow(rest);
      auto [it, inserted] = trees.back().synonym_edges.emplace(from, to);
      if (!inserted && it->second != to)
        parse_fail(lineno, "token '" + from + "' already mapped");
    } else if (key == "ngram") {
      std::size_t plus = rest.find('+');
      if (plus == std::string::npos)
        parse_fail(lineno, "expected '<a> + <b> -> <c>'");
      const std::string left = trim(rest.substr(0, plus));
      auto [right, to] = split_arrow(rest.substr(plus + 1));
      auto [it, inserted] =
          trees.back().compound_edges.emplace(std::pair{left, right}, to);
      if (!inserted && it->second != to)
        parse_fail(lineno, "compound already mapped");
    } else if (key == "term") {
      if (rest.empty()) parse_fail(lineno, "term expects a token");
      auto [it, inserted] =
          trees.back().terminal_edges.emplace(rest, trees.back().root);
      (void)it;
      (void)inserted;
    } else {
      parse_fail(lineno, "unknown directive '" + key + "'");
    }
  }

  try {
    return SemanticLexicon(std::move(trees), default_stem_rules(), max_ngram);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("lexicon: ") + e.what());
  }
}

SemanticLexicon SemanticLexicon::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

SemanticLexicon SemanticLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  return parse(in);
}

namespace {

/// Follow synonym+terminal edges until a root or a dead end.
const std::string* resolve_to_root(const std::string& token,
                                   const SemanticLexicon& lex,
                                   std::string& storage) {
  storage = token;
  while (!lex.is_root(storage)) {
    const std::string* next = lex.follow(storage);
    if (next == nullptr) return nullptr;
    storage = *next;
  }
  return &storage;
}

}  // namespace

BagOfWords extract_keyphrases(const std::string& text,
                              const SemanticLexicon& lexicon,
                              ExtractionStats* stats) {
  std::vector<std::string> tokens = tokenize(text);
  if (stats != nullptr) stats->tokens_seen += static_cast<long long>(tokens.size());

  // Stem, then resolve synonyms to fixpoint. Terminal edges are not
  // followed yet so compound parts (e.g. "retail") stay available.
  for (auto& token : tokens) {
    token = stem(token, lexicon.stem_rules());
    const std::string* next = lexicon.synonym(token);
    int guard = 0;  // validation rejects cycles; bound is a backstop
    while (next != nullptr && ++guard <= 1024) {
      token = *next;
      next = lexicon.synonym(token);
    }
  }

  BagOfWords bag;
  std::string scratch;
  const int n = static_cast<int>(tokens.size());
  int i = 0;
  while (i < n) {
    // Longest-match-first: left-fold compound edges over adjacent tokens,
    // then commit to the longest fold that reaches a root.
    std::string folded = tokens[i];
    int best_len = 0;
    const std::string* best_root = nullptr;
    std::string best_storage;
    int len = 1;
    while (len < lexicon.max_ngram() && i + len < n) {
      const std::string* combined = lexicon.compound(folded, tokens[i + len]);
      if (combined == nullptr) break;
      folded = *combined;
      ++len;
      if (const std::string* root = resolve_to_root(folded, lexicon, scratch)) {
        best_len = len;
        best_storage = *root;
        best_root = &best_storage;
      }
    }
    if (best_root != nullptr) {
      bag.add(*best_root);
      if (stats != nullptr) stats->tokens_kept += best_len;
      i += best_len;
      continue;
    }
    if (const std::string* root = resolve_to_root(tokens[i], lexicon, scratch)) {
      bag.add(*root);
      if (stats != nullptr) ++stats->tokens_kept;
    }
    ++i;
  }
  if (stats != nullptr)
    stats->tokens_discarded = stats->tokens_seen - stats->tokens_kept;
  return bag;
}

Corpus build_corpus(const std::vector<std::pair<std::string, std::string>>& docs,
                    const SemanticLexicon& lexicon, CorpusBuildReport* report) {
  Corpus corpus;
  corpus.vocab = lexicon.vocabulary();
  std::unordered_set<std::string> seen;
  for (const auto& [firm_id, text] : docs) {
    if (!seen.insert(firm_id).second)
      throw std::invalid_argument("duplicate firm_id: " + firm_id);
    ExtractionStats* stats = report != nullptr ? &report->stats : nullptr;
    BagOfWords bag = extract_keyphrases(text, lexicon, stats);
    if (bag.total == 0 && report != nullptr)
      report->empty_docs.push_back(firm_id);
    corpus.docs.emplace_back(firm_id, std::move(bag));
  }
  return corpus;
}

Corpus corpus_from_bags(
    const std::vector<std::pair<std::string, BagOfWords>>& docs,
    const std::vector<std::string>& vocab) {
  Corpus corpus;
  corpus.docs = docs;
  std::unordered_set<std::string> seen;
  for (const auto& [firm_id, bag] : docs) {
    if (!seen.insert(firm_id).second)
      throw std::invalid_argument("duplicate firm_id: " + firm_id);
  }
  if (!vocab.empty()) {
    corpus.vocab = vocab;
    std::unordered_set<std::string> known(vocab.begin(), vocab.end());
    for (const auto& [firm_id, bag] : docs) {
      for (const auto& [key, count] : bag.counts) {
        if (!known.contains(key))
          throw std::invalid_argument("bag key '" + key +
                                      "' is not in the vocabulary (" + firm_id +
                                      ")");
      }
    }
  } else {
    std::unordered_set<std::string> known;
    for (const auto& [firm_id, bag] : docs) {
      for (const auto& [key, count] : bag.counts) {
        if (known.insert(key).second) corpus.vocab.push_back(key);
      }
    }
  }
  return corpus;
}

}  // namespace mis

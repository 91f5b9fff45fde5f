#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace mis {

struct StemRule {
  std::string suffix;
  std::string replacement;
};

/// Shipped rule table: plural -s/-es, -er, -ing, -ation.
const std::vector<StemRule>& default_stem_rules();

/// Apply the first matching suffix rule once; identity when none match.
/// A rule matches only if the token is longer than the suffix and the
/// result keeps at least two characters.
std::string stem(const std::string& token, const std::vector<StemRule>& rules);

/// One expert-authored mapping from token variants to a root keyphrase.
struct SemanticTree {
  std::string root;
  std::map<std::string, std::string> synonym_edges;
  std::map<std::pair<std::string, std::string>, std::string> compound_edges;
  std::map<std::string, std::string> terminal_edges;  // token -> root
};

struct BagOfWords {
  std::map<std::string, int> counts;
  int total = 0;

  void add(const std::string& key, int n = 1) {
    counts[key] += n;
    total += n;
  }
  bool operator==(const BagOfWords&) const = default;
};

/// Parsed and validated lexicon of semantic trees.
///
/// Construction merges all trees into global lookup tables and rejects
/// cycles, duplicate roots, and tokens mapped to conflicting targets
/// (conflicts across trees are rejected too, so extraction stays
/// deterministic).
class SemanticLexicon {
 public:
  SemanticLexicon(std::vector<SemanticTree> trees,
                  std::vector<StemRule> stem_rules = default_stem_rules(),
                  int max_ngram = 3);

  /// Parse the lexicon text format:
  ///   max_ngram: 3                       (optional, before the first tree)
  ///   root: <keyphrase>                  (starts a tree)
  ///   syn: <token> -> <token>
  ///   ngram: <token> + <token> -> <token>
  ///   term: <token>                      (token -> this tree's root)
  /// '#' starts a comment. Throws std::invalid_argument with the line
  /// number on malformed input.
  static SemanticLexicon parse(std::istream& in);
  static SemanticLexicon parse_string(const std::string& text);
  static SemanticLexicon load(const std::string& path);

  const std::vector<SemanticTree>& trees() const { return trees_; }
  const std::vector<StemRule>& stem_rules() const { return stem_rules_; }
  int max_ngram() const { return max_ngram_; }

  /// Tree roots in declaration order; this is the model vocabulary.
  const std::vector<std::string>& vocabulary() const { return roots_; }

  bool is_root(const std::string& token) const {
    return root_set_.contains(token);
  }
  /// One step along the merged synonym edges, or nullptr.
  const std::string* synonym(const std::string& token) const;
  /// One step along merged synonym+terminal edges, or nullptr.
  const std::string* follow(const std::string& token) const;
  /// Compound edge lookup, or nullptr.
  const std::string* compound(const std::string& left,
                              const std::string& right) const;

 private:
  void validate_and_index();

  std::vector<SemanticTree> trees_;
  std::vector<StemRule> stem_rules_;
  int max_ngram_;
  std::vector<std::string> roots_;
  std::unordered_set<std::string> root_set_;
  std::unordered_map<std::string, std::string> synonyms_;
  std::unordered_map<std::string, std::string> follow_;
  std::map<std::pair<std::string, std::string>, std::string> compounds_;
};

struct ExtractionStats {
  long long tokens_seen = 0;
  long long tokens_kept = 0;
  long long tokens_discarded = 0;
};

/// Map raw text to a bag of lexicon-root keyphrases.
///
/// Lowercases and tokenizes on non-alphanumeric boundaries, stems,
/// resolves synonyms to fixpoint, composes compounds greedily
/// left-to-right longest-match-first (up to max_ngram tokens, each token
/// consumed at most once), and discards whatever does not reach a root.
BagOfWords extract_keyphrases(const std::string& text,
                              const SemanticLexicon& lexicon,
                              ExtractionStats* stats = nullptr);

struct Corpus {
  std::vector<std::pair<std::string, BagOfWords>> docs;  // (firm_id, bag)
  std::vector<std::string> vocab;

  int size() const { return static_cast<int>(docs.size()); }
  int total_tokens() const {
    int n = 0;
    for (const auto& [id, bag] : docs) n += bag.total;
    return n;
  }
};

struct CorpusBuildReport {
  std::vector<std::string> empty_docs;  // retained but carry no keyphrases
  ExtractionStats stats;
};

/// Extract every document and assemble a corpus over the lexicon
/// vocabulary. Duplicate firm ids are rejected.
Corpus build_corpus(const std::vector<std::pair<std::string, std::string>>& docs,
                    const SemanticLexicon& lexicon,
                    CorpusBuildReport* report = nullptr);

/// Assemble a corpus from pre-extracted bags; vocab is the union of keys
/// in first-appearance order unless an explicit vocabulary is given.
Corpus corpus_from_bags(
    const std::vector<std::pair<std::string, BagOfWords>>& docs,
    const std::vector<std::string>& vocab = {});

}  // namespace mis

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace edgeflow {

// Tokens are lowercase strings without internal whitespace. Posts and
// responses are pre-tokenized in the corpus file; loading normalizes case.
struct DialogPair {
  std::vector<std::string> post;
  std::vector<std::string> response;
};

struct LoadResult {
  std::vector<DialogPair> pairs;
  int rejected = 0;  // records dropped for an empty post or response
};

// Corpus file: one JSON object per line, {"post":[...],"response":[...]}.
// Malformed lines (bad JSON, missing keys, non-string tokens, tokens with
// internal whitespace) throw with the line number. Records where either
// side is empty are dropped and counted in LoadResult::rejected.
LoadResult load_corpus(const std::string& path);

std::string serialize_corpus(const std::vector<DialogPair>& pairs);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  Vocabulary();

  // id of token, kUnk if absent
  int id(const std::string& token) const;
  const std::string& token(int id) const;
  bool contains(const std::string& token) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  int64_t freq(int id) const { return freqs_[id]; }

  // token<TAB>id<TAB>freq per line, reserved entries first
  std::string serialize() const;
  static Vocabulary deserialize(const std::string& text);

  std::vector<int> encode(const std::vector<std::string>& tokens) const;

 private:
  friend Vocabulary build_vocab(const std::vector<DialogPair>&, int, int64_t);
  void add(const std::string& token, int64_t freq);

  std::vector<std::string> tokens_;
  std::vector<int64_t> freqs_;
  std::unordered_map<std::string, int> ids_;
};

// Keeps the most frequent tokens with freq >= min_freq, capped at max_size
// entries including the four reserved ids. Ties broken lexicographically.
Vocabulary build_vocab(const std::vector<DialogPair>& pairs, int max_size,
                       int64_t min_freq = 1);

// Coarse POS lookup backed by a TSV file of "token<TAB>NOUN|OTHER" lines.
// Lookup is total: unknown tokens are OTHER.
class PosLexicon {
 public:
  static PosLexicon load(const std::string& path);
  static PosLexicon from_nouns(const std::vector<std::string>& nouns);

  bool is_noun(const std::string& token) const {
    return nouns_.count(token) > 0;
  }
  size_t noun_count() const { return nouns_.size(); }

 private:
  std::unordered_set<std::string> nouns_;
};

// Distinct corpus tokens tagged NOUN by the lexicon.
std::unordered_set<std::string> noun_tokens(
    const std::vector<DialogPair>& pairs, const PosLexicon& lexicon);

// Corpus frequency of every token (posts and responses).
std::unordered_map<std::string, int64_t> token_frequencies(
    const std::vector<DialogPair>& pairs);

}  // namespace edgeflow

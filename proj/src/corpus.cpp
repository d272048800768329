#include "edgeflow/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "edgeflow/io_util.hpp"
#include "json.hpp"

namespace edgeflow {

namespace {

bool has_internal_whitespace(const std::string& s) {
  for (unsigned char c : s)
    if (std::isspace(c)) return true;
  return false;
}

std::vector<std::string> parse_token_array(const nlohmann::json& arr,
                                           int line_no) {
  if (!arr.is_array())
    throw std::runtime_error("corpus line " + std::to_string(line_no) +
                             ": post/response must be arrays");
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (const auto& item : arr) {
    if (!item.is_string())
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": token is not a string");
    std::string tok = ascii_lower(item.get<std::string>());
    if (tok.empty() || has_internal_whitespace(tok))
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": bad token '" + tok + "'");
    out.push_back(std::move(tok));
  }
  return out;
}

}  // namespace

LoadResult load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus: " + path);
  LoadResult result;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("post") || !rec.contains("response"))
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": record needs post and response");
    DialogPair pair;
    pair.post = parse_token_array(rec["post"], line_no);
    pair.response = parse_token_array(rec["response"], line_no);
    if (pair.post.empty() || pair.response.empty()) {
      ++result.rejected;
      continue;
    }
    result.pairs.push_back(std::move(pair));
  }
  if (result.rejected > 0)
    log_warn("corpus " + path + ": rejected " +
             std::to_string(result.rejected) + " empty record(s)");
  return result;
}

std::string serialize_corpus(const std::vector<DialogPair>& pairs) {
  std::ostringstream out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json rec;
    rec["post"] = p.post;
    rec["response"] = p.response;
    out << rec.dump() << "\n";
  }
  return out.str();
}

Vocabulary::Vocabulary() {
  add("<pad>", 0);
  add("<unk>", 0);
  add("<bos>", 0);
  add("<eos>", 0);
}

void Vocabulary::add(const std::string& token, int64_t freq) {
  ids_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
  freqs_.push_back(freq);
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw std::out_of_range("vocab id out of range: " + std::to_string(id));
  return tokens_[id];
}

bool Vocabulary::contains(const std::string& token) const {
  return ids_.count(token) > 0;
}

std::vector<int> Vocabulary::encode(
    const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::string Vocabulary::serialize() const {
  std::ostringstream out;
  for (int i = 0; i < size(); ++i)
    out << tokens_[i] << "\t" << i << "\t" << freqs_[i] << "\n";
  return out.str();
}

Vocabulary Vocabulary::deserialize(const std::string& text) {
  Vocabulary v;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw std::runtime_error("vocab line " + std::to_string(line_no) +
                               ": expected 3 fields");
    int id = std::stoi(fields[1]);
    int64_t freq = std::stoll(fields[2]);
    if (id < 4) {
      if (id != line_no - 1 || fields[0] != v.tokens_[id])
        throw std::runtime_error("vocab line " + std::to_string(line_no) +
                                 ": reserved entry mismatch");
      v.freqs_[id] = freq;
      continue;
    }
    if (id != v.size())
      throw std::runtime_error("vocab line " + std::to_string(line_no) +
                               ": ids must be dense and in order");
    v.add(fields[0], freq);
  }
  return v;
}

std::unordered_map<std::string, int64_t> token_frequencies(
    const std::vector<DialogPair>& pairs) {
  std::unordered_map<std::string, int64_t> freq;
  for (const auto& p : pairs) {
    for (const auto& t : p.post) ++freq[t];
    for (const auto& t : p.response) ++freq[t];
  }
  return freq;
}

Vocabulary build_vocab(const std::vector<DialogPair>& pairs, int max_size,
                       int64_t min_freq) {
  if (max_size < 4)
    throw std::invalid_argument("build_vocab: max_size must be >= 4");
  auto freq = token_frequencies(pairs);
  std::vector<std::pair<std::string, int64_t>> entries(freq.begin(),
                                                        freq.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [token, count] : entries) {
    if (count < min_freq) break;
    if (v.size() >= max_size) break;
    v.add(token, count);
  }
  return v;
}

PosLexicon PosLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon: " + path);
  PosLexicon lex;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2)
      throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                               ": expected token<TAB>tag");
    const std::string& tag = fields[1];
    if (tag == "NOUN")
      lex.nouns_.insert(ascii_lower(fields[0]));
    else if (tag != "OTHER")
      throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                               ": unknown tag '" + tag + "'");
  }
  return lex;
}

PosLexicon PosLexicon::from_nouns(const std::vector<std::string>& nouns) {
  PosLexicon lex;
  for (const auto& n : nouns) lex.nouns_.insert(ascii_lower(n));
  return lex;
}

std::unordered_set<std::string> noun_tokens(
    const std::vector<DialogPair>& pairs, const PosLexicon& lexicon) {
  std::unordered_set<std::string> out;
  for (const auto& p : pairs) {
    for (const auto& t : p.post)
      if (lexicon.is_noun(t)) out.insert(t);
    for (const auto& t : p.response)
      if (lexicon.is_noun(t)) out.insert(t);
  }
  return out;
}

}  // namespace edgeflow

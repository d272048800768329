#include "edgeflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace edgeflow {

namespace {

using Ngram = std::vector<std::string>;
using NgramCounts = std::map<Ngram, int64_t>;

NgramCounts count_ngrams(const Sentence& s, int n) {
  NgramCounts counts;
  if (static_cast<int>(s.size()) < n) return counts;
  for (size_t i = 0; i + n <= s.size(); ++i)
    ++counts[Ngram(s.begin() + i, s.begin() + i + n)];
  return counts;
}

void check_corpus(const std::vector<Sentence>& hyps,
                  const std::vector<Sentence>& refs, const char* what) {
  if (hyps.empty()) throw std::invalid_argument(std::string(what) + ": empty corpus");
  if (hyps.size() != refs.size())
    throw std::invalid_argument(std::string(what) +
                                ": hypothesis/reference count mismatch");
}

}  // namespace

double bleu_n(const std::vector<Sentence>& hyps,
              const std::vector<Sentence>& refs, int n) {
  check_corpus(hyps, refs, "bleu_n");
  if (n < 1 || n > 4) throw std::invalid_argument("bleu_n: n must be 1..4");
  int64_t hyp_len = 0, ref_len = 0;
  std::vector<int64_t> matched(n, 0), total(n, 0);
  for (size_t s = 0; s < hyps.size(); ++s) {
    hyp_len += static_cast<int64_t>(hyps[s].size());
    ref_len += static_cast<int64_t>(refs[s].size());
    for (int order = 1; order <= n; ++order) {
      auto hc = count_ngrams(hyps[s], order);
      auto rc = count_ngrams(refs[s], order);
      for (const auto& [gram, count] : hc) {
        total[order - 1] += count;
        auto it = rc.find(gram);
        if (it != rc.end()) matched[order - 1] += std::min(count, it->second);
      }
    }
  }
  double log_prec = 0.0;
  for (int order = 1; order <= n; ++order) {
    double smooth = order >= 2 ? 1.0 : 0.0;
    double num = static_cast<double>(matched[order - 1]) + smooth;
    double den = static_cast<double>(total[order - 1]) + smooth;
    if (num <= 0.0 || den <= 0.0) return 0.0;
    log_prec += std::log(num / den);
  }
  log_prec /= static_cast<double>(n);
  double bp = hyp_len >= ref_len || hyp_len == 0
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(ref_len) /
                                       static_cast<double>(hyp_len));
  if (hyp_len == 0) return 0.0;
  return bp * std::exp(log_prec);
}

double nist_n(const std::vector<Sentence>& hyps,
              const std::vector<Sentence>& refs, int n) {
  check_corpus(hyps, refs, "nist_n");
  if (n < 1 || n > 4) throw std::invalid_argument("nist_n: n must be 1..4");

  // Reference-corpus n-gram statistics drive the information weights:
  // info(w1..wm) = log2(count(w1..w_{m-1}) / count(w1..wm)), with the
  // total reference word count as the unigram numerator.
  std::vector<NgramCounts> ref_counts(n + 1);
  int64_t ref_words = 0;
  for (const auto& ref : refs) {
    ref_words += static_cast<int64_t>(ref.size());
    for (int order = 1; order <= n; ++order) {
      auto c = count_ngrams(ref, order);
      for (const auto& [gram, count] : c) ref_counts[order][gram] += count;
    }
  }
  auto info = [&](const Ngram& gram) -> double {
    int order = static_cast<int>(gram.size());
    auto it = ref_counts[order].find(gram);
    if (it == ref_counts[order].end()) return 0.0;
    double denom = static_cast<double>(it->second);
    double numer;
    if (order == 1) {
      numer = static_cast<double>(ref_words);
    } else {
      Ngram prefix(gram.begin(), gram.end() - 1);
      numer = static_cast<double>(ref_counts[order - 1].at(prefix));
    }
    return std::log2(numer / denom);
  };

  double score = 0.0;
  int64_t hyp_words = 0;
  for (int order = 1; order <= n; ++order) {
    double gained = 0.0;
    int64_t total = 0;
    for (size_t s = 0; s < hyps.size(); ++s) {
      auto hc = count_ngrams(hyps[s], order);
      auto rc = count_ngrams(refs[s], order);
      for (const auto& [gram, count] : hc) {
        total += count;
        auto it = rc.find(gram);
        if (it != rc.end())
          gained += info(gram) *
                    static_cast<double>(std::min(count, it->second));
      }
    }
    if (total > 0) score += gained / static_cast<double>(total);
  }
  for (const auto& h : hyps) hyp_words += static_cast<int64_t>(h.size());
  // brevity factor: exp(beta * ln^2(min(1, Lhyp/Lref))), beta fixed so the
  // factor is 0.5 at a 2/3 length ratio
  double beta = std::log(0.5) / std::pow(std::log(2.0 / 3.0), 2.0);
  double ratio = ref_words > 0
                     ? static_cast<double>(hyp_words) /
                           static_cast<double>(ref_words)
                     : 1.0;
  double lr = std::log(std::min(1.0, ratio));
  double bp = std::exp(beta * lr * lr);
  return score * bp;
}

double rouge_n(const std::vector<Sentence>& hyps,
               const std::vector<Sentence>& refs, int n) {
  check_corpus(hyps, refs, "rouge_n");
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  int64_t matched = 0, ref_total = 0;
  for (size_t s = 0; s < hyps.size(); ++s) {
    auto hc = count_ngrams(hyps[s], n);
    auto rc = count_ngrams(refs[s], n);
    for (const auto& [gram, count] : rc) {
      ref_total += count;
      auto it = hc.find(gram);
      if (it != hc.end()) matched += std::min(count, it->second);
    }
  }
  return ref_total == 0 ? 0.0
                        : static_cast<double>(matched) /
                              static_cast<double>(ref_total);
}

namespace {
int64_t lcs_length(const Sentence& a, const Sentence& b) {
  std::vector<std::vector<int64_t>> dp(a.size() + 1,
                                       std::vector<int64_t>(b.size() + 1, 0));
  for (size_t i = 1; i <= a.size(); ++i)
    for (size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = a[i - 1] == b[j - 1]
                     ? dp[i - 1][j - 1] + 1
                     : std::max(dp[i - 1][j], dp[i][j - 1]);
  return dp[a.size()][b.size()];
}
}  // namespace

double rouge_l(const std::vector<Sentence>& hyps,
               const std::vector<Sentence>& refs) {
  check_corpus(hyps, refs, "rouge_l");
  double total = 0.0;
  for (size_t s = 0; s < hyps.size(); ++s) {
    if (hyps[s].empty() || refs[s].empty()) continue;
    double lcs = static_cast<double>(lcs_length(hyps[s], refs[s]));
    if (lcs == 0.0) continue;
    double p = lcs / static_cast<double>(hyps[s].size());
    double r = lcs / static_cast<double>(refs[s].size());
    total += 2.0 * p * r / (p + r);
  }
  return total / static_cast<double>(hyps.size());
}

std::string stem(const std::string& token) {
  static const char* suffixes[] = {"ing", "ed", "es", "s", "ly"};
  if (token.size() < 4) return token;
  for (const char* suf : suffixes) {
    size_t len = std::strlen(suf);
    if (token.size() > len + 2 &&
        token.compare(token.size() - len, len, suf) == 0)
      return token.substr(0, token.size() - len);
  }
  return token;
}

double meteor_lite(const std::vector<Sentence>& hyps,
                   const std::vector<Sentence>& refs) {
  check_corpus(hyps, refs, "meteor_lite");
  int64_t matches = 0, hyp_len = 0, ref_len = 0, chunks = 0;
  for (size_t s = 0; s < hyps.size(); ++s) {
    const Sentence& hyp = hyps[s];
    const Sentence& ref = refs[s];
    hyp_len += static_cast<int64_t>(hyp.size());
    ref_len += static_cast<int64_t>(ref.size());
    // alignment[i] = matched ref position of hyp word i, -1 if unmatched;
    // exact matches claim ref slots first, stem matches take the rest
    std::vector<int> alignment(hyp.size(), -1);
    std::vector<bool> ref_used(ref.size(), false);
    for (size_t i = 0; i < hyp.size(); ++i)
      for (size_t j = 0; j < ref.size(); ++j)
        if (!ref_used[j] && hyp[i] == ref[j]) {
          alignment[i] = static_cast<int>(j);
          ref_used[j] = true;
          break;
        }
    for (size_t i = 0; i < hyp.size(); ++i) {
      if (alignment[i] >= 0) continue;
      for (size_t j = 0; j < ref.size(); ++j)
        if (!ref_used[j] && stem(hyp[i]) == stem(ref[j])) {
          alignment[i] = static_cast<int>(j);
          ref_used[j] = true;
          break;
        }
    }
    int prev = -2;
    for (size_t i = 0; i < hyp.size(); ++i) {
      if (alignment[i] < 0) continue;
      ++matches;
      if (alignment[i] != prev + 1) ++chunks;
      prev = alignment[i];
    }
  }
  if (matches == 0 || hyp_len == 0 || ref_len == 0) return 0.0;
  double p = static_cast<double>(matches) / static_cast<double>(hyp_len);
  double r = static_cast<double>(matches) / static_cast<double>(ref_len);
  double fmean = 10.0 * p * r / (r + 9.0 * p);
  double frag = static_cast<double>(chunks) / static_cast<double>(matches);
  double penalty = 0.5 * frag * frag * frag;
  return fmean * (1.0 - penalty);
}

double dist_n(const std::vector<Sentence>& hyps, int n) {
  if (hyps.empty()) throw std::invalid_argument("dist_n: empty corpus");
  if (n < 1) throw std::invalid_argument("dist_n: n must be >= 1");
  NgramCounts pooled;
  int64_t total = 0;
  for (const auto& h : hyps)
    for (const auto& [gram, count] : count_ngrams(h, n)) {
      pooled[gram] += count;
      total += count;
    }
  if (total == 0)
    throw std::invalid_argument("dist_n: n exceeds every hypothesis length");
  return static_cast<double>(pooled.size()) / static_cast<double>(total);
}

double entropy_n(const std::vector<Sentence>& hyps, int n) {
  if (hyps.empty()) throw std::invalid_argument("entropy_n: empty corpus");
  if (n < 1) throw std::invalid_argument("entropy_n: n must be >= 1");
  NgramCounts pooled;
  int64_t total = 0;
  for (const auto& h : hyps)
    for (const auto& [gram, count] : count_ngrams(h, n)) {
      pooled[gram] += count;
      total += count;
    }
  if (total == 0)
    throw std::invalid_argument("entropy_n: n exceeds every hypothesis length");
  double entropy = 0.0;
  for (const auto& [gram, count] : pooled) {
    double p = static_cast<double>(count) / static_cast<double>(total);
    entropy -= p * std::log(p);
  }
  return entropy;
}

double concept_ppl(const std::vector<PplStep>& steps) {
  if (steps.empty()) throw std::invalid_argument("concept_ppl: no steps");
  double nll = 0.0;
  for (const auto& step : steps) {
    double p = step.copy_slot >= 0
                   ? step.p_copy.at(static_cast<size_t>(step.copy_slot))
                   : step.p_vocab.at(static_cast<size_t>(step.vocab_target));
    nll += -std::log(std::max(p, 1e-12));
  }
  return std::exp(nll / static_cast<double>(steps.size()));
}

EvalReport evaluate_generation(const std::vector<Sentence>& hyps,
                               const std::vector<Sentence>& refs) {
  EvalReport rep;
  for (int n = 1; n <= 4; ++n) {
    rep.bleu[n - 1] = bleu_n(hyps, refs, n);
    rep.nist[n - 1] = nist_n(hyps, refs, n);
  }
  rep.rouge_1 = rouge_n(hyps, refs, 1);
  rep.rouge_2 = rouge_n(hyps, refs, 2);
  rep.rouge_l = rouge_l(hyps, refs);
  rep.meteor_lite = meteor_lite(hyps, refs);
  rep.dist_1 = dist_n(hyps, 1);
  rep.dist_2 = dist_n(hyps, 2);
  rep.entropy_4 = entropy_n(hyps, 4);
  return rep;
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  for (int n = 1; n <= 4; ++n) j["bleu_" + std::to_string(n)] = r.bleu[n - 1];
  for (int n = 1; n <= 4; ++n) j["nist_" + std::to_string(n)] = r.nist[n - 1];
  j["rouge_1"] = r.rouge_1;
  j["rouge_2"] = r.rouge_2;
  j["rouge_l"] = r.rouge_l;
  j["meteor_lite"] = r.meteor_lite;
  j["dist_1"] = r.dist_1;
  j["dist_2"] = r.dist_2;
  j["entropy_4"] = r.entropy_4;
  j["ppl"] = r.ppl;
  j["concept_ppl"] = r.concept_ppl;
  return j.dump(2);
}

std::string report_to_table(const EvalReport& r) {
  std::ostringstream out;
  auto row = [&](const char* name, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-12s %10.4f\n", name, value);
    out << buf;
  };
  row("Bleu-3", r.bleu[2]);
  row("Bleu-4", r.bleu[3]);
  row("Nist-3", r.nist[2]);
  row("Nist-4", r.nist[3]);
  row("Rouge-1", r.rouge_1);
  row("Rouge-2", r.rouge_2);
  row("Rouge-L", r.rouge_l);
  row("meteor", r.meteor_lite);
  row("PPL", r.ppl);
  row("Ent-4", r.entropy_4);
  row("Bleu-1", r.bleu[0]);
  row("Bleu-2", r.bleu[1]);
  row("Nist-1", r.nist[0]);
  row("Nist-2", r.nist[1]);
  row("Dist-1", r.dist_1);
  row("Dist-2", r.dist_2);
  row("Concept-PPL", r.concept_ppl);
  return out.str();
}

}  // namespace edgeflow

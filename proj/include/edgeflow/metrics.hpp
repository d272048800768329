#pragma once

#include <string>
#include <vector>

namespace edgeflow {

using Sentence = std::vector<std::string>;

// Corpus-level BLEU-n: clipped modified precision per order with add-one
// smoothing on orders >= 2, geometric mean, brevity penalty.
double bleu_n(const std::vector<Sentence>& hyps,
              const std::vector<Sentence>& refs, int n);

// NIST-n: information-weighted n-gram co-occurrence summed over orders
// 1..n, with the NIST brevity factor. Information is estimated from the
// reference corpus.
double nist_n(const std::vector<Sentence>& hyps,
              const std::vector<Sentence>& refs, int n);

// Corpus recall of n-grams against the references.
double rouge_n(const std::vector<Sentence>& hyps,
               const std::vector<Sentence>& refs, int n);

// Mean per-sentence LCS F1.
double rouge_l(const std::vector<Sentence>& hyps,
               const std::vector<Sentence>& refs);

// Unigram alignment (exact first, then suffix-stemmed), harmonic mean with
// recall weighted 9:1, times a fragmentation penalty 0.5*(chunks/matches)^3.
// No external synonym resources, hence the "lite".
double meteor_lite(const std::vector<Sentence>& hyps,
                   const std::vector<Sentence>& refs);

// distinct n-grams / total n-grams, pooled over the corpus
double dist_n(const std::vector<Sentence>& hyps, int n);

// Shannon entropy (nats) of the pooled empirical n-gram distribution
double entropy_n(const std::vector<Sentence>& hyps, int n);

std::string stem(const std::string& token);

// One teacher-forced step reduced to plain numbers, for the perplexity
// variants. copy_slot is -1 when the reference token is not a subgraph
// concept; vocab_target indexes p_vocab.
struct PplStep {
  std::vector<double> p_vocab;
  std::vector<double> p_copy;
  int vocab_target = 0;
  int copy_slot = -1;
};

double concept_ppl(const std::vector<PplStep>& steps);

struct EvalReport {
  double bleu[4] = {0, 0, 0, 0};
  double nist[4] = {0, 0, 0, 0};
  double rouge_1 = 0, rouge_2 = 0, rouge_l = 0;
  double meteor_lite = 0;
  double dist_1 = 0, dist_2 = 0;
  double entropy_4 = 0;
  double ppl = 0, concept_ppl = 0;
};

// Fills every reference-based metric; ppl/concept_ppl are left for the
// caller, which needs the model.
EvalReport evaluate_generation(const std::vector<Sentence>& hyps,
                               const std::vector<Sentence>& refs);

std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

}  // namespace edgeflow

#pragma once

#include <map>
#include <string>
#include <vector>

#include "edgeflow/corpus.hpp"

namespace edgeflow {

class KnowledgeGraph;

// A dialog pair reduced to the tokens that are graph concepts.
struct ConceptPair {
  std::vector<std::string> source;  // concepts surviving in the post
  std::vector<std::string> target;  // concepts surviving in the response
};

struct AlignmentConfig {
  int em_iterations = 10;
  bool null_word = true;       // NULL source absorbs unaligned targets
  double min_prob_floor = 0.0; // entries below this are dropped after EM
};

// Translation probabilities t(target|source) estimated by IBM Model 1 EM.
// Per-source rows are normalized distributions over observed targets.
class AlignmentTable {
 public:
  double prob(const std::string& source, const std::string& target) const;

  // Up to k targets of `source`, by descending probability, ties broken
  // lexicographically. Unknown source yields an empty list.
  std::vector<std::pair<std::string, double>> top_k_targets(
      const std::string& source, int k) const;

  // All ranked targets of `source` (same ordering as top_k_targets).
  std::vector<std::pair<std::string, double>> ranked_targets(
      const std::string& source) const;

  // Source concepts with at least one entry, sorted; excludes NULL.
  std::vector<std::string> sources() const;

  // "source<TAB>target<TAB>prob" lines sorted by (source, -prob, target)
  std::string serialize() const;
  static AlignmentTable deserialize(const std::string& text);

  const std::vector<double>& log_likelihoods() const { return loglik_; }

 private:
  friend AlignmentTable train_ibm1(const std::vector<ConceptPair>&,
                                   const AlignmentConfig&);
  std::map<std::string, std::map<std::string, double>> rows_;
  std::vector<double> loglik_;  // corpus log-likelihood per EM iteration
};

// Filters each pair down to tokens that are nodes of `graph`, preserving
// order; pairs that lose either side entirely are dropped.
std::vector<ConceptPair> prepare_concept_pairs(
    const std::vector<DialogPair>& pairs, const KnowledgeGraph& graph);

// Standard IBM Model 1 EM: uniform init over co-occurring targets, then
// expected-count E-steps and renormalizing M-steps. Deterministic; the
// corpus log-likelihood is non-decreasing across iterations.
AlignmentTable train_ibm1(const std::vector<ConceptPair>& pairs,
                          const AlignmentConfig& config);

}  // namespace edgeflow

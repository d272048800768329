#pragma once

// Shared toy fixture: a small concept graph plus a deterministic corpus
// whose responses always mention concepts reachable from the post, so copy
// supervision fires on every pair.

#include <string>
#include <vector>

#include "edgeflow/corpus.hpp"
#include "edgeflow/kgraph.hpp"

namespace edgeflow::testfix {

inline KnowledgeGraph toy_graph() {
  KnowledgeGraph g;
  for (int i = 0; i < 10; ++i) g.add_node("c" + std::to_string(i));
  int rel = g.add_relation("rel0");
  int rel2 = g.add_relation("rel1");
  for (int i = 0; i < 10; ++i) {
    g.add_edge(i, rel, (i + 1) % 10);
    g.add_edge(i, rel2, (i + 3) % 10);
  }
  g.reindex();
  return g;
}

inline std::vector<DialogPair> toy_corpus(int n_pairs) {
  std::vector<DialogPair> pairs;
  auto w = [](int i) { return "w" + std::to_string(((i % 8) + 8) % 8); };
  auto c = [](int i) { return "c" + std::to_string(((i % 10) + 10) % 10); };
  for (int i = 0; i < n_pairs; ++i) {
    DialogPair p;
    p.post = {w(i), c(i), w(i + 2), w(i + 5)};
    p.response = {w(3 * i), c(i + 1), w(i + 5), c(i + 3), w(i + 1)};
    pairs.push_back(p);
  }
  return pairs;
}

}  // namespace edgeflow::testfix

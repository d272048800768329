#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "edgeflow/kgraph.hpp"

namespace edgeflow {

// Per-post retrieval result. v0/v1/v2 are disjoint, sorted by node id;
// node_order is v0 then v1 then v2. Every edge endpoint lies in the node
// sets and every edge exists in the parent graph.
struct Subgraph {
  std::vector<int> v0, v1, v2;
  std::vector<Edge> edges;       // sorted by (head, relation, tail)
  std::vector<int> node_order;   // v0 + v1 + v2

  bool empty() const { return node_order.empty(); }
  int num_nodes() const { return static_cast<int>(node_order.size()); }
};

struct RetrievalConfig {
  int two_hop_cap = 100;
  // When set, only members may become 2-hop nodes. When absent, every
  // candidate is admitted and the cap keeps the highest in-degree from V1,
  // ties broken by smaller node id.
  std::optional<std::unordered_set<int>> two_hop_base;
};

// Graph nodes whose concept string equals a post token.
std::vector<int> match_source_nodes(const std::vector<std::string>& post,
                                    const KnowledgeGraph& graph);

Subgraph retrieve(const std::vector<std::string>& post,
                  const KnowledgeGraph& graph, const RetrievalConfig& config);

std::string subgraph_to_json(const Subgraph& sg, const KnowledgeGraph& graph);

}  // namespace edgeflow

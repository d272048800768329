#pragma once

#include <vector>

#include "edgeflow/kgraph.hpp"
#include "edgeflow/nn.hpp"
#include "edgeflow/subgraph.hpp"

namespace edgeflow {

struct EdgeTransformerConfig {
  int num_layers = 3;
  int64_t hidden_dim = 64;
  int num_heads = 1;
  bool use_post_node = true;
  bool use_edge_mask = true;
  bool use_edge_embedding = true;
};

// A subgraph joined with the post node X', lowered to the attention
// structures: mask[p][q] = 1 iff node p may read node q (q is a source of
// p), and types[p][q] = the relation id carried by that slot. Graph edges
// (a,b) allow b to read a; the diagonal is SelfTO; X' is read by every node
// via FromText and reads every node via ToText. When parallel edges connect
// the same pair, the slot keeps the smallest relation id.
struct AugmentedGraph {
  int num_graph_nodes = 0;  // excludes X'
  bool has_post_node = true;
  Tensor mask;
  std::vector<std::vector<int>> types;

  int total_nodes() const { return num_graph_nodes + (has_post_node ? 1 : 0); }
  int post_index() const { return num_graph_nodes; }
};

AugmentedGraph augment(const Subgraph& sg, const KnowledgeGraph& graph,
                       bool use_post_node = true, bool use_edge_mask = true);

struct EdgeTransformerLayer {
  Ffn q, k, v, out;
  Parameter* rel_bias = nullptr;  // one scalar per relation id
};

struct GraphEncoding {
  std::vector<Var> layer_states;  // h^(0) .. h^(L)
  Var final;                      // alias of layer_states.back()
};

// Stacked edge-masked attention. Per layer: scores = Q(h_p).K(h_q)/sqrt(dh)
// + bias(e_{q,p}), normalized over each node's sources, then
// h' = FFN(h + sum of attention-weighted V(h_q)).
class EdgeTransformer {
 public:
  EdgeTransformer() = default;
  static EdgeTransformer create(ParamRegistry& reg, const std::string& prefix,
                                const EdgeTransformerConfig& config,
                                int num_relations, Rng& rng);

  // node_states: (total_nodes x hidden); X' row last when present.
  GraphEncoding encode(Tape& t, const AugmentedGraph& ag,
                       Var node_states) const;

  const EdgeTransformerConfig& config() const { return config_; }

 private:
  EdgeTransformerConfig config_;
  std::vector<EdgeTransformerLayer> layers_;
  int num_relations_ = 0;
};

}  // namespace edgeflow

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "edgeflow/aligner.hpp"
#include "edgeflow/corpus.hpp"

namespace edgeflow {

struct RetrievalConfig;
struct Subgraph;

struct Edge {
  int head;
  int relation;
  int tail;
  bool operator==(const Edge&) const = default;
  bool operator<(const Edge& o) const {
    if (head != o.head) return head < o.head;
    if (relation != o.relation) return relation < o.relation;
    return tail < o.tail;
  }
};

// Relation names reserved by the pipeline. They are registered in every
// graph, ahead of the relations found in the triples file.
inline constexpr const char* kDialogFlowTo = "DialogFlowTo";
inline constexpr const char* kSelfTo = "SelfTO";
inline constexpr const char* kFromText = "FromText";
inline constexpr const char* kToText = "ToText";

// Typed directed multigraph of concepts. Nodes and relations are interned
// strings; edges are deduplicated (head, relation, tail) triples. Immutable
// once built; enhance/ablate return new graphs.
class KnowledgeGraph {
 public:
  KnowledgeGraph();

  // Triples TSV: "head<TAB>relation<TAB>tail" per line. A single-field line
  // registers an isolated node, which keeps serialize/load a lossless round
  // trip for graphs holding nodes that no edge touches yet.
  static KnowledgeGraph load_triples(const std::string& path);
  static KnowledgeGraph parse_triples(const std::string& text);
  std::string serialize() const;

  int add_node(const std::string& name);
  int add_relation(const std::string& name);
  bool add_edge(int head, int relation, int tail);  // false if duplicate

  bool has_node(const std::string& name) const;
  int node_id(const std::string& name) const;  // -1 if absent
  const std::string& node_name(int id) const { return node_names_[id]; }
  int relation_id(const std::string& name) const;  // -1 if absent
  const std::string& relation_name(int id) const { return relation_names_[id]; }
  bool has_edge(int head, int relation, int tail) const;
  bool has_edge_any_relation(int head, int tail) const;

  int num_nodes() const { return static_cast<int>(node_names_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_relations() const { return static_cast<int>(relation_names_.size()); }

  // Rebuilds the sorted adjacency indices; call after a batch of add_edge.
  void reindex();

  const std::vector<Edge>& edges() const { return edges_; }
  // Out-edges of `node`, sorted by (tail, relation); in-edges by (head, relation).
  const std::vector<Edge>& out_edges(int node) const;
  const std::vector<Edge>& in_edges(int node) const;

  int self_to_relation() const { return self_to_; }
  int from_text_relation() const { return from_text_; }
  int to_text_relation() const { return to_text_; }
  int dialog_flow_relation() const { return dialog_flow_; }

 private:
  std::vector<std::string> node_names_;
  std::unordered_map<std::string, int> node_ids_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, int> relation_ids_;
  std::vector<Edge> edges_;
  std::unordered_set<int64_t> edge_keys_;
  std::vector<std::vector<Edge>> out_adj_;
  std::vector<std::vector<Edge>> in_adj_;
  int dialog_flow_, self_to_, from_text_, to_text_;
};

struct EnhancementConfig {
  double node_percentile_m = 0.20;
  int alignment_top_k = 5;
};

struct NamedEdge {
  std::string head;
  std::string relation;
  std::string tail;
};

// Corpus nouns that are not graph nodes and whose corpus frequency exceeds
// the frequency of the graph node at the top-m percentile (graph node
// frequencies sorted descending; threshold = the ceil(m*N)-th highest).
std::vector<std::string> extract_new_nodes(
    const std::vector<DialogPair>& pairs, const KnowledgeGraph& graph,
    const PosLexicon& lexicon, const EnhancementConfig& config);

// (source, DialogFlowTo, target) for each source's top-k alignment targets,
// skipping self-pairs and concept pairs already connected by any relation.
std::vector<NamedEdge> extract_new_edges(const AlignmentTable& table,
                                         const KnowledgeGraph& graph,
                                         const EnhancementConfig& config);

// Returns a new graph with the additions applied; the input is untouched.
// New edge endpoints must be existing nodes or members of new_nodes.
KnowledgeGraph enhance(const KnowledgeGraph& graph,
                       const std::vector<std::string>& new_nodes,
                       const std::vector<NamedEdge>& new_edges);

// For each source in the table, ranks its targets by probability and drops
// existing graph edges from the source to targets in the bottom-n fraction.
KnowledgeGraph ablate_edges(const KnowledgeGraph& graph,
                            const AlignmentTable& table,
                            double bottom_fraction);

struct HopCoverage {
  double amount = 0.0;
  double golden = 0.0;
};

struct CoverageStats {
  int64_t nodes = 0;
  int64_t edges = 0;
  double response_nodes = 0.0;
  HopCoverage hop[3];
};

CoverageStats coverage_stats(const KnowledgeGraph& graph,
                             const std::vector<DialogPair>& pairs,
                             const RetrievalConfig& config);

std::string coverage_to_json(const CoverageStats& stats);

}  // namespace edgeflow

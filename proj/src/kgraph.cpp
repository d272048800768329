#include "edgeflow/kgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "edgeflow/io_util.hpp"
#include "edgeflow/subgraph.hpp"
#include "json.hpp"

namespace edgeflow {

KnowledgeGraph::KnowledgeGraph() {
  dialog_flow_ = add_relation(kDialogFlowTo);
  self_to_ = add_relation(kSelfTo);
  from_text_ = add_relation(kFromText);
  to_text_ = add_relation(kToText);
}

int KnowledgeGraph::add_node(const std::string& name) {
  auto it = node_ids_.find(name);
  if (it != node_ids_.end()) return it->second;
  int id = num_nodes();
  node_ids_.emplace(name, id);
  node_names_.push_back(name);
  out_adj_.emplace_back();
  in_adj_.emplace_back();
  return id;
}

int KnowledgeGraph::add_relation(const std::string& name) {
  auto it = relation_ids_.find(name);
  if (it != relation_ids_.end()) return it->second;
  int id = num_relations();
  relation_ids_.emplace(name, id);
  relation_names_.push_back(name);
  return id;
}

namespace {
int64_t edge_key(int head, int relation, int tail) {
  return (static_cast<int64_t>(head) << 40) |
         (static_cast<int64_t>(relation) << 24) | static_cast<int64_t>(tail);
}
}  // namespace

bool KnowledgeGraph::add_edge(int head, int relation, int tail) {
  if (head < 0 || head >= num_nodes() || tail < 0 || tail >= num_nodes())
    throw std::invalid_argument("add_edge: endpoint is not a registered node");
  if (relation < 0 || relation >= num_relations())
    throw std::invalid_argument("add_edge: unregistered relation");
  if (!edge_keys_.insert(edge_key(head, relation, tail)).second) return false;
  Edge e{head, relation, tail};
  edges_.push_back(e);
  out_adj_[head].push_back(e);
  in_adj_[tail].push_back(e);
  return true;
}

void KnowledgeGraph::reindex() {
  auto out_less = [](const Edge& a, const Edge& b) {
    if (a.tail != b.tail) return a.tail < b.tail;
    return a.relation < b.relation;
  };
  auto in_less = [](const Edge& a, const Edge& b) {
    if (a.head != b.head) return a.head < b.head;
    return a.relation < b.relation;
  };
  for (auto& v : out_adj_) std::sort(v.begin(), v.end(), out_less);
  for (auto& v : in_adj_) std::sort(v.begin(), v.end(), in_less);
}

bool KnowledgeGraph::has_node(const std::string& name) const {
  return node_ids_.count(name) > 0;
}

int KnowledgeGraph::node_id(const std::string& name) const {
  auto it = node_ids_.find(name);
  return it == node_ids_.end() ? -1 : it->second;
}

int KnowledgeGraph::relation_id(const std::string& name) const {
  auto it = relation_ids_.find(name);
  return it == relation_ids_.end() ? -1 : it->second;
}

bool KnowledgeGraph::has_edge(int head, int relation, int tail) const {
  return edge_keys_.count(edge_key(head, relation, tail)) > 0;
}

bool KnowledgeGraph::has_edge_any_relation(int head, int tail) const {
  for (const Edge& e : out_adj_[head])
    if (e.tail == tail) return true;
  return false;
}

const std::vector<Edge>& KnowledgeGraph::out_edges(int node) const {
  return out_adj_[node];
}

const std::vector<Edge>& KnowledgeGraph::in_edges(int node) const {
  return in_adj_[node];
}

KnowledgeGraph parse_triples_impl(std::istream& in) {
  KnowledgeGraph g;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() == 1) {
      if (fields[0].empty())
        throw std::runtime_error("triples line " + std::to_string(line_no) +
                                 ": empty node name");
      g.add_node(fields[0]);
      continue;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() ||
        fields[2].empty())
      throw std::runtime_error("triples line " + std::to_string(line_no) +
                               ": expected head<TAB>relation<TAB>tail");
    int h = g.add_node(fields[0]);
    int r = g.add_relation(fields[1]);
    int t = g.add_node(fields[2]);
    g.add_edge(h, r, t);  // duplicates silently dropped
  }
  return g;
}

KnowledgeGraph KnowledgeGraph::load_triples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open triples: " + path);
  auto g = parse_triples_impl(in);
  g.reindex();
  return g;
}

KnowledgeGraph KnowledgeGraph::parse_triples(const std::string& text) {
  std::istringstream in(text);
  auto g = parse_triples_impl(in);
  g.reindex();
  return g;
}

std::string KnowledgeGraph::serialize() const {
  std::ostringstream out;
  std::vector<bool> touched(node_names_.size(), false);
  for (const Edge& e : edges_) {
    touched[e.head] = true;
    touched[e.tail] = true;
  }
  // Isolated nodes first, in id order, so loading reproduces the node set.
  for (int i = 0; i < num_nodes(); ++i)
    if (!touched[i]) out << node_names_[i] << "\n";
  for (const Edge& e : edges_)
    out << node_names_[e.head] << "\t" << relation_names_[e.relation] << "\t"
        << node_names_[e.tail] << "\n";
  return out.str();
}

std::vector<std::string> extract_new_nodes(
    const std::vector<DialogPair>& pairs, const KnowledgeGraph& graph,
    const PosLexicon& lexicon, const EnhancementConfig& config) {
  if (config.node_percentile_m <= 0.0 || config.node_percentile_m > 1.0)
    throw std::invalid_argument("extract_new_nodes: m must be in (0, 1]");
  if (graph.num_nodes() == 0) return {};
  auto freq = token_frequencies(pairs);
  auto corpus_freq = [&](const std::string& tok) -> int64_t {
    auto it = freq.find(tok);
    return it == freq.end() ? 0 : it->second;
  };

  std::vector<int64_t> node_freqs(graph.num_nodes());
  for (int i = 0; i < graph.num_nodes(); ++i)
    node_freqs[i] = corpus_freq(graph.node_name(i));
  std::sort(node_freqs.begin(), node_freqs.end(), std::greater<int64_t>());
  int idx = static_cast<int>(
      std::ceil(config.node_percentile_m * graph.num_nodes()));
  idx = std::max(1, std::min(idx, graph.num_nodes()));
  int64_t threshold = node_freqs[idx - 1];

  std::vector<std::string> out;
  for (const auto& noun : noun_tokens(pairs, lexicon)) {
    if (graph.has_node(noun)) continue;
    if (corpus_freq(noun) > threshold) out.push_back(noun);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NamedEdge> extract_new_edges(const AlignmentTable& table,
                                         const KnowledgeGraph& graph,
                                         const EnhancementConfig& config) {
  if (config.alignment_top_k < 1)
    throw std::invalid_argument("extract_new_edges: k must be >= 1");
  std::vector<NamedEdge> out;
  for (const auto& source : table.sources()) {
    int src_id = graph.node_id(source);
    for (const auto& [target, prob] :
         table.top_k_targets(source, config.alignment_top_k)) {
      (void)prob;
      if (target == source) continue;
      int tgt_id = graph.node_id(target);
      if (src_id >= 0 && tgt_id >= 0 &&
          graph.has_edge_any_relation(src_id, tgt_id))
        continue;
      out.push_back({source, kDialogFlowTo, target});
    }
  }
  return out;
}

KnowledgeGraph enhance(const KnowledgeGraph& graph,
                       const std::vector<std::string>& new_nodes,
                       const std::vector<NamedEdge>& new_edges) {
  std::unordered_set<std::string> allowed(new_nodes.begin(), new_nodes.end());
  for (const auto& e : new_edges) {
    if (!graph.has_node(e.head) && !allowed.count(e.head))
      throw std::invalid_argument("enhance: dangling edge head '" + e.head +
                                  "'");
    if (!graph.has_node(e.tail) && !allowed.count(e.tail))
      throw std::invalid_argument("enhance: dangling edge tail '" + e.tail +
                                  "'");
  }
  KnowledgeGraph g = graph;
  for (const auto& n : new_nodes) g.add_node(n);
  for (const auto& e : new_edges)
    g.add_edge(g.node_id(e.head), g.add_relation(e.relation),
               g.node_id(e.tail));
  g.reindex();
  return g;
}

KnowledgeGraph ablate_edges(const KnowledgeGraph& graph,
                            const AlignmentTable& table,
                            double bottom_fraction) {
  if (bottom_fraction < 0.0 || bottom_fraction > 1.0)
    throw std::invalid_argument("ablate_edges: n must be in [0, 1]");
  std::set<std::pair<int, int>> removed;
  for (const auto& source : table.sources()) {
    int src_id = graph.node_id(source);
    if (src_id < 0) continue;
    auto ranked = table.ranked_targets(source);
    int cut = static_cast<int>(
        std::floor(bottom_fraction * static_cast<double>(ranked.size())));
    for (size_t i = ranked.size() - cut; i < ranked.size(); ++i) {
      int tgt_id = graph.node_id(ranked[i].first);
      if (tgt_id >= 0) removed.emplace(src_id, tgt_id);
    }
  }
  KnowledgeGraph g;
  for (int i = 0; i < graph.num_nodes(); ++i) g.add_node(graph.node_name(i));
  for (int r = 0; r < graph.num_relations(); ++r)
    g.add_relation(graph.relation_name(r));
  for (const Edge& e : graph.edges()) {
    if (removed.count({e.head, e.tail})) continue;
    g.add_edge(e.head, e.relation, e.tail);
  }
  g.reindex();
  return g;
}

CoverageStats coverage_stats(const KnowledgeGraph& graph,
                             const std::vector<DialogPair>& pairs,
                             const RetrievalConfig& config) {
  CoverageStats stats;
  stats.nodes = graph.num_nodes();
  stats.edges = graph.num_edges();
  if (pairs.empty()) return stats;
  for (const auto& pair : pairs) {
    std::unordered_set<int> response_ids;
    for (const auto& t : pair.response) {
      int id = graph.node_id(t);
      if (id >= 0) response_ids.insert(id);
    }
    stats.response_nodes += static_cast<double>(response_ids.size());
    Subgraph sg = retrieve(pair.post, graph, config);
    const std::vector<int>* hops[3] = {&sg.v0, &sg.v1, &sg.v2};
    for (int h = 0; h < 3; ++h) {
      stats.hop[h].amount += static_cast<double>(hops[h]->size());
      for (int node : *hops[h])
        if (response_ids.count(node)) stats.hop[h].golden += 1.0;
    }
  }
  double n = static_cast<double>(pairs.size());
  stats.response_nodes /= n;
  for (auto& h : stats.hop) {
    h.amount /= n;
    h.golden /= n;
  }
  return stats;
}

std::string coverage_to_json(const CoverageStats& stats) {
  nlohmann::ordered_json j;
  j["nodes"] = stats.nodes;
  j["edges"] = stats.edges;
  j["response_nodes"] = stats.response_nodes;
  const char* names[3] = {"zero_hop", "one_hop", "two_hop"};
  for (int h = 0; h < 3; ++h) {
    j[names[h]]["amount"] = stats.hop[h].amount;
    j[names[h]]["golden"] = stats.hop[h].golden;
  }
  return j.dump(2);
}

}  // namespace edgeflow

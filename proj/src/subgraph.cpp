#include "edgeflow/subgraph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace edgeflow {

std::vector<int> match_source_nodes(const std::vector<std::string>& post,
                                    const KnowledgeGraph& graph) {
  std::set<int> matched;
  for (const auto& tok : post) {
    int id = graph.node_id(tok);
    if (id >= 0) matched.insert(id);
  }
  return {matched.begin(), matched.end()};
}

Subgraph retrieve(const std::vector<std::string>& post,
                  const KnowledgeGraph& graph, const RetrievalConfig& config) {
  if (config.two_hop_cap < 0)
    throw std::invalid_argument("retrieve: two_hop_cap must be >= 0");
  Subgraph sg;
  sg.v0 = match_source_nodes(post, graph);
  std::unordered_set<int> in_v0(sg.v0.begin(), sg.v0.end());

  std::set<Edge> edges;
  std::set<int> v1;
  for (int a : sg.v0) {
    for (const Edge& e : graph.out_edges(a)) {
      edges.insert(e);
      if (!in_v0.count(e.tail)) v1.insert(e.tail);
    }
  }
  sg.v1 = {v1.begin(), v1.end()};

  // 2-hop candidates with their V1 in-degree (distinct V1 sources) and the
  // edges that reach them, collected before the cap is applied.
  std::map<int, std::set<int>> cand_sources;
  std::map<int, std::vector<Edge>> cand_edges;
  for (int a : sg.v1) {
    for (const Edge& e : graph.out_edges(a)) {
      int b = e.tail;
      if (in_v0.count(b) || v1.count(b)) {
        edges.insert(e);
        continue;
      }
      if (config.two_hop_base && !config.two_hop_base->count(b)) continue;
      cand_sources[b].insert(a);
      cand_edges[b].push_back(e);
    }
  }

  std::vector<int> candidates;
  candidates.reserve(cand_sources.size());
  for (const auto& [b, srcs] : cand_sources) candidates.push_back(b);
  if (static_cast<int>(candidates.size()) > config.two_hop_cap) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](int a, int b) {
                       size_t da = cand_sources[a].size();
                       size_t db = cand_sources[b].size();
                       if (da != db) return da > db;
                       return a < b;
                     });
    candidates.resize(config.two_hop_cap);
    std::sort(candidates.begin(), candidates.end());
  }
  sg.v2 = candidates;
  for (int b : sg.v2)
    for (const Edge& e : cand_edges[b]) edges.insert(e);

  sg.edges = {edges.begin(), edges.end()};
  sg.node_order = sg.v0;
  sg.node_order.insert(sg.node_order.end(), sg.v1.begin(), sg.v1.end());
  sg.node_order.insert(sg.node_order.end(), sg.v2.begin(), sg.v2.end());
  return sg;
}

std::string subgraph_to_json(const Subgraph& sg, const KnowledgeGraph& graph) {
  nlohmann::ordered_json j;
  auto names = [&](const std::vector<int>& ids) {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(graph.node_name(id));
    return out;
  };
  j["v0"] = names(sg.v0);
  j["v1"] = names(sg.v1);
  j["v2"] = names(sg.v2);
  auto edges = nlohmann::ordered_json::array();
  for (const Edge& e : sg.edges)
    edges.push_back({graph.node_name(e.head), graph.relation_name(e.relation),
                     graph.node_name(e.tail)});
  j["edges"] = edges;
  return j.dump();
}

}  // namespace edgeflow

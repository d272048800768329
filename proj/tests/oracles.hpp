#pragma once

// Test-only oracles, deliberately independent of the library's indexed or
// taped implementations: a raw-edge-list retrieval re-run, a plain-loop
// vanilla transformer layer, and reachability helpers.

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <vector>

#include "edgeflow/edge_transformer.hpp"
#include "edgeflow/nn.hpp"
#include "edgeflow/subgraph.hpp"

namespace edgeflow::testfix {

inline Subgraph brute_force_retrieve(const std::vector<std::string>& post,
                                     const KnowledgeGraph& g,
                                     const RetrievalConfig& cfg) {
  Subgraph sg;
  std::set<int> v0;
  for (const auto& tok : post)
    for (int i = 0; i < g.num_nodes(); ++i)
      if (g.node_name(i) == tok) v0.insert(i);

  std::set<Edge> edges;
  std::set<int> v1;
  for (int a : v0)
    for (const Edge& e : g.edges())
      if (e.head == a) {
        edges.insert(e);
        if (!v0.count(e.tail)) v1.insert(e.tail);
      }

  std::map<int, std::set<int>> sources;
  for (int a : v1)
    for (const Edge& e : g.edges()) {
      if (e.head != a) continue;
      if (v0.count(e.tail) || v1.count(e.tail)) {
        edges.insert(e);
      } else if (!cfg.two_hop_base || cfg.two_hop_base->count(e.tail)) {
        sources[e.tail].insert(a);
      }
    }

  std::vector<int> cands;
  for (const auto& [b, srcs] : sources) cands.push_back(b);
  std::sort(cands.begin(), cands.end(), [&](int x, int y) {
    if (sources[x].size() != sources[y].size())
      return sources[x].size() > sources[y].size();
    return x < y;
  });
  if (static_cast<int>(cands.size()) > cfg.two_hop_cap)
    cands.resize(cfg.two_hop_cap);
  std::set<int> v2(cands.begin(), cands.end());
  for (int a : v1)
    for (const Edge& e : g.edges())
      if (e.head == a && v2.count(e.tail)) edges.insert(e);

  sg.v0 = {v0.begin(), v0.end()};
  sg.v1 = {v1.begin(), v1.end()};
  sg.v2 = {v2.begin(), v2.end()};
  sg.edges = {edges.begin(), edges.end()};
  sg.node_order = sg.v0;
  sg.node_order.insert(sg.node_order.end(), sg.v1.begin(), sg.v1.end());
  sg.node_order.insert(sg.node_order.end(), sg.v2.begin(), sg.v2.end());
  return sg;
}

inline bool same_subgraph(const Subgraph& a, const Subgraph& b) {
  return a.v0 == b.v0 && a.v1 == b.v1 && a.v2 == b.v2 && a.edges == b.edges &&
         a.node_order == b.node_order;
}

inline KnowledgeGraph random_graph(Rng& rng, int max_nodes, int num_relations,
                                   double edge_density) {
  KnowledgeGraph g;
  int n = 2 + static_cast<int>(rng.uniform_int(max_nodes - 1));
  for (int i = 0; i < n; ++i) g.add_node("c" + std::to_string(i));
  std::vector<int> rels;
  for (int r = 0; r < num_relations; ++r)
    rels.push_back(g.add_relation("r" + std::to_string(r)));
  int edges = static_cast<int>(edge_density * n * n);
  for (int e = 0; e < edges; ++e)
    g.add_edge(static_cast<int>(rng.uniform_int(n)),
               rels[rng.uniform_int(static_cast<int64_t>(rels.size()))],
               static_cast<int>(rng.uniform_int(n)));
  g.reindex();
  return g;
}

// Plain-loop affine-relu-affine block reading the same parameter tensors.
struct PlainFfn {
  const Tensor *w1, *b1, *w2, *b2;
  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> h(static_cast<size_t>(w1->rows()), 0.0);
    for (int64_t i = 0; i < w1->rows(); ++i) {
      double acc = (*b1)[i];
      for (int64_t j = 0; j < w1->cols(); ++j) acc += w1->at(i, j) * x[j];
      h[i] = std::max(0.0, acc);
    }
    std::vector<double> out(static_cast<size_t>(w2->rows()), 0.0);
    for (int64_t i = 0; i < w2->rows(); ++i) {
      double acc = (*b2)[i];
      for (int64_t j = 0; j < w2->cols(); ++j) acc += w2->at(i, j) * h[j];
      out[i] = acc;
    }
    return out;
  }
};

inline PlainFfn plain_ffn(const ParamRegistry& reg, const std::string& prefix) {
  return {&reg.find(prefix + ".w1")->value, &reg.find(prefix + ".b1")->value,
          &reg.find(prefix + ".w2")->value, &reg.find(prefix + ".b2")->value};
}

// Single-head full-attention transformer layer: softmax(QK^T/sqrt(d)) V,
// then FFN over the residual sum. The reference for mask-off equivalence.
inline std::vector<std::vector<double>> vanilla_reference_layer(
    const ParamRegistry& reg, const std::string& lp,
    const std::vector<std::vector<double>>& h) {
  size_t n = h.size(), d = h[0].size();
  PlainFfn q = plain_ffn(reg, lp + ".q"), k = plain_ffn(reg, lp + ".k");
  PlainFfn v = plain_ffn(reg, lp + ".v"), out = plain_ffn(reg, lp + ".out");
  std::vector<std::vector<double>> qh, kh, vh;
  for (const auto& row : h) {
    qh.push_back(q.apply(row));
    kh.push_back(k.apply(row));
    vh.push_back(v.apply(row));
  }
  double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<std::vector<double>> result;
  for (size_t p = 0; p < n; ++p) {
    std::vector<double> scores(n, 0.0);
    for (size_t s = 0; s < n; ++s) {
      double acc = 0.0;
      for (size_t j = 0; j < d; ++j) acc += qh[p][j] * kh[s][j];
      scores[s] = acc * scale;
    }
    double mx = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double& s : scores) {
      s = std::exp(s - mx);
      z += s;
    }
    std::vector<double> u(d, 0.0);
    for (size_t s = 0; s < n; ++s)
      for (size_t j = 0; j < d; ++j) u[j] += (scores[s] / z) * vh[s][j];
    std::vector<double> pre(d);
    for (size_t j = 0; j < d; ++j) pre[j] = h[p][j] + u[j];
    result.push_back(out.apply(pre));
  }
  return result;
}

// influence adjacency: q -> p when node p may read node q
inline std::vector<std::vector<int>> influence_adj(const AugmentedGraph& ag) {
  int n = ag.total_nodes();
  std::vector<std::vector<int>> adj(n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      if (ag.mask.at(p, q) > 0.5) adj[q].push_back(p);
  return adj;
}

inline std::vector<int> hop_distances(const std::vector<std::vector<int>>& adj,
                                      int source) {
  std::vector<int> dist(adj.size(), -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int w : adj[u])
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        q.push(w);
      }
  }
  return dist;
}

}  // namespace edgeflow::testfix

#include "edgeflow/edge_transformer.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace edgeflow {

AugmentedGraph augment(const Subgraph& sg, const KnowledgeGraph& graph,
                       bool use_post_node, bool use_edge_mask) {
  AugmentedGraph ag;
  ag.num_graph_nodes = sg.num_nodes();
  ag.has_post_node = use_post_node;
  int n = ag.total_nodes();
  ag.mask = Tensor::matrix(n, n, use_edge_mask ? 0.0 : 1.0);
  ag.types.assign(n, std::vector<int>(n, -1));
  if (n == 0) return ag;

  std::unordered_map<int, int> index_of;
  for (int i = 0; i < sg.num_nodes(); ++i) index_of[sg.node_order[i]] = i;

  // Graph edge (a,b) means b reads a: slot (b, a).
  for (const Edge& e : sg.edges) {
    if (e.head == e.tail) continue;  // diagonal slots belong to SelfTO
    int a = index_of.at(e.head), b = index_of.at(e.tail);
    ag.mask.at(b, a) = 1.0;
    if (ag.types[b][a] < 0) ag.types[b][a] = e.relation;
  }
  for (int i = 0; i < sg.num_nodes(); ++i) {
    ag.mask.at(i, i) = 1.0;
    ag.types[i][i] = graph.self_to_relation();
  }
  if (use_post_node) {
    int x = ag.post_index();
    for (int i = 0; i < sg.num_nodes(); ++i) {
      ag.mask.at(i, x) = 1.0;  // FromText: X' -> node, node reads X'
      ag.types[i][x] = graph.from_text_relation();
      ag.mask.at(x, i) = 1.0;  // ToText: node -> X', X' reads node
      ag.types[x][i] = graph.to_text_relation();
    }
    ag.mask.at(x, x) = 1.0;
    ag.types[x][x] = graph.self_to_relation();
  }
  return ag;
}

EdgeTransformer EdgeTransformer::create(ParamRegistry& reg,
                                        const std::string& prefix,
                                        const EdgeTransformerConfig& config,
                                        int num_relations, Rng& rng) {
  if (config.hidden_dim <= 0 || config.num_layers <= 0 ||
      config.num_heads <= 0)
    throw std::invalid_argument("EdgeTransformer: dims must be positive");
  if (config.hidden_dim % config.num_heads != 0)
    throw std::invalid_argument(
        "EdgeTransformer: hidden_dim must be divisible by num_heads");
  EdgeTransformer ef;
  ef.config_ = config;
  ef.num_relations_ = num_relations;
  int64_t d = config.hidden_dim;
  for (int l = 0; l < config.num_layers; ++l) {
    std::string lp = prefix + ".l" + std::to_string(l);
    EdgeTransformerLayer layer;
    layer.q = Ffn::create(reg, lp + ".q", d, d, d, rng);
    layer.k = Ffn::create(reg, lp + ".k", d, d, d, rng);
    layer.v = Ffn::create(reg, lp + ".v", d, d, d, rng);
    layer.out = Ffn::create(reg, lp + ".out", d, d, d, rng);
    layer.rel_bias = reg.create(lp + ".rel_bias", Tensor({num_relations}, 0.0));
    ef.layers_.push_back(layer);
  }
  return ef;
}

GraphEncoding EdgeTransformer::encode(Tape& t, const AugmentedGraph& ag,
                                      Var node_states) const {
  const Tensor& states = t.val(node_states);
  if (states.shape().size() != 2 || states.rows() != ag.total_nodes() ||
      states.cols() != config_.hidden_dim)
    throw std::invalid_argument("encode: node state shape " +
                                states.shape_str() + " does not match graph");
  for (const auto& row : ag.types)
    for (int e : row)
      if (e >= num_relations_)
        throw std::invalid_argument("encode: unregistered relation id " +
                                    std::to_string(e));

  GraphEncoding enc;
  Var h = node_states;
  enc.layer_states.push_back(h);
  int64_t n = ag.total_nodes();
  int heads = config_.num_heads;
  int64_t dh = config_.hidden_dim / heads;
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  for (const auto& layer : layers_) {
    if (n == 0) {
      enc.layer_states.push_back(h);
      continue;
    }
    Var qh = layer.q.apply(t, h);
    Var kh = layer.k.apply(t, h);
    Var vh = layer.v.apply(t, h);
    Var bias;
    if (config_.use_edge_embedding)
      bias = t.relation_bias(t.leaf(*layer.rel_bias), ag.types);
    std::vector<Var> head_outputs;
    for (int hd = 0; hd < heads; ++hd) {
      Var qs = heads == 1 ? qh : t.col_slice(qh, hd * dh, dh);
      Var ks = heads == 1 ? kh : t.col_slice(kh, hd * dh, dh);
      Var vs = heads == 1 ? vh : t.col_slice(vh, hd * dh, dh);
      Var scores = t.scale(t.matmul_nt(qs, ks), inv_sqrt);
      if (bias.valid()) scores = t.add(scores, bias);
      Var attn = t.masked_softmax(scores, ag.mask);
      head_outputs.push_back(t.attend(attn, vs, ag.mask));
    }
    Var u = heads == 1 ? head_outputs[0] : t.concat_cols(head_outputs);
    h = layer.out.apply(t, t.add(h, u));
    enc.layer_states.push_back(h);
  }
  enc.final = h;
  return enc;
}

}  // namespace edgeflow

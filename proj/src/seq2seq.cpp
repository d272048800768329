#include "edgeflow/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "edgeflow/io_util.hpp"

namespace edgeflow {

DialogModel::DialogModel(const Seq2SeqConfig& cfg,
                         const EdgeTransformerConfig& ef_cfg,
                         const Vocabulary& vocab, const KnowledgeGraph& graph,
                         uint64_t seed)
    : cfg_(cfg), ef_cfg_(ef_cfg), vocab_(&vocab), graph_(&graph) {
  if (cfg_.hidden_dim <= 0 || cfg_.embedding_dim <= 0)
    throw std::invalid_argument("DialogModel: dims must be positive");
  if (cfg_.dropout < 0.0 || cfg_.dropout >= 1.0)
    throw std::invalid_argument("DialogModel: dropout must be in [0, 1)");
  ef_cfg_.hidden_dim = cfg_.hidden_dim;  // graph and text share one width

  Rng rng(seed);
  int64_t h = cfg_.hidden_dim, e = cfg_.embedding_dim;
  word_emb_ = registry_.create(
      "word_emb", normal_init(rng, {vocab.size(), e}, 0.1));
  node_emb_ = registry_.create(
      "node_emb", normal_init(rng, {std::max(graph.num_nodes(), 1), h}, 0.1));
  enc_gru_[0] = GruCell::create(registry_, "enc.gru0", e, h, rng);
  enc_gru_[1] = GruCell::create(registry_, "enc.gru1", h, h, rng);
  edgeformer_ =
      EdgeTransformer::create(registry_, "ef", ef_cfg_, graph.num_relations(), rng);
  dec_gru_[0] = GruCell::create(registry_, "dec.gru0", e + 2 * h, h, rng);
  dec_gru_[1] = GruCell::create(registry_, "dec.gru1", h, h, rng);
  text_attn_ = AdditiveAttention::create(registry_, "attn.text", h, h, h, rng);
  graph_attn_ =
      AdditiveAttention::create(registry_, "attn.graph", h, h, h, rng);
  gate_ffn_ = Ffn::create(registry_, "gate", h, h, 1, rng);
  vocab_ffn_ = Ffn::create(registry_, "vocab", h, h, vocab.size(), rng);
  copy_ffn_ = Ffn::create(registry_, "copy", 1, h, 1, rng);
}

int DialogModel::load_node_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embeddings: " + path);
  std::string line;
  int loaded = 0, line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2)
      throw std::runtime_error("embedding line " + std::to_string(line_no) +
                               ": expected concept<TAB>values");
    int node = graph_->node_id(fields[0]);
    auto parts = split(fields[1], ',');
    if (static_cast<int64_t>(parts.size()) != cfg_.hidden_dim)
      throw std::runtime_error("embedding line " + std::to_string(line_no) +
                               ": expected " + std::to_string(cfg_.hidden_dim) +
                               " values, got " + std::to_string(parts.size()));
    if (node < 0) continue;  // concept not in this graph
    for (int64_t j = 0; j < cfg_.hidden_dim; ++j)
      node_emb_->value.at(node, j) = std::stod(parts[j]);
    ++loaded;
  }
  return loaded;
}

Var DialogModel::embed(Tape& t, int token_id, Rng* dropout_rng) const {
  Var v = t.row(t.leaf(*word_emb_), token_id);
  if (dropout_rng) v = t.dropout(v, cfg_.dropout, *dropout_rng);
  return v;
}

DialogModel::PostEncoding DialogModel::encode_post(
    Tape& t, const std::vector<int>& post_ids, Rng* dropout_rng) const {
  if (post_ids.empty())
    throw std::invalid_argument("encode_post: empty post");
  Var h0 = t.constant(Tensor({cfg_.hidden_dim}, 0.0));
  Var h1 = h0;
  std::vector<Var> top_states;
  top_states.reserve(post_ids.size());
  for (int id : post_ids) {
    Var x = embed(t, id, dropout_rng);
    h0 = enc_gru_[0].step(t, x, h0);
    Var mid = dropout_rng ? t.dropout(h0, cfg_.dropout, *dropout_rng) : h0;
    h1 = enc_gru_[1].step(t, mid, h1);
    top_states.push_back(h1);
  }
  PostEncoding enc;
  enc.states = t.stack_rows(top_states);
  enc.final_top = h1;
  enc.final_layers = {h0, h1};
  return enc;
}

Var DialogModel::encode_graph(Tape& t, const Subgraph& sg,
                              const AugmentedGraph& ag,
                              const PostEncoding& post) const {
  if (ag.num_graph_nodes != sg.num_nodes())
    throw std::invalid_argument("encode_graph: augmented graph mismatch");
  if (ag.total_nodes() == 0)
    return t.constant(Tensor::matrix(0, cfg_.hidden_dim));
  Var states;
  if (sg.num_nodes() > 0) {
    std::vector<int64_t> idx(sg.node_order.begin(), sg.node_order.end());
    states = t.rows(t.leaf(*node_emb_), idx);
    if (ag.has_post_node) states = t.append_row(states, post.final_top);
  } else {
    states = t.stack_rows({post.final_top});
  }
  return edgeformer_.encode(t, ag, states).final;
}

DialogModel::DecoderState DialogModel::initial_state(
    Tape& t, const PostEncoding& post) const {
  DecoderState st;
  st.s = post.final_layers;
  st.c_text = t.constant(Tensor({cfg_.hidden_dim}, 0.0));
  st.c_graph = t.constant(Tensor({cfg_.hidden_dim}, 0.0));
  return st;
}

std::pair<DialogModel::DecoderState, DialogModel::GenerationStep>
DialogModel::decoder_step(Tape& t, const DecoderState& prev, int y_prev_id,
                          Var text_states, Var graph_encoding,
                          int num_graph_nodes, Rng* dropout_rng) const {
  Var y_emb = embed(t, y_prev_id, dropout_rng);
  Var x = t.concat({y_emb, prev.c_text, prev.c_graph});

  DecoderState next;
  next.s[0] = dec_gru_[0].step(t, x, prev.s[0]);
  Var mid = dropout_rng ? t.dropout(next.s[0], cfg_.dropout, *dropout_rng)
                        : next.s[0];
  next.s[1] = dec_gru_[1].step(t, mid, prev.s[1]);
  Var s_top = next.s[1];

  auto text = text_attn_.apply(t, s_top, text_states);
  next.c_text = text.context;

  GenerationStep step;
  int64_t h_rows = t.val(graph_encoding).shape().size() == 2
                       ? t.val(graph_encoding).rows()
                       : 0;
  if (h_rows > 0) {
    auto graph = graph_attn_.apply(t, s_top, graph_encoding);
    next.c_graph = graph.context;
    step.attn_graph = graph.weights;
  } else {
    next.c_graph = t.constant(Tensor({cfg_.hidden_dim}, 0.0));
  }

  step.p_vocab = t.softmax(vocab_ffn_.apply(t, s_top));
  step.has_copy = num_graph_nodes > 0;
  if (step.has_copy) {
    step.gate = t.reshape(t.sigmoid(gate_ffn_.apply(t, s_top)), {});
    // Copy head: a shared scalar map over each node's attention weight,
    // renormalized over the subgraph slots (X' is not copyable).
    Var node_attn = t.slice(step.attn_graph, 0, num_graph_nodes);
    Var logits = copy_ffn_.apply(t, t.reshape(node_attn, {num_graph_nodes, 1}));
    step.p_copy = t.softmax(t.reshape(logits, {num_graph_nodes}));
  } else {
    step.gate = t.constant(Tensor::scalar(0.0));
  }
  return {next, step};
}

int DialogModel::copy_slot_for(const std::string& token,
                               const Subgraph& sg) const {
  for (int i = 0; i < sg.num_nodes(); ++i)
    if (graph_->node_name(sg.node_order[i]) == token) return i;
  return -1;
}

DialogModel::LossVars DialogModel::compute_loss(
    Tape& t, const std::vector<GenerationStep>& steps,
    const std::vector<std::string>& reference_tokens,
    const Subgraph& sg) const {
  if (steps.size() != reference_tokens.size())
    throw std::invalid_argument("compute_loss: steps/reference length mismatch");
  std::vector<Var> gen_terms, copy_terms, gate_terms;
  for (size_t i = 0; i < steps.size(); ++i) {
    const GenerationStep& step = steps[i];
    const std::string& token = reference_tokens[i];
    int slot = step.has_copy ? copy_slot_for(token, sg) : -1;
    bool is_copy = slot >= 0;
    gate_terms.push_back(t.bce(step.gate, is_copy ? 1.0 : 0.0));
    if (is_copy)
      copy_terms.push_back(t.cross_entropy(step.p_copy, slot));
    else
      gen_terms.push_back(t.cross_entropy(step.p_vocab, vocab_->id(token)));
  }
  auto mean_of = [&](const std::vector<Var>& terms) {
    if (terms.empty()) return t.constant(Tensor::scalar(0.0));
    return t.scale(t.add_n(terms), 1.0 / static_cast<double>(terms.size()));
  };
  LossVars loss;
  loss.gen = mean_of(gen_terms);
  loss.copy = mean_of(copy_terms);
  loss.gate = mean_of(gate_terms);
  loss.total = t.add(t.add(loss.gen, loss.copy), loss.gate);
  return loss;
}

DialogModel::ExampleForward DialogModel::forward_example(
    Tape& t, const DialogPair& pair, const Subgraph& sg,
    Rng* dropout_rng) const {
  ExampleForward fwd;
  auto post = encode_post(t, vocab_->encode(pair.post), dropout_rng);
  AugmentedGraph ag =
      augment(sg, *graph_, ef_cfg_.use_post_node, ef_cfg_.use_edge_mask);
  Var graph_enc = encode_graph(t, sg, ag, post);

  fwd.reference_tokens = pair.response;
  fwd.reference_tokens.push_back("<eos>");

  DecoderState state = initial_state(t, post);
  int y_prev = Vocabulary::kBos;
  for (const auto& token : fwd.reference_tokens) {
    auto [next, step] = decoder_step(t, state, y_prev, post.states, graph_enc,
                                     sg.num_nodes(), dropout_rng);
    state = next;
    fwd.steps.push_back(step);
    y_prev = vocab_->id(token);
  }
  fwd.loss = compute_loss(t, fwd.steps, fwd.reference_tokens, sg);
  return fwd;
}

double DialogModel::step_token_prob(const Tape& t, const GenerationStep& step,
                                    const std::string& token,
                                    const Subgraph& sg) const {
  double sigma = t.val(step.gate)[0];
  double p = (1.0 - sigma) * t.val(step.p_vocab)[vocab_->id(token)];
  if (step.has_copy) {
    const Tensor& pc = t.val(step.p_copy);
    for (int q = 0; q < sg.num_nodes(); ++q)
      if (graph_->node_name(sg.node_order[q]) == token) p += sigma * pc[q];
  }
  return p;
}

std::vector<std::string> DialogModel::greedy_decode(
    const std::vector<std::string>& post, const Subgraph& sg,
    int max_len) const {
  if (max_len < 0) max_len = cfg_.max_decode_len;
  Tape t(false);
  auto enc = encode_post(t, vocab_->encode(post));
  AugmentedGraph ag =
      augment(sg, *graph_, ef_cfg_.use_post_node, ef_cfg_.use_edge_mask);
  Var graph_enc = encode_graph(t, sg, ag, enc);

  std::vector<std::string> out;
  DecoderState state = initial_state(t, enc);
  int y_prev = Vocabulary::kBos;
  for (int i = 0; i < max_len; ++i) {
    auto [next, step] = decoder_step(t, state, y_prev, enc.states, graph_enc,
                                     sg.num_nodes());
    state = next;
    double sigma = t.val(step.gate)[0];
    const Tensor& pv = t.val(step.p_vocab);
    int best_slot = 0;
    double best = -1.0;
    bool best_is_copy = false;
    for (int64_t j = 0; j < pv.numel(); ++j) {
      double p = (1.0 - sigma) * pv[j];
      if (p > best) {
        best = p;
        best_slot = static_cast<int>(j);
        best_is_copy = false;
      }
    }
    if (step.has_copy) {
      const Tensor& pc = t.val(step.p_copy);
      for (int64_t q = 0; q < pc.numel(); ++q) {
        double p = sigma * pc[q];
        if (p > best) {
          best = p;
          best_slot = static_cast<int>(q);
          best_is_copy = true;
        }
      }
    }
    std::string token = best_is_copy
                            ? graph_->node_name(sg.node_order[best_slot])
                            : vocab_->token(best_slot);
    if (!best_is_copy && best_slot == Vocabulary::kEos) break;
    out.push_back(token);
    y_prev = vocab_->id(token);
  }
  return out;
}

LossBreakdown DialogModel::loss_values(const Tape& t,
                                       const LossVars& loss) const {
  LossBreakdown b;
  b.gen = t.val(loss.gen)[0];
  b.copy = t.val(loss.copy)[0];
  b.gate = t.val(loss.gate)[0];
  b.total = t.val(loss.total)[0];
  return b;
}

}  // namespace edgeflow

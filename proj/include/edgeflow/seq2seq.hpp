#pragma once

#include <array>
#include <string>
#include <vector>

#include "edgeflow/corpus.hpp"
#include "edgeflow/edge_transformer.hpp"
#include "edgeflow/nn.hpp"
#include "edgeflow/subgraph.hpp"

namespace edgeflow {

struct Seq2SeqConfig {
  int64_t hidden_dim = 64;
  int64_t embedding_dim = 64;
  double dropout = 0.2;
  int max_decode_len = 30;
};

struct LossBreakdown {
  double gen = 0.0, copy = 0.0, gate = 0.0, total = 0.0;
};

// Two-layer GRU encoder and decoder around the graph encoder. The decoder
// attends over the post states and the graph encoding, mixes a vocabulary
// softmax with a copy distribution over subgraph nodes through a learned
// gate, and is trained with the three-part generation/copy/gate loss.
class DialogModel {
 public:
  DialogModel(const Seq2SeqConfig& cfg, const EdgeTransformerConfig& ef_cfg,
              const Vocabulary& vocab, const KnowledgeGraph& graph,
              uint64_t seed);

  ParamRegistry& params() { return registry_; }
  const ParamRegistry& params() const { return registry_; }
  const Seq2SeqConfig& config() const { return cfg_; }
  const EdgeTransformerConfig& ef_config() const { return ef_cfg_; }
  const Vocabulary& vocab() const { return *vocab_; }
  const KnowledgeGraph& graph() const { return *graph_; }

  // Overwrites node embedding rows from a "concept<TAB>v1,v2,..." file.
  // Unknown concepts are skipped; a wrong vector width is an error.
  int load_node_embeddings(const std::string& path);

  struct PostEncoding {
    Var states;                     // (T x hidden) top-layer states
    Var final_top;                  // X' source vector
    std::array<Var, 2> final_layers;
  };
  PostEncoding encode_post(Tape& t, const std::vector<int>& post_ids,
                           Rng* dropout_rng = nullptr) const;

  struct DecoderState {
    std::array<Var, 2> s;
    Var c_text, c_graph;
  };

  struct GenerationStep {
    Var gate;        // scalar; constant 0 when the subgraph is empty
    Var p_vocab;     // (V)
    Var p_copy;      // (num subgraph nodes); invalid when none
    Var attn_graph;  // weights over graph encoding rows; invalid when none
    bool has_copy = false;
  };

  // Graph encoding for one subgraph: node embedding rows in node_order,
  // plus the X' row built from the post encoding when enabled. Rows may be
  // zero (empty subgraph, post node disabled).
  Var encode_graph(Tape& t, const Subgraph& sg, const AugmentedGraph& ag,
                   const PostEncoding& post) const;

  DecoderState initial_state(Tape& t, const PostEncoding& post) const;

  // One decode step: state update from the previous step's contexts, fresh
  // attention from the new state, then the gate/vocab/copy heads.
  std::pair<DecoderState, GenerationStep> decoder_step(
      Tape& t, const DecoderState& prev, int y_prev_id, Var text_states,
      Var graph_encoding, int num_graph_nodes,
      Rng* dropout_rng = nullptr) const;

  struct LossVars {
    Var gen, copy, gate, total;
  };
  // Copy supervision: a step whose reference token equals a subgraph concept
  // is a copy step targeting the first matching node slot. L_gen covers
  // non-copy steps only and L_copy covers copy steps only; the gate sees a
  // binary label at every step.
  LossVars compute_loss(Tape& t, const std::vector<GenerationStep>& steps,
                        const std::vector<std::string>& reference_tokens,
                        const Subgraph& sg) const;

  struct ExampleForward {
    std::vector<GenerationStep> steps;
    std::vector<std::string> reference_tokens;  // response + <eos>
    LossVars loss;
  };
  ExampleForward forward_example(Tape& t, const DialogPair& pair,
                                 const Subgraph& sg,
                                 Rng* dropout_rng = nullptr) const;

  // Mixture probability of emitting `token` given evaluated step values.
  double step_token_prob(const Tape& t, const GenerationStep& step,
                         const std::string& token, const Subgraph& sg) const;

  std::vector<std::string> greedy_decode(const std::vector<std::string>& post,
                                         const Subgraph& sg,
                                         int max_len = -1) const;

  LossBreakdown loss_values(const Tape& t, const LossVars& loss) const;

  int copy_slot_for(const std::string& token, const Subgraph& sg) const;

 private:
  Var embed(Tape& t, int token_id, Rng* dropout_rng) const;

  Seq2SeqConfig cfg_;
  EdgeTransformerConfig ef_cfg_;
  const Vocabulary* vocab_;
  const KnowledgeGraph* graph_;
  ParamRegistry registry_;
  Parameter* word_emb_;
  Parameter* node_emb_;
  GruCell enc_gru_[2];
  GruCell dec_gru_[2];
  AdditiveAttention text_attn_;
  AdditiveAttention graph_attn_;
  Ffn gate_ffn_;
  Ffn vocab_ffn_;
  Ffn copy_ffn_;
  EdgeTransformer edgeformer_;
};

}  // namespace edgeflow

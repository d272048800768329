#pragma once

#include <cstdint>
#include <string>

#include "edgeflow/aligner.hpp"
#include "edgeflow/edge_transformer.hpp"
#include "edgeflow/kgraph.hpp"
#include "edgeflow/seq2seq.hpp"
#include "edgeflow/subgraph.hpp"
#include "edgeflow/trainer.hpp"

namespace edgeflow {

struct VocabConfig {
  int max_size = 20000;
  int64_t min_freq = 1;
};

// Mirrors every module config. Defaults follow the reference hyperparameter
// set (m=20%, k=5, 3 encoder layers, lr 1e-4, batch 30, clip 5, dropout
// 0.2, 2-hop cap 100). Unknown JSON keys are rejected.
struct RunConfig {
  uint64_t seed = 0;
  VocabConfig vocab;
  EnhancementConfig enhancement;
  AlignmentConfig alignment;
  RetrievalConfig retrieval;
  EdgeTransformerConfig edge_transformer;
  Seq2SeqConfig seq2seq;
  TrainConfig train;
  double ablation_n = 0.2;
  // optional "concept<TAB>v1,v2,..." file for node embedding init
  std::string node_embeddings_path;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);

  // Stable digest of everything that shapes the model, used to pair
  // checkpoints with compatible configurations.
  uint64_t model_hash(int vocab_size, int num_nodes, int num_relations) const;
};

}  // namespace edgeflow

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "edgeflow/metrics.hpp"
#include "edgeflow/run_config.hpp"

namespace edgeflow::pipeline {

// Concept pairs against the graph, then IBM Model 1.
AlignmentTable align(const RunConfig& cfg,
                     const std::vector<DialogPair>& pairs,
                     const KnowledgeGraph& graph);

struct EnhanceResult {
  KnowledgeGraph graph;
  int added_nodes = 0;
  int added_edges = 0;
};

// Node extraction (when a lexicon is given), alignment over the
// node-augmented graph, edge extraction, and the merge into G_e.
EnhanceResult enhance_graph(const RunConfig& cfg,
                            const std::vector<DialogPair>& pairs,
                            const KnowledgeGraph& graph,
                            const PosLexicon* lexicon);

std::vector<Subgraph> retrieve_all(const std::vector<DialogPair>& pairs,
                                   const KnowledgeGraph& graph,
                                   const RetrievalConfig& config);

struct TrainOutput {
  std::vector<EpochLog> logs;
  uint64_t steps = 0;
};

// Builds the vocabulary, caches per-post subgraphs, trains to the epoch
// target (resuming from `resume_path` when non-empty), and writes the
// checkpoint and the per-epoch loss CSV.
TrainOutput train_pipeline(const RunConfig& cfg,
                           const std::vector<DialogPair>& pairs,
                           const KnowledgeGraph& graph,
                           const std::string& checkpoint_out,
                           const std::string& log_out,
                           const std::string& resume_path = "",
                           int epoch_target = -1);

struct LoadedModel {
  std::unique_ptr<Vocabulary> vocab;
  std::unique_ptr<DialogModel> model;
};

LoadedModel load_model(const RunConfig& cfg, const KnowledgeGraph& graph,
                       const std::string& checkpoint_path);

EvalReport eval_pipeline(const RunConfig& cfg,
                         const std::vector<DialogPair>& pairs,
                         const KnowledgeGraph& graph,
                         const std::string& checkpoint_path);

}  // namespace edgeflow::pipeline

#include "edgeflow/pipeline.hpp"

#include <stdexcept>

#include "edgeflow/io_util.hpp"

namespace edgeflow::pipeline {

AlignmentTable align(const RunConfig& cfg,
                     const std::vector<DialogPair>& pairs,
                     const KnowledgeGraph& graph) {
  auto concept_pairs = prepare_concept_pairs(pairs, graph);
  if (concept_pairs.empty())
    throw std::runtime_error("align: no concept pairs (corpus and graph share no tokens)");
  return train_ibm1(concept_pairs, cfg.alignment);
}

EnhanceResult enhance_graph(const RunConfig& cfg,
                            const std::vector<DialogPair>& pairs,
                            const KnowledgeGraph& graph,
                            const PosLexicon* lexicon) {
  std::vector<std::string> new_nodes;
  if (lexicon)
    new_nodes = extract_new_nodes(pairs, graph, *lexicon, cfg.enhancement);

  // Alignment runs over the node-augmented graph so corpus-mined concepts
  // can take part in the new edges.
  KnowledgeGraph base = enhance(graph, new_nodes, {});
  std::vector<NamedEdge> new_edges;
  auto concept_pairs = prepare_concept_pairs(pairs, base);
  if (!concept_pairs.empty()) {
    AlignmentTable table = train_ibm1(concept_pairs, cfg.alignment);
    new_edges = extract_new_edges(table, base, cfg.enhancement);
  }
  EnhanceResult result{enhance(base, {}, new_edges),
                       static_cast<int>(new_nodes.size()),
                       static_cast<int>(new_edges.size())};
  return result;
}

std::vector<Subgraph> retrieve_all(const std::vector<DialogPair>& pairs,
                                   const KnowledgeGraph& graph,
                                   const RetrievalConfig& config) {
  std::vector<Subgraph> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(retrieve(p.post, graph, config));
  return out;
}

TrainOutput train_pipeline(const RunConfig& cfg,
                           const std::vector<DialogPair>& pairs,
                           const KnowledgeGraph& graph,
                           const std::string& checkpoint_out,
                           const std::string& log_out,
                           const std::string& resume_path, int epoch_target) {
  if (pairs.empty()) throw std::runtime_error("train: empty corpus");
  Vocabulary vocab = build_vocab(pairs, cfg.vocab.max_size, cfg.vocab.min_freq);
  uint64_t hash =
      cfg.model_hash(vocab.size(), graph.num_nodes(), graph.num_relations());
  auto subgraphs = retrieve_all(pairs, graph, cfg.retrieval);

  DialogModel model(cfg.seq2seq, cfg.edge_transformer, vocab, graph, cfg.seed);
  if (!cfg.node_embeddings_path.empty()) {
    int loaded = model.load_node_embeddings(cfg.node_embeddings_path);
    log_info("node embeddings: " + std::to_string(loaded) + " initialized from " +
             cfg.node_embeddings_path);
  }
  Trainer trainer(model, cfg.train);
  std::vector<EpochLog> logs;
  if (!resume_path.empty()) {
    Checkpoint ckpt = load_checkpoint(resume_path);
    if (ckpt.vocab_text != vocab.serialize())
      throw std::runtime_error("resume: vocabulary does not match checkpoint");
    trainer.restore(ckpt, hash);
  }
  int target = epoch_target > 0 ? epoch_target : cfg.train.epochs;
  int remaining = target - trainer.epoch_count();
  if (remaining < 0)
    throw std::runtime_error("train: checkpoint is already past the epoch target");
  if (remaining > 0) logs = trainer.run(pairs, subgraphs, remaining);

  save_checkpoint(checkpoint_out, trainer.make_checkpoint(hash));
  atomic_write_file(log_out, loss_log_to_csv(logs));
  return {logs, trainer.step_count()};
}

LoadedModel load_model(const RunConfig& cfg, const KnowledgeGraph& graph,
                       const std::string& checkpoint_path) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  LoadedModel lm;
  lm.vocab = std::make_unique<Vocabulary>(
      Vocabulary::deserialize(ckpt.vocab_text));
  uint64_t hash = cfg.model_hash(lm.vocab->size(), graph.num_nodes(),
                                 graph.num_relations());
  if (ckpt.config_hash != hash)
    throw std::runtime_error("checkpoint: config hash mismatch");
  lm.model = std::make_unique<DialogModel>(cfg.seq2seq, cfg.edge_transformer,
                                           *lm.vocab, graph, cfg.seed);
  const auto& params = lm.model->params().all();
  if (params.size() != ckpt.params.size())
    throw std::runtime_error("checkpoint: parameter count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i]->name != ckpt.params[i].first ||
        !params[i]->value.same_shape(ckpt.params[i].second))
      throw std::runtime_error("checkpoint: parameter mismatch at '" +
                               params[i]->name + "'");
    params[i]->value = ckpt.params[i].second;
  }
  return lm;
}

EvalReport eval_pipeline(const RunConfig& cfg,
                         const std::vector<DialogPair>& pairs,
                         const KnowledgeGraph& graph,
                         const std::string& checkpoint_path) {
  if (pairs.empty()) throw std::runtime_error("eval: empty corpus");
  LoadedModel lm = load_model(cfg, graph, checkpoint_path);
  auto subgraphs = retrieve_all(pairs, graph, cfg.retrieval);

  std::vector<Sentence> hyps, refs;
  hyps.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    hyps.push_back(lm.model->greedy_decode(pairs[i].post, subgraphs[i]));
    refs.push_back(pairs[i].response);
  }
  EvalReport report = evaluate_generation(hyps, refs);
  report.ppl = evaluate_ppl(*lm.model, pairs, subgraphs);
  report.concept_ppl = evaluate_concept_ppl(*lm.model, pairs, subgraphs);
  return report;
}

}  // namespace edgeflow::pipeline

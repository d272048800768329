#include "edgeflow/run_config.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

#include "edgeflow/checkpoint.hpp"
#include "edgeflow/io_util.hpp"
#include "json.hpp"

namespace edgeflow {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " +
                               where);
}

template <typename T>
void get_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj[key].get<T>();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config: root must be an object");
  reject_unknown(j,
                 {"seed", "vocab", "enhancement", "alignment", "retrieval",
                  "edge_transformer", "seq2seq", "train", "ablation",
                  "node_embeddings"},
                 "root");
  RunConfig cfg;
  get_if(j, "seed", cfg.seed);
  get_if(j, "node_embeddings", cfg.node_embeddings_path);
  if (j.contains("vocab")) {
    const auto& v = j["vocab"];
    reject_unknown(v, {"max_size", "min_freq"}, "vocab");
    get_if(v, "max_size", cfg.vocab.max_size);
    get_if(v, "min_freq", cfg.vocab.min_freq);
  }
  if (j.contains("enhancement")) {
    const auto& v = j["enhancement"];
    reject_unknown(v, {"m", "k"}, "enhancement");
    get_if(v, "m", cfg.enhancement.node_percentile_m);
    get_if(v, "k", cfg.enhancement.alignment_top_k);
  }
  if (j.contains("alignment")) {
    const auto& v = j["alignment"];
    reject_unknown(v, {"em_iterations", "null_word", "min_prob_floor"},
                   "alignment");
    get_if(v, "em_iterations", cfg.alignment.em_iterations);
    get_if(v, "null_word", cfg.alignment.null_word);
    get_if(v, "min_prob_floor", cfg.alignment.min_prob_floor);
  }
  if (j.contains("retrieval")) {
    const auto& v = j["retrieval"];
    reject_unknown(v, {"two_hop_cap"}, "retrieval");
    get_if(v, "two_hop_cap", cfg.retrieval.two_hop_cap);
  }
  if (j.contains("edge_transformer")) {
    const auto& v = j["edge_transformer"];
    reject_unknown(v,
                   {"layers", "num_heads", "use_post_node", "use_edge_mask",
                    "use_edge_embedding"},
                   "edge_transformer");
    get_if(v, "layers", cfg.edge_transformer.num_layers);
    get_if(v, "num_heads", cfg.edge_transformer.num_heads);
    get_if(v, "use_post_node", cfg.edge_transformer.use_post_node);
    get_if(v, "use_edge_mask", cfg.edge_transformer.use_edge_mask);
    get_if(v, "use_edge_embedding", cfg.edge_transformer.use_edge_embedding);
  }
  if (j.contains("seq2seq")) {
    const auto& v = j["seq2seq"];
    reject_unknown(
        v, {"hidden_dim", "embedding_dim", "dropout", "max_decode_len"},
        "seq2seq");
    get_if(v, "hidden_dim", cfg.seq2seq.hidden_dim);
    get_if(v, "embedding_dim", cfg.seq2seq.embedding_dim);
    get_if(v, "dropout", cfg.seq2seq.dropout);
    get_if(v, "max_decode_len", cfg.seq2seq.max_decode_len);
  }
  if (j.contains("train")) {
    const auto& v = j["train"];
    reject_unknown(v,
                   {"lr", "beta1", "beta2", "eps", "batch_size",
                    "grad_clip_norm", "epochs"},
                   "train");
    get_if(v, "lr", cfg.train.lr);
    get_if(v, "beta1", cfg.train.beta1);
    get_if(v, "beta2", cfg.train.beta2);
    get_if(v, "eps", cfg.train.eps);
    get_if(v, "batch_size", cfg.train.batch_size);
    get_if(v, "grad_clip_norm", cfg.train.grad_clip_norm);
    get_if(v, "epochs", cfg.train.epochs);
  }
  if (j.contains("ablation")) {
    const auto& v = j["ablation"];
    reject_unknown(v, {"n"}, "ablation");
    get_if(v, "n", cfg.ablation_n);
  }
  cfg.edge_transformer.hidden_dim = cfg.seq2seq.hidden_dim;
  cfg.train.seed = cfg.seed;
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  return from_json_text(read_file(path));
}

uint64_t RunConfig::model_hash(int vocab_size, int num_nodes,
                               int num_relations) const {
  std::ostringstream s;
  s.precision(17);
  s << "v1|" << seed << "|" << vocab_size << "|" << num_nodes << "|"
    << num_relations << "|" << seq2seq.hidden_dim << "|"
    << seq2seq.embedding_dim << "|" << seq2seq.dropout << "|"
    << seq2seq.max_decode_len << "|" << edge_transformer.num_layers << "|"
    << edge_transformer.num_heads << "|" << edge_transformer.use_post_node
    << "|" << edge_transformer.use_edge_mask << "|"
    << edge_transformer.use_edge_embedding << "|" << vocab.max_size << "|"
    << vocab.min_freq;
  return fnv1a64(s.str());
}

}  // namespace edgeflow

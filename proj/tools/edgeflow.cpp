#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "edgeflow/io_util.hpp"
#include "edgeflow/pipeline.hpp"

using namespace edgeflow;

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> k, layers, cap;
  std::optional<double> m, n;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run config JSON");
  cmd->add_option("--seed", opts.seed, "override the run seed");
  cmd->add_option("--k", opts.k, "alignment top-k for new edges");
  cmd->add_option("--m", opts.m, "new-node frequency percentile");
  cmd->add_option("--n", opts.n, "ablation bottom fraction");
  cmd->add_option("--layers", opts.layers, "graph encoder layers");
  cmd->add_option("--cap", opts.cap, "2-hop node cap");
}

RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig cfg = opts.config_path.empty()
                      ? RunConfig{}
                      : RunConfig::from_file(opts.config_path);
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.train.seed = *opts.seed;
  }
  if (opts.k) cfg.enhancement.alignment_top_k = *opts.k;
  if (opts.m) cfg.enhancement.node_percentile_m = *opts.m;
  if (opts.n) cfg.ablation_n = *opts.n;
  if (opts.layers) cfg.edge_transformer.num_layers = *opts.layers;
  if (opts.cap) cfg.retrieval.two_hop_cap = *opts.cap;
  return cfg;
}

std::vector<DialogPair> load_pairs(const std::string& path) {
  return load_corpus(path).pairs;
}

int run_chat(const RunConfig& cfg, const KnowledgeGraph& graph,
             const std::string& ckpt_path) {
  auto lm = pipeline::load_model(cfg, graph, ckpt_path);
  std::string line;
  while (std::getline(std::cin, line)) {
    auto tokens = tokenize_line(line);
    if (tokens.empty()) continue;
    Subgraph sg = retrieve(tokens, graph, cfg.retrieval);
    auto response = lm.model->greedy_decode(tokens, sg);
    std::cout << "response:";
    for (const auto& t : response) std::cout << " " << t;
    std::cout << "\nconcepts:";
    for (int id : sg.v0) std::cout << " " << graph.node_name(id);
    std::cout << "\n" << std::flush;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concept-graph grounded dialogue toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string corpus_path, graph_path, enhanced_path, lexicon_path;
  std::string alignment_path, out_path, ckpt_path, log_path, resume_path;
  std::string post_text;
  int epochs_override = -1;

  auto* cmd_align = app.add_subcommand("align", "train concept alignment");
  add_common(cmd_align, opts);
  cmd_align->add_option("--corpus", corpus_path)->required();
  cmd_align->add_option("--graph", graph_path)->required();
  cmd_align->add_option("--out", out_path)->required();

  auto* cmd_build = app.add_subcommand("build-graph", "load and canonicalize a triples file");
  add_common(cmd_build, opts);
  cmd_build->add_option("--graph", graph_path)->required();
  cmd_build->add_option("--out", out_path);

  auto* cmd_enhance = app.add_subcommand("enhance", "build the enhanced graph");
  add_common(cmd_enhance, opts);
  cmd_enhance->add_option("--corpus", corpus_path)->required();
  cmd_enhance->add_option("--graph", graph_path)->required();
  cmd_enhance->add_option("--lexicon", lexicon_path, "POS lexicon TSV for new nodes");
  cmd_enhance->add_option("--out", out_path)->required();

  auto* cmd_ablate = app.add_subcommand("ablate", "drop weakly aligned edges");
  add_common(cmd_ablate, opts);
  cmd_ablate->add_option("--graph", graph_path)->required();
  cmd_ablate->add_option("--alignment", alignment_path)->required();
  cmd_ablate->add_option("--out", out_path)->required();

  auto* cmd_retrieve = app.add_subcommand("retrieve", "subgraph for one post");
  add_common(cmd_retrieve, opts);
  cmd_retrieve->add_option("--graph", graph_path)->required();
  cmd_retrieve->add_option("--post", post_text)->required();
  cmd_retrieve->add_option("--out", out_path);

  auto* cmd_stats = app.add_subcommand("stats", "coverage statistics");
  add_common(cmd_stats, opts);
  cmd_stats->add_option("--graph", graph_path)->required();
  cmd_stats->add_option("--enhanced", enhanced_path, "second graph to compare");
  cmd_stats->add_option("--corpus", corpus_path)->required();

  auto* cmd_train = app.add_subcommand("train", "train the generation model");
  add_common(cmd_train, opts);
  cmd_train->add_option("--corpus", corpus_path)->required();
  cmd_train->add_option("--graph", graph_path)->required();
  cmd_train->add_option("--out-checkpoint", ckpt_path)->required();
  cmd_train->add_option("--out-log", log_path)->required();
  cmd_train->add_option("--epochs", epochs_override, "epoch target");
  cmd_train->add_option("--resume", resume_path, "checkpoint to resume from");

  auto* cmd_eval = app.add_subcommand("eval", "reference-based evaluation");
  add_common(cmd_eval, opts);
  cmd_eval->add_option("--corpus", corpus_path)->required();
  cmd_eval->add_option("--graph", graph_path)->required();
  cmd_eval->add_option("--checkpoint", ckpt_path)->required();
  cmd_eval->add_option("--out", out_path);

  auto* cmd_chat = app.add_subcommand("chat", "interactive decode REPL");
  add_common(cmd_chat, opts);
  cmd_chat->add_option("--graph", graph_path)->required();
  cmd_chat->add_option("--checkpoint", ckpt_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = resolve_config(opts);

    if (*cmd_align) {
      auto pairs = load_pairs(corpus_path);
      auto graph = KnowledgeGraph::load_triples(graph_path);
      auto table = pipeline::align(cfg, pairs, graph);
      atomic_write_file(out_path, table.serialize());
      log_info("alignment written to " + out_path);
    } else if (*cmd_build) {
      auto graph = KnowledgeGraph::load_triples(graph_path);
      if (!out_path.empty()) atomic_write_file(out_path, graph.serialize());
      std::cout << "nodes " << graph.num_nodes() << " edges "
                << graph.num_edges() << " relations " << graph.num_relations()
                << "\n";
    } else if (*cmd_enhance) {
      auto pairs = load_pairs(corpus_path);
      auto graph = KnowledgeGraph::load_triples(graph_path);
      std::optional<PosLexicon> lexicon;
      if (!lexicon_path.empty()) lexicon = PosLexicon::load(lexicon_path);
      auto result = pipeline::enhance_graph(cfg, pairs, graph,
                                            lexicon ? &*lexicon : nullptr);
      atomic_write_file(out_path, result.graph.serialize());
      std::cout << "added " << result.added_nodes << " nodes, "
                << result.added_edges << " edges; now "
                << result.graph.num_nodes() << " nodes / "
                << result.graph.num_edges() << " edges\n";
    } else if (*cmd_ablate) {
      auto graph = KnowledgeGraph::load_triples(graph_path);
      auto table = AlignmentTable::deserialize(read_file(alignment_path));
      auto ablated = ablate_edges(graph, table, cfg.ablation_n);
      atomic_write_file(out_path, ablated.serialize());
      std::cout << "edges " << graph.num_edges() << " -> "
                << ablated.num_edges() << "\n";
    } else if (*cmd_retrieve) {
      auto graph = KnowledgeGraph::load_triples(graph_path);
      Subgraph sg = retrieve(tokenize_line(post_text), graph, cfg.retrieval);
      std::string json = subgraph_to_json(sg, graph);
      if (out_path.empty())
        std::cout << json << "\n";
      else
        atomic_write_file(out_path, json + "\n");
    } else if (*cmd_stats) {
      auto pairs = load_pairs(corpus_path);
      auto graph = KnowledgeGraph::load_triples(graph_path);
      std::cout << "{\n\"G\": "
                << coverage_to_json(coverage_stats(graph, pairs, cfg.retrieval));
      if (!enhanced_path.empty()) {
        auto enhanced = KnowledgeGraph::load_triples(enhanced_path);
        std::cout << ",\n\"G_e\": "
                  << coverage_to_json(
                         coverage_stats(enhanced, pairs, cfg.retrieval));
      }
      std::cout << "\n}\n";
    } else if (*cmd_train) {
      auto pairs = load_pairs(corpus_path);
      auto graph = KnowledgeGraph::load_triples(graph_path);
      auto out = pipeline::train_pipeline(cfg, pairs, graph, ckpt_path,
                                          log_path, resume_path,
                                          epochs_override);
      std::cout << "trained " << out.steps << " steps; checkpoint "
                << ckpt_path << "\n";
    } else if (*cmd_eval) {
      auto pairs = load_pairs(corpus_path);
      auto graph = KnowledgeGraph::load_triples(graph_path);
      auto report = pipeline::eval_pipeline(cfg, pairs, graph, ckpt_path);
      std::string json = report_to_json(report);
      if (!out_path.empty()) atomic_write_file(out_path, json + "\n");
      std::cout << report_to_table(report);
    } else if (*cmd_chat) {
      auto graph = KnowledgeGraph::load_triples(graph_path);
      return run_chat(cfg, graph, ckpt_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// Acceptance suite: one pass/fail line per criterion. Expects the CLI
// binary path as argv[1] (used by the end-to-end determinism criterion).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "edgeflow/io_util.hpp"
#include "edgeflow/metrics.hpp"
#include "edgeflow/pipeline.hpp"
#include "edgeflow/trainer.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace edgeflow;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli;
int g_failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int id, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

// ---- criterion 1: gradient fidelity ---------------------------------------

void criterion_gradients() {
  auto start = Clock::now();

  // (a) one Edge-Transformer layer on a 6-node graph
  Rng rng(101);
  KnowledgeGraph g;
  for (int i = 0; i < 6; ++i) g.add_node("c" + std::to_string(i));
  int r0 = g.add_relation("r0"), r1 = g.add_relation("r1");
  g.add_edge(0, r0, 1);
  g.add_edge(1, r1, 2);
  g.add_edge(2, r0, 3);
  g.add_edge(3, r1, 4);
  g.add_edge(4, r0, 5);
  g.add_edge(5, r1, 0);
  g.add_edge(0, r0, 3);
  g.add_edge(2, r1, 5);
  g.reindex();
  Subgraph sg;
  sg.v0 = {0, 1, 2, 3, 4, 5};
  sg.node_order = sg.v0;
  for (const Edge& e : g.edges()) sg.edges.push_back(e);
  std::sort(sg.edges.begin(), sg.edges.end());

  EdgeTransformerConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_dim = 8;
  ParamRegistry reg;
  auto ef = EdgeTransformer::create(reg, "ef", cfg, g.num_relations(), rng);
  for (auto& p : reg.all())
    if (p->name.find("rel_bias") != std::string::npos)
      for (int64_t i = 0; i < p->numel(); ++i)
        p->value[i] = rng.uniform(-0.3, 0.3);
  auto ag = augment(sg, g);
  Tensor h0 = normal_init(rng, {ag.total_nodes(), 8}, 1.0);
  // the probe loss is scaled so finite-difference noise stays below the
  // 1e-8 floor for parameters with structurally zero gradients (a uniform
  // key shift cancels inside each softmax row)
  auto layer_loss = [&](bool with_grad) {
    Tape t;
    auto enc = ef.encode(t, ag, t.constant(h0));
    Var loss = t.scale(t.mean(t.mul(enc.final, enc.final)), 1e-4);
    if (with_grad) t.backward(loss);
    return t.val(loss)[0];
  };
  auto res_a = finite_diff_check(layer_loss, reg.pointers(), 1e-5);

  // (b) encoder -> edgeformer -> decoder -> three-part loss, 2 pairs
  auto graph = testfix::toy_graph();
  auto pairs = testfix::toy_corpus(2);
  auto vocab = build_vocab(pairs, 100);
  Seq2SeqConfig s2s;
  s2s.hidden_dim = 8;
  s2s.embedding_dim = 6;
  EdgeTransformerConfig ef_cfg;
  ef_cfg.num_layers = 2;
  DialogModel model(s2s, ef_cfg, vocab, graph, 17);
  std::vector<Subgraph> sgs;
  for (const auto& p : pairs)
    sgs.push_back(retrieve(p.post, graph, RetrievalConfig{}));
  auto pipeline_loss = [&](bool with_grad) {
    double total = 0.0;
    for (size_t i = 0; i < pairs.size(); ++i) {
      Tape t;
      auto fwd = model.forward_example(t, pairs[i], sgs[i]);
      Var scaled = t.scale(fwd.loss.total, 1e-4 / 2.0);
      if (with_grad) t.backward(scaled);
      total += t.val(scaled)[0];
    }
    return total;
  };
  auto res_b =
      finite_diff_check(pipeline_loss, model.params().pointers(), 1e-5);

  double elapsed = seconds_since(start);
  bool ok = res_a.max_rel_err < 1e-4 && res_b.max_rel_err < 1e-4 &&
            elapsed < 60.0;
  report(1, "gradient fidelity vs central finite differences", ok,
         fmt("layer max rel err %.3g, pipeline max rel err %.3g, %.1f s",
             res_a.max_rel_err, res_b.max_rel_err, elapsed));
}

// ---- criterion 2: mask soundness -------------------------------------------

void criterion_mask_soundness() {
  auto start = Clock::now();
  Rng rng(202);
  int checked_pairs = 0;
  bool ok = true;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    KnowledgeGraph g;
    int n = 2 + static_cast<int>(rng.uniform_int(19));  // up to 20 nodes
    for (int i = 0; i < n; ++i) g.add_node("c" + std::to_string(i));
    int r0 = g.add_relation("r0"), r1 = g.add_relation("r1");
    int edges = static_cast<int>(rng.uniform_int(2 * n + 1));
    for (int e = 0; e < edges; ++e)
      g.add_edge(static_cast<int>(rng.uniform_int(n)),
                 rng.uniform() < 0.5 ? r0 : r1,
                 static_cast<int>(rng.uniform_int(n)));
    g.reindex();
    Subgraph sg;
    for (int i = 0; i < n; ++i) sg.v0.push_back(i);
    sg.node_order = sg.v0;
    for (const Edge& e : g.edges()) sg.edges.push_back(e);
    std::sort(sg.edges.begin(), sg.edges.end());

    EdgeTransformerConfig cfg;
    cfg.num_layers = 1 + static_cast<int>(rng.uniform_int(3));
    cfg.hidden_dim = 4;
    cfg.use_post_node = trial % 2 == 0;
    ParamRegistry reg;
    Rng init(300 + trial);
    auto ef = EdgeTransformer::create(reg, "ef", cfg, g.num_relations(), init);
    for (auto& p : reg.all())
      if (p->name.find("rel_bias") != std::string::npos)
        for (int64_t i = 0; i < p->numel(); ++i)
          p->value[i] = init.uniform(-0.5, 0.5);

    auto ag = augment(sg, g, cfg.use_post_node);
    int total = ag.total_nodes();
    Tensor base = normal_init(init, {total, 4}, 1.0);
    auto run = [&](const Tensor& states) {
      Tape t;
      return t.val(ef.encode(t, ag, t.constant(states)).final);
    };
    Tensor base_out = run(base);
    auto adj = testfix::influence_adj(ag);
    for (int q = 0; q < total && ok; ++q) {
      Tensor pert = base;
      pert.at(q, static_cast<int64_t>(rng.uniform_int(4))) +=
          rng.uniform(0.5, 2.0);
      Tensor pert_out = run(pert);
      auto dist = testfix::hop_distances(adj, q);
      for (int p = 0; p < total; ++p) {
        if (p == q) continue;
        bool reachable = dist[p] >= 0 && dist[p] <= cfg.num_layers;
        if (reachable) continue;
        ++checked_pairs;
        for (int j = 0; j < 4; ++j)
          if (base_out.at(p, j) != pert_out.at(p, j)) ok = false;
      }
    }
  }
  double elapsed = seconds_since(start);
  ok = ok && elapsed < 30.0 && checked_pairs > 0;
  report(2, "mask soundness: unreachable nodes never move the output", ok,
         fmt("%d unreachable pairs checked exactly, %.1f s", checked_pairs,
             elapsed));
}

// ---- criterion 3: vanilla equivalence --------------------------------------

void criterion_vanilla() {
  Rng rng(303);
  KnowledgeGraph g;
  const int n = 6;
  for (int i = 0; i < n; ++i) g.add_node("c" + std::to_string(i));
  int r = g.add_relation("rel");
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) g.add_edge(a, r, b);
  g.reindex();
  Subgraph sg;
  for (int i = 0; i < n; ++i) sg.v0.push_back(i);
  sg.node_order = sg.v0;
  for (const Edge& e : g.edges()) sg.edges.push_back(e);
  std::sort(sg.edges.begin(), sg.edges.end());

  EdgeTransformerConfig cfg;
  cfg.num_layers = 3;
  cfg.hidden_dim = 8;
  cfg.use_post_node = false;
  ParamRegistry reg;
  auto ef = EdgeTransformer::create(reg, "ef", cfg, g.num_relations(), rng);
  // relation bias stays at its zero init: R == 0

  auto ag = augment(sg, g, false);
  Tensor h0 = normal_init(rng, {n, 8}, 1.0);
  Tape t;
  auto enc = ef.encode(t, ag, t.constant(h0));

  std::vector<std::vector<double>> ref(n, std::vector<double>(8));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 8; ++j) ref[i][j] = h0.at(i, j);
  for (int l = 0; l < 3; ++l)
    ref = testfix::vanilla_reference_layer(reg, "ef.l" + std::to_string(l),
                                           ref);
  double max_diff = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 8; ++j)
      max_diff = std::max(max_diff,
                          std::abs(t.val(enc.final).at(i, j) - ref[i][j]));
  report(3, "complete digraph with R=0 equals the vanilla reference",
         max_diff < 1e-10, fmt("max element diff %.3g", max_diff));
}

// ---- criterion 4: retrieval oracle -----------------------------------------

void criterion_retrieval() {
  Rng rng(404);
  int trials_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto g = testfix::random_graph(rng, 50, 3, 0.08);
    RetrievalConfig cfg;
    cfg.two_hop_cap = static_cast<int>(rng.uniform_int(10));
    if (rng.uniform() < 0.3) {
      std::unordered_set<int> base;
      for (int i = 0; i < g.num_nodes(); ++i)
        if (rng.uniform() < 0.5) base.insert(i);
      cfg.two_hop_base = base;
    }
    std::vector<std::string> post;
    int len = 1 + static_cast<int>(rng.uniform_int(6));
    for (int i = 0; i < len; ++i)
      post.push_back("c" + std::to_string(rng.uniform_int(
                              static_cast<int64_t>(g.num_nodes() + 3))));
    auto fast = retrieve(post, g, cfg);
    auto slow = testfix::brute_force_retrieve(post, g, cfg);
    if (testfix::same_subgraph(fast, slow)) ++trials_ok;
  }
  report(4, "retrieval equals the brute-force oracle on random graphs",
         trials_ok == 100, fmt("%d/100 graphs identical", trials_ok));
}

// ---- criterion 5: alignment recovery ---------------------------------------

void criterion_alignment() {
  Rng rng(505);
  std::vector<ConceptPair> pairs;
  for (int i = 0; i < 200; ++i) {
    ConceptPair p;
    int a = static_cast<int>(rng.uniform_int(20));
    int b = static_cast<int>(rng.uniform_int(20));
    int c = static_cast<int>(rng.uniform_int(20));
    p.source = {"c" + std::to_string(a), "c" + std::to_string(b),
                "c" + std::to_string(c)};
    p.target = {"d" + std::to_string(a), "d" + std::to_string(b),
                "d" + std::to_string(c)};
    pairs.push_back(p);
  }
  AlignmentConfig cfg;
  cfg.em_iterations = 10;
  auto table = train_ibm1(pairs, cfg);

  int correct = 0;
  double min_prob = 1.0;
  for (int i = 0; i < 20; ++i) {
    auto top = table.top_k_targets("c" + std::to_string(i), 1);
    if (!top.empty() && top[0].first == "d" + std::to_string(i)) ++correct;
    if (!top.empty()) min_prob = std::min(min_prob, top[0].second);
  }
  bool ll_ok = true;
  const auto& ll = table.log_likelihoods();
  for (size_t i = 1; i < ll.size(); ++i)
    if (ll[i] < ll[i - 1] - 1e-9) ll_ok = false;
  bool ok = correct == 20 && min_prob >= 0.9 && ll_ok;
  report(5, "EM recovers the deterministic concept mapping", ok,
         fmt("argmax correct %d/20, min top prob %.3f, loglik %s", correct,
             min_prob, ll_ok ? "non-decreasing" : "DECREASED"));
}

// ---- criterion 6: enhancement / ablation monotonicity ----------------------

void criterion_enhancement() {
  // base graph: a ring with chords plus five isolated response-only
  // concepts that only the mined DialogFlowTo edges can reach
  KnowledgeGraph g = testfix::toy_graph();
  for (int i = 0; i < 5; ++i) g.add_node("d" + std::to_string(i));
  g.reindex();

  std::vector<DialogPair> pairs;
  for (int i = 0; i < 20; ++i) {
    DialogPair p;
    p.post = {"w" + std::to_string(i % 4), "c" + std::to_string(i % 10)};
    p.response = {"d" + std::to_string(i % 5),
                  "c" + std::to_string((i % 10 + 1) % 10)};
    pairs.push_back(p);
  }

  RunConfig cfg;
  cfg.enhancement.alignment_top_k = 3;
  auto enhanced = pipeline::enhance_graph(cfg, pairs, g, nullptr);
  const KnowledgeGraph& ge = enhanced.graph;

  // node/edge containment
  bool contained = g.num_nodes() <= ge.num_nodes();
  for (int i = 0; i < g.num_nodes() && contained; ++i)
    if (!ge.has_node(g.node_name(i))) contained = false;
  for (const Edge& e : g.edges()) {
    if (!ge.has_edge(ge.node_id(g.node_name(e.head)), e.relation,
                     ge.node_id(g.node_name(e.tail)))) {
      contained = false;
      break;
    }
  }

  RetrievalConfig rc;
  auto cov_g = coverage_stats(g, pairs, rc);
  auto cov_ge = coverage_stats(ge, pairs, rc);
  bool enhance_monotone = true;
  for (int h = 0; h < 3; ++h)
    if (cov_ge.hop[h].golden < cov_g.hop[h].golden - 1e-12)
      enhance_monotone = false;
  bool gained = false;
  for (int h = 0; h < 3; ++h)
    if (cov_ge.hop[h].golden > cov_g.hop[h].golden + 1e-12) gained = true;

  // ablation: same alignment the enhancement used, applied to G_e
  auto concept_pairs = prepare_concept_pairs(pairs, ge);
  auto table = train_ibm1(concept_pairs, cfg.alignment);
  auto g20 = ablate_edges(ge, table, 0.2);
  auto g50 = ablate_edges(ge, table, 0.5);
  auto cov_20 = coverage_stats(g20, pairs, rc);
  auto cov_50 = coverage_stats(g50, pairs, rc);
  bool ablate_monotone = true;
  for (int h = 0; h < 3; ++h) {
    if (cov_20.hop[h].golden > cov_ge.hop[h].golden + 1e-12)
      ablate_monotone = false;
    if (cov_50.hop[h].golden > cov_20.hop[h].golden + 1e-12)
      ablate_monotone = false;
  }

  bool ok = contained && enhance_monotone && gained && ablate_monotone;
  report(6, "enhancement grows coverage, ablation shrinks it", ok,
         fmt("containment %s; golden 1-hop %.3f -> %.3f (G->G_e), "
             "-> %.3f (n=.2) -> %.3f (n=.5)",
             contained ? "holds" : "BROKEN", cov_g.hop[1].golden,
             cov_ge.hop[1].golden, cov_20.hop[1].golden,
             cov_50.hop[1].golden));
}

// ---- criterion 7: overfit convergence --------------------------------------

void criterion_overfit() {
  auto start = Clock::now();
  // 50 synthetic pairs of the identity copy task: the response repeats the
  // post's concept, so every response token is either a subgraph copy or
  // the end marker. lr 1e-4, clip 5, hidden 64 and the 300-step budget are
  // the stated configuration; corpus shape, full-batch updates and the
  // embedding init scale are free fixture choices.
  KnowledgeGraph graph;
  for (int i = 0; i < 5; ++i) graph.add_node("c" + std::to_string(i));
  int rel = graph.add_relation("rel0");
  for (int i = 0; i < 5; ++i) graph.add_edge(i, rel, (i + 1) % 5);
  graph.reindex();
  std::vector<DialogPair> pairs;
  for (int i = 0; i < 50; ++i) {
    std::string c = "c" + std::to_string(i % 5);
    pairs.push_back({{c}, {c}});
  }
  auto vocab = build_vocab(pairs, 500);
  Seq2SeqConfig s2s;
  s2s.hidden_dim = 64;
  s2s.embedding_dim = 64;
  s2s.dropout = 0.0;
  EdgeTransformerConfig ef;
  ef.num_layers = 3;
  std::vector<Subgraph> sgs;
  for (const auto& p : pairs)
    sgs.push_back(retrieve(p.post, graph, RetrievalConfig{}));

  DialogModel model(s2s, ef, vocab, graph, 707);
  for (const char* name : {"word_emb", "node_emb"}) {
    Parameter* p = model.params().find(name);
    for (int64_t i = 0; i < p->numel(); ++i) p->value[i] *= 3.0;
  }
  TrainConfig cfg;  // lr 1e-4, clip 5 as stated
  cfg.seed = 707;
  cfg.batch_size = 50;
  Trainer trainer(model, cfg);
  trainer.run(pairs, sgs, 300);  // full batch: one Adam step per epoch

  double ppl = evaluate_ppl(model, pairs, sgs);
  int exact = 0;
  for (size_t i = 0; i < pairs.size(); ++i)
    if (model.greedy_decode(pairs[i].post, sgs[i]) == pairs[i].response)
      ++exact;
  double gate = mean_copy_gate(model, pairs, sgs);
  double elapsed = seconds_since(start);
  bool ok = ppl < 1.5 && exact >= 45 && gate > 0.8 && elapsed < 300.0;
  report(7, "overfit in 300 Adam steps at lr 1e-4", ok,
         fmt("ppl %.3f (<1.5), exact %d/50 (>=45), copy gate %.3f (>0.8), "
             "%.0f s",
             ppl, exact, gate, elapsed));
}

// ---- criterion 8: mixture normalization ------------------------------------

void criterion_mixture() {
  Rng rng(808);
  const int vocab_slots = 40, copy_slots = 12;
  bool ok = true;
  double worst = 0.0;
  for (int i = 0; i < 10000 && ok; ++i) {
    Tape t;
    Tensor lv({vocab_slots}), lc({copy_slots});
    for (int64_t j = 0; j < vocab_slots; ++j) lv[j] = rng.uniform(-8, 8);
    for (int64_t j = 0; j < copy_slots; ++j) lc[j] = rng.uniform(-8, 8);
    Var pv = t.softmax(t.constant(lv));
    Var pc = t.softmax(t.constant(lc));
    double sigma = rng.uniform();
    double total = 0.0;
    for (int64_t j = 0; j < vocab_slots; ++j) {
      double p = (1.0 - sigma) * t.val(pv)[j];
      if (p < 0.0) ok = false;
      total += p;
    }
    for (int64_t j = 0; j < copy_slots; ++j) {
      double p = sigma * t.val(pc)[j];
      if (p < 0.0) ok = false;
      total += p;
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  ok = ok && worst <= 1e-9;
  report(8, "mixture stays a distribution for every gate value", ok,
         fmt("10000 random steps, worst |sum - 1| = %.3g", worst));
}

// ---- criterion 9: metric correctness ---------------------------------------

void criterion_metrics() {
  auto s = [](const char* text) {
    Sentence out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  };
  std::vector<Sentence> hyps = {
      s("the cat sat on the mat"), s("a dog ran fast"), s("birds sing songs"),
      s("the sun is bright today"), s("i like green tea")};
  std::vector<Sentence> refs = {
      s("the cat sat on the mat"), s("the dog ran quickly"),
      s("birds sing sweet songs"), s("the sun was bright yesterday"),
      s("i like black tea")};

  struct Expect {
    const char* name;
    double got, want;
  };
  std::vector<Expect> checks = {
      {"bleu1", bleu_n(hyps, refs, 1), 0.73838961893458332},
      {"bleu2", bleu_n(hyps, refs, 2), 0.62608919590764733},
      {"bleu3", bleu_n(hyps, refs, 3), 0.5242271033578999},
      {"bleu4", bleu_n(hyps, refs, 4), 0.51220868689053123},
      {"nist1", nist_n(hyps, refs, 1), 3.1960152401704081},
      {"nist2", nist_n(hyps, refs, 2), 3.5460282823380522},
      {"nist3", nist_n(hyps, refs, 3), 3.5460282823380522},
      {"nist4", nist_n(hyps, refs, 4), 3.5460282823380522},
      {"rouge1", rouge_n(hyps, refs, 1), 0.73913043478260865},
      {"rouge2", rouge_n(hyps, refs, 2), 0.5},
      {"rougeL", rouge_l(hyps, refs), 0.74142857142857144},
      {"dist1", dist_n(hyps, 1), 0.90909090909090906},
      {"dist2", dist_n(hyps, 2), 1.0},
      {"ent4", entropy_n(hyps, 4), 1.945910149055313},
  };
  double worst = 0.0;
  const char* worst_name = "";
  for (const auto& c : checks) {
    double diff = std::abs(c.got - c.want);
    if (diff > worst) {
      worst = diff;
      worst_name = c.name;
    }
  }
  // identity inputs give the formula-exact identity scores
  bool identity_ok =
      std::abs(bleu_n(hyps, hyps, 4) - 1.0) < 1e-12 &&
      std::abs(rouge_n(hyps, hyps, 2) - 1.0) < 1e-12 &&
      std::abs(rouge_l(hyps, hyps) - 1.0) < 1e-12 && dist_n(hyps, 1) <= 1.0;
  bool ok = worst < 1e-6 && identity_ok;
  report(9, "metrics match hand-computed fixture values", ok,
         fmt("worst |diff| %.3g at %s; identity %s", worst, worst_name,
             identity_ok ? "exact" : "BROKEN"));
}

// ---- criterion 10: determinism ---------------------------------------------

int run_cli(const std::string& args) {
  std::string cmd = g_cli + " " + args + " >> acc_work/cli.log 2>&1";
  return std::system(cmd.c_str());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

void criterion_determinism() {
  if (g_cli.empty()) {
    report(10, "end-to-end determinism", false, "no CLI path supplied");
    return;
  }
  std::system("rm -rf acc_work && mkdir acc_work");
  {
    auto graph = testfix::toy_graph();
    write_file("acc_work/graph.tsv", graph.serialize());
    write_file("acc_work/corpus.jsonl",
               serialize_corpus(testfix::toy_corpus(50)));
    write_file("acc_work/config.json", R"({
  "seed": 11,
  "vocab": {"max_size": 500},
  "seq2seq": {"hidden_dim": 24, "embedding_dim": 16, "max_decode_len": 10},
  "edge_transformer": {"layers": 2},
  "train": {"lr": 0.003, "batch_size": 30, "epochs": 25}
})");
  }

  auto pipeline_run = [&](const std::string& dir) -> bool {
    std::string mk = "mkdir -p " + dir;
    std::system(mk.c_str());
    if (run_cli("align --config acc_work/config.json"
                " --corpus acc_work/corpus.jsonl --graph acc_work/graph.tsv"
                " --out " + dir + "/align.tsv"))
      return false;
    if (run_cli("enhance --config acc_work/config.json"
                " --corpus acc_work/corpus.jsonl --graph acc_work/graph.tsv"
                " --out " + dir + "/ge.tsv"))
      return false;
    if (run_cli("retrieve --config acc_work/config.json --graph " + dir +
                "/ge.tsv --post \"w1 c3 w4\" --out " + dir + "/subgraph.json"))
      return false;
    if (run_cli("train --config acc_work/config.json"
                " --corpus acc_work/corpus.jsonl --graph " + dir + "/ge.tsv" +
                " --out-checkpoint " + dir + "/model.ckpt --out-log " + dir +
                "/loss.csv"))
      return false;
    if (run_cli("eval --config acc_work/config.json"
                " --corpus acc_work/corpus.jsonl --graph " + dir + "/ge.tsv" +
                " --checkpoint " + dir + "/model.ckpt --out " + dir +
                "/report.json"))
      return false;
    return true;
  };

  bool ran = pipeline_run("acc_work/run1") && pipeline_run("acc_work/run2");
  bool identical = true;
  std::string first_diff;
  if (ran) {
    for (const char* artifact : {"align.tsv", "ge.tsv", "subgraph.json",
                                 "model.ckpt", "loss.csv", "report.json"}) {
      std::string a = read_file(std::string("acc_work/run1/") + artifact);
      std::string b = read_file(std::string("acc_work/run2/") + artifact);
      if (a != b) {
        identical = false;
        if (first_diff.empty()) first_diff = artifact;
      }
    }
  }

  // resume: 12 epochs + restore-to-25 must match the straight 25-epoch run
  bool resume_ok = false;
  if (ran) {
    resume_ok =
        !run_cli("train --config acc_work/config.json"
                 " --corpus acc_work/corpus.jsonl --graph acc_work/run1/ge.tsv"
                 " --out-checkpoint acc_work/mid.ckpt --out-log"
                 " acc_work/mid.csv --epochs 12") &&
        !run_cli("train --config acc_work/config.json"
                 " --corpus acc_work/corpus.jsonl --graph acc_work/run1/ge.tsv"
                 " --out-checkpoint acc_work/resumed.ckpt --out-log"
                 " acc_work/resumed.csv --epochs 25 --resume"
                 " acc_work/mid.ckpt");
    if (resume_ok) {
      // the resumed log holds epochs 13..25; the straight log 1..25
      std::istringstream straight(read_file("acc_work/run1/loss.csv"));
      std::istringstream resumed(read_file("acc_work/resumed.csv"));
      std::vector<std::string> s_lines, r_lines;
      std::string line;
      while (std::getline(straight, line)) s_lines.push_back(line);
      while (std::getline(resumed, line)) r_lines.push_back(line);
      resume_ok = r_lines.size() == 14 && s_lines.size() == 26;
      for (size_t i = 1; resume_ok && i < r_lines.size(); ++i)
        if (r_lines[i] != s_lines[12 + i]) resume_ok = false;
      if (resume_ok)
        resume_ok = read_file("acc_work/resumed.ckpt") ==
                    read_file("acc_work/run1/model.ckpt");
    }
  }

  bool ok = ran && identical && resume_ok;
  report(10, "pipeline runs are byte-identical and resume is exact", ok,
         fmt("runs %s, artifacts %s%s, resume %s", ran ? "ok" : "FAILED",
             identical ? "identical" : "differ at ",
             identical ? "" : first_diff.c_str(),
             resume_ok ? "bit-exact" : "MISMATCH"));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli = argv[1];
  criterion_gradients();
  criterion_mask_soundness();
  criterion_vanilla();
  criterion_retrieval();
  criterion_alignment();
  criterion_enhancement();
  criterion_overfit();
  criterion_mixture();
  criterion_metrics();
  criterion_determinism();
  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}

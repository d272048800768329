#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "edgeflow/io_util.hpp"

using namespace edgeflow;

namespace {

std::string bin() {
  const char* env = std::getenv("EDGEFLOW_BIN");
  REQUIRE_MESSAGE(env != nullptr, "EDGEFLOW_BIN must point at the CLI");
  return env;
}

struct RunResult {
  int exit_code;
  std::string output;  // stdout only
};

RunResult run(const std::string& args, const std::string& stdin_text = "") {
  std::string dir = "cli_work";
  std::string in_file = dir + "/stdin.txt";
  std::string out_file = dir + "/stdout.txt";
  {
    std::ofstream in(in_file);
    in << stdin_text;
  }
  std::string cmd = bin() + " " + args + " < " + in_file + " > " + out_file +
                    " 2> " + dir + "/stderr.txt";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  r.output = read_file(out_file);
  return r;
}

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

struct Workspace {
  Workspace() {
    std::system("rm -rf cli_work && mkdir cli_work");
    write("cli_work/graph.tsv",
          "dog\trel\tcat\n"
          "cat\trel\ttree\n"
          "park\trel\tball\n");
    write("cli_work/corpus.jsonl",
          R"({"post":["the","dog","saw","a","cat"],"response":["the","cat","climbed","a","tree"]})"
          "\n"
          R"({"post":["we","walked","in","the","park"],"response":["the","dog","found","a","ball"]})"
          "\n"
          R"({"post":["dog","and","cat","play"],"response":["park","fun","with","ball"]})"
          "\n");
    write("cli_work/lexicon.tsv", "fun\tNOUN\nball\tNOUN\nwalked\tOTHER\n");
    write("cli_work/config.json", R"({
  "seed": 42,
  "vocab": {"max_size": 100},
  "seq2seq": {"hidden_dim": 12, "embedding_dim": 10, "max_decode_len": 8},
  "edge_transformer": {"layers": 2},
  "train": {"lr": 0.003, "batch_size": 2, "epochs": 2}
})");
  }
};

}  // namespace

TEST_CASE("cli pipeline, exit codes, and determinism") {
  Workspace ws;

  SUBCASE("usage errors exit 2") {
    CHECK(run("align").exit_code == 2);
    CHECK(run("no-such-command").exit_code == 2);
    CHECK(run("").exit_code == 2);
  }

  SUBCASE("runtime failures exit 1") {
    CHECK(run("build-graph --graph cli_work/missing.tsv").exit_code == 1);
    write("cli_work/bad.json", "{\"unknown_key\": 1}");
    CHECK(run("retrieve --config cli_work/bad.json --graph cli_work/graph.tsv"
              " --post hi")
              .exit_code == 1);
  }

  SUBCASE("build-graph prints counts") {
    auto r = run("build-graph --graph cli_work/graph.tsv");
    CHECK(r.exit_code == 0);
    CHECK(r.output == "nodes 5 edges 3 relations 5\n");
  }

  SUBCASE("retrieve emits the subgraph as json") {
    auto r = run(
        "retrieve --graph cli_work/graph.tsv --post \"the DOG in the park\"");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"v0\":[\"dog\",\"park\"]") != std::string::npos);
    bool v1_present =
        r.output.find("\"v1\":[\"ball\",\"cat\"]") != std::string::npos ||
        r.output.find("\"v1\":[\"cat\",\"ball\"]") != std::string::npos;
    CHECK(v1_present);
  }

  SUBCASE("align output is deterministic") {
    CHECK(run("align --corpus cli_work/corpus.jsonl --graph cli_work/graph.tsv"
              " --out cli_work/a1.tsv")
              .exit_code == 0);
    CHECK(run("align --corpus cli_work/corpus.jsonl --graph cli_work/graph.tsv"
              " --out cli_work/a2.tsv")
              .exit_code == 0);
    CHECK(read_file("cli_work/a1.tsv") == read_file("cli_work/a2.tsv"));
    CHECK(!read_file("cli_work/a1.tsv").empty());
  }

  SUBCASE("enhance with an empty corpus reproduces the input graph") {
    write("cli_work/empty.jsonl", "");
    CHECK(run("enhance --corpus cli_work/empty.jsonl --graph cli_work/graph.tsv"
              " --out cli_work/same.tsv")
              .exit_code == 0);
    CHECK(run("build-graph --graph cli_work/graph.tsv --out cli_work/canon.tsv")
              .exit_code == 0);
    CHECK(read_file("cli_work/same.tsv") == read_file("cli_work/canon.tsv"));
  }

  SUBCASE("enhance then stats: enhanced coverage dominates per hop") {
    CHECK(run("enhance --corpus cli_work/corpus.jsonl --graph cli_work/graph.tsv"
              " --lexicon cli_work/lexicon.tsv --out cli_work/ge.tsv")
              .exit_code == 0);
    auto r = run(
        "stats --graph cli_work/graph.tsv --enhanced cli_work/ge.tsv"
        " --corpus cli_work/corpus.jsonl");
    CHECK(r.exit_code == 0);
    // parse the goldens per hop from the two blocks, in document order
    std::vector<double> goldens;
    std::istringstream in(r.output);
    std::string line;
    while (std::getline(in, line)) {
      auto pos = line.find("\"golden\":");
      if (pos == std::string::npos) continue;
      goldens.push_back(std::stod(line.substr(pos + 9)));
    }
    REQUIRE(goldens.size() == 6);  // three hops for G, three for G_e
    for (int h = 0; h < 3; ++h) CHECK(goldens[3 + h] >= goldens[h]);
  }

  SUBCASE("ablate with a larger n removes at least as many edges") {
    CHECK(run("align --corpus cli_work/corpus.jsonl --graph cli_work/graph.tsv"
              " --out cli_work/align.tsv")
              .exit_code == 0);
    auto r2 = run(
        "ablate --graph cli_work/graph.tsv --alignment cli_work/align.tsv"
        " --n 0.2 --out cli_work/g20.tsv");
    auto r5 = run(
        "ablate --graph cli_work/graph.tsv --alignment cli_work/align.tsv"
        " --n 0.5 --out cli_work/g50.tsv");
    CHECK(r2.exit_code == 0);
    CHECK(r5.exit_code == 0);
    auto count_edges = [](const std::string& text) {
      std::istringstream in(text);
      std::string line;
      int edges = 0;
      while (std::getline(in, line))
        if (std::count(line.begin(), line.end(), '\t') == 2) ++edges;
      return edges;
    };
    CHECK(count_edges(read_file("cli_work/g50.tsv")) <=
          count_edges(read_file("cli_work/g20.tsv")));
  }

  SUBCASE("train, eval, chat: full loop with a golden transcript") {
    CHECK(run("train --config cli_work/config.json --corpus cli_work/corpus.jsonl"
              " --graph cli_work/graph.tsv --out-checkpoint cli_work/m.ckpt"
              " --out-log cli_work/loss.csv")
              .exit_code == 0);
    auto log = read_file("cli_work/loss.csv");
    CHECK(log.find("epoch,L_gen,L_copy,L_gate,L,ppl") == 0);
    CHECK(std::count(log.begin(), log.end(), '\n') == 3);

    auto ev = run(
        "eval --config cli_work/config.json --corpus cli_work/corpus.jsonl"
        " --graph cli_work/graph.tsv --checkpoint cli_work/m.ckpt"
        " --out cli_work/report.json");
    CHECK(ev.exit_code == 0);
    CHECK(ev.output.find("Bleu-3") != std::string::npos);
    CHECK(read_file("cli_work/report.json").find("\"ppl\"") !=
          std::string::npos);

    std::string script = "the dog saw a cat\nhello park\n";
    auto chat1 = run(
        "chat --config cli_work/config.json --graph cli_work/graph.tsv"
        " --checkpoint cli_work/m.ckpt",
        script);
    auto chat2 = run(
        "chat --config cli_work/config.json --graph cli_work/graph.tsv"
        " --checkpoint cli_work/m.ckpt",
        script);
    CHECK(chat1.exit_code == 0);
    // fixed seed, fixed checkpoint: transcripts are byte-identical
    CHECK(chat1.output == chat2.output);
    CHECK(chat1.output.find("response:") != std::string::npos);
    CHECK(chat1.output.find("concepts: dog cat") != std::string::npos);
    CHECK(chat1.output.find("concepts: park") != std::string::npos);
  }

  SUBCASE("checkpoint is rejected under a different model config") {
    CHECK(run("train --config cli_work/config.json --corpus cli_work/corpus.jsonl"
              " --graph cli_work/graph.tsv --out-checkpoint cli_work/m.ckpt"
              " --out-log cli_work/loss.csv")
              .exit_code == 0);
    write("cli_work/other.json", R"({
  "seed": 42,
  "vocab": {"max_size": 100},
  "seq2seq": {"hidden_dim": 16, "embedding_dim": 10, "max_decode_len": 8},
  "edge_transformer": {"layers": 2},
  "train": {"lr": 0.003, "batch_size": 2, "epochs": 2}
})");
    auto r = run(
        "eval --config cli_work/other.json --corpus cli_work/corpus.jsonl"
        " --graph cli_work/graph.tsv --checkpoint cli_work/m.ckpt");
    CHECK(r.exit_code == 1);
  }
}

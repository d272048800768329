#include "edgeflow/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "edgeflow/io_util.hpp"
#include "edgeflow/kgraph.hpp"

namespace edgeflow {

namespace {
// Internal id 0 is the NULL source word; real concepts start at 1.
constexpr int kNull = 0;
}  // namespace

std::vector<ConceptPair> prepare_concept_pairs(
    const std::vector<DialogPair>& pairs, const KnowledgeGraph& graph) {
  std::vector<ConceptPair> out;
  for (const auto& p : pairs) {
    ConceptPair cp;
    for (const auto& t : p.post)
      if (graph.has_node(t)) cp.source.push_back(t);
    for (const auto& t : p.response)
      if (graph.has_node(t)) cp.target.push_back(t);
    if (!cp.source.empty() && !cp.target.empty()) out.push_back(std::move(cp));
  }
  return out;
}

AlignmentTable train_ibm1(const std::vector<ConceptPair>& pairs,
                          const AlignmentConfig& config) {
  if (pairs.empty())
    throw std::invalid_argument("train_ibm1: no concept pairs");
  if (config.em_iterations < 1)
    throw std::invalid_argument("train_ibm1: em_iterations must be >= 1");

  // Intern concepts so EM runs over dense ids. First-seen order over the
  // pair list keeps everything deterministic.
  std::map<std::string, int> src_ids, tgt_ids;
  std::vector<std::string> src_names{"<null>"}, tgt_names;
  auto intern = [](std::map<std::string, int>& ids,
                   std::vector<std::string>& names, const std::string& s) {
    auto it = ids.find(s);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(names.size());
    ids.emplace(s, id);
    names.push_back(s);
    return id;
  };
  struct EncodedPair {
    std::vector<int> src, tgt;
  };
  std::vector<EncodedPair> data;
  data.reserve(pairs.size());
  for (const auto& p : pairs) {
    EncodedPair ep;
    if (config.null_word) ep.src.push_back(kNull);
    for (const auto& s : p.source)
      ep.src.push_back(intern(src_ids, src_names, s));
    for (const auto& t : p.target)
      ep.tgt.push_back(intern(tgt_ids, tgt_names, t));
    data.push_back(std::move(ep));
  }
  const int num_src = static_cast<int>(src_names.size());

  // t[s] maps target id -> probability. Uniform init over the targets each
  // source co-occurs with (NULL co-occurs with everything).
  std::vector<std::map<int, double>> t(num_src);
  for (const auto& ep : data)
    for (int s : ep.src)
      for (int f : ep.tgt) t[s][f] = 0.0;
  for (auto& row : t) {
    if (row.empty()) continue;
    double u = 1.0 / static_cast<double>(row.size());
    for (auto& [f, p] : row) p = u;
  }

  std::vector<double> loglik;
  std::vector<std::map<int, double>> counts(num_src);
  for (int iter = 0; iter < config.em_iterations; ++iter) {
    for (auto& row : counts) row.clear();
    std::vector<double> totals(num_src, 0.0);
    double ll = 0.0;
    for (const auto& ep : data) {
      double log_len = std::log(static_cast<double>(ep.src.size()));
      for (int f : ep.tgt) {
        double denom = 0.0;
        for (int s : ep.src) denom += t[s].at(f);
        ll += std::log(denom) - log_len;
        for (int s : ep.src) {
          double c = t[s].at(f) / denom;
          counts[s][f] += c;
          totals[s] += c;
        }
      }
    }
    loglik.push_back(ll);
    for (int s = 0; s < num_src; ++s) {
      if (totals[s] <= 0.0) continue;
      for (auto& [f, c] : counts[s]) t[s][f] = c / totals[s];
    }
  }

  AlignmentTable table;
  table.loglik_ = std::move(loglik);
  for (int s = kNull + 1; s < num_src; ++s) {
    for (const auto& [f, p] : t[s]) {
      if (config.min_prob_floor > 0.0 && p <= config.min_prob_floor) continue;
      table.rows_[src_names[s]][tgt_names[f]] = p;
    }
  }
  return table;
}

double AlignmentTable::prob(const std::string& source,
                            const std::string& target) const {
  auto it = rows_.find(source);
  if (it == rows_.end()) return 0.0;
  auto jt = it->second.find(target);
  return jt == it->second.end() ? 0.0 : jt->second;
}

std::vector<std::pair<std::string, double>> AlignmentTable::ranked_targets(
    const std::string& source) const {
  std::vector<std::pair<std::string, double>> out;
  auto it = rows_.find(source);
  if (it == rows_.end()) return out;
  out.assign(it->second.begin(), it->second.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

std::vector<std::pair<std::string, double>> AlignmentTable::top_k_targets(
    const std::string& source, int k) const {
  if (k < 1) throw std::invalid_argument("top_k_targets: k must be >= 1");
  auto ranked = ranked_targets(source);
  if (static_cast<int>(ranked.size()) > k) ranked.resize(k);
  return ranked;
}

std::vector<std::string> AlignmentTable::sources() const {
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& [s, row] : rows_) out.push_back(s);
  return out;
}

std::string AlignmentTable::serialize() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [s, row] : rows_)
    for (const auto& [tgt, p] : ranked_targets(s))
      out << s << "\t" << tgt << "\t" << p << "\n";
  return out.str();
}

AlignmentTable AlignmentTable::deserialize(const std::string& text) {
  AlignmentTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw std::runtime_error("alignment line " + std::to_string(line_no) +
                               ": expected 3 fields");
    table.rows_[fields[0]][fields[1]] = std::stod(fields[2]);
  }
  return table;
}

}  // namespace edgeflow

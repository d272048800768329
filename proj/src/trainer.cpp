#include "edgeflow/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "edgeflow/io_util.hpp"

namespace edgeflow {

AdamOptimizer::AdamOptimizer(std::vector<Parameter*> params,
                             const TrainConfig& cfg)
    : params_(std::move(params)), cfg_(cfg) {
  if (cfg_.lr < 0.0) throw std::invalid_argument("Adam: lr must be >= 0");
  for (Parameter* p : params_) {
    st_.m.emplace_back(p->value.shape(), 0.0);
    st_.v.emplace_back(p->value.shape(), 0.0);
  }
}

double AdamOptimizer::clip_global_norm(const std::vector<Parameter*>& params,
                                       double max_norm) {
  double sq = 0.0;
  for (Parameter* p : params)
    for (int64_t i = 0; i < p->numel(); ++i) sq += p->grad[i] * p->grad[i];
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    double scale = max_norm / norm;
    for (Parameter* p : params)
      for (int64_t i = 0; i < p->numel(); ++i) p->grad[i] *= scale;
    return max_norm;
  }
  return norm;
}

double AdamOptimizer::step() {
  double norm = clip_global_norm(params_, cfg_.grad_clip_norm);
  st_.t += 1;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(st_.t));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(st_.t));
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Parameter* p = params_[pi];
    Tensor& m = st_.m[pi];
    Tensor& v = st_.v[pi];
    for (int64_t i = 0; i < p->numel(); ++i) {
      double g = p->grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p->value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    p->zero_grad();
  }
  return norm;
}

AdamState AdamOptimizer::state() const { return st_; }

void AdamOptimizer::restore(const AdamState& state) {
  if (state.m.size() != params_.size() || state.v.size() != params_.size())
    throw std::runtime_error("Adam: restored state is misaligned");
  st_ = state;
}

std::string loss_log_to_csv(const std::vector<EpochLog>& logs) {
  std::ostringstream out;
  out << "epoch,L_gen,L_copy,L_gate,L,ppl\n";
  char buf[256];
  for (const auto& log : logs) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  log.epoch, log.mean_loss.gen, log.mean_loss.copy,
                  log.mean_loss.gate, log.mean_loss.total, log.ppl);
    out << buf;
  }
  return out.str();
}

namespace {

void check_eval_inputs(const std::vector<DialogPair>& pairs,
                       const std::vector<Subgraph>& subgraphs,
                       const char* what) {
  if (pairs.empty())
    throw std::invalid_argument(std::string(what) + ": empty split");
  if (pairs.size() != subgraphs.size())
    throw std::invalid_argument(std::string(what) +
                                ": pairs/subgraphs length mismatch");
}

}  // namespace

double evaluate_ppl(const DialogModel& model,
                    const std::vector<DialogPair>& pairs,
                    const std::vector<Subgraph>& subgraphs) {
  check_eval_inputs(pairs, subgraphs, "evaluate_ppl");
  double nll = 0.0;
  int64_t tokens = 0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    Tape t(false);
    auto fwd = model.forward_example(t, pairs[i], subgraphs[i]);
    for (size_t j = 0; j < fwd.steps.size(); ++j) {
      double p = model.step_token_prob(t, fwd.steps[j],
                                       fwd.reference_tokens[j], subgraphs[i]);
      nll += -std::log(std::max(p, 1e-12));
      ++tokens;
    }
  }
  return std::exp(nll / static_cast<double>(tokens));
}

double evaluate_concept_ppl(const DialogModel& model,
                            const std::vector<DialogPair>& pairs,
                            const std::vector<Subgraph>& subgraphs) {
  check_eval_inputs(pairs, subgraphs, "evaluate_concept_ppl");
  double nll = 0.0;
  int64_t tokens = 0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    Tape t(false);
    auto fwd = model.forward_example(t, pairs[i], subgraphs[i]);
    for (size_t j = 0; j < fwd.steps.size(); ++j) {
      const auto& step = fwd.steps[j];
      const std::string& token = fwd.reference_tokens[j];
      int slot = step.has_copy ? model.copy_slot_for(token, subgraphs[i]) : -1;
      double p = slot >= 0 ? t.val(step.p_copy)[slot]
                           : t.val(step.p_vocab)[model.vocab().id(token)];
      nll += -std::log(std::max(p, 1e-12));
      ++tokens;
    }
  }
  return std::exp(nll / static_cast<double>(tokens));
}

double mean_copy_gate(const DialogModel& model,
                      const std::vector<DialogPair>& pairs,
                      const std::vector<Subgraph>& subgraphs) {
  check_eval_inputs(pairs, subgraphs, "mean_copy_gate");
  double total = 0.0;
  int64_t count = 0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    Tape t(false);
    auto fwd = model.forward_example(t, pairs[i], subgraphs[i]);
    for (size_t j = 0; j < fwd.steps.size(); ++j) {
      const auto& step = fwd.steps[j];
      if (!step.has_copy) continue;
      if (model.copy_slot_for(fwd.reference_tokens[j], subgraphs[i]) < 0)
        continue;
      total += t.val(step.gate)[0];
      ++count;
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

Trainer::Trainer(DialogModel& model, const TrainConfig& cfg)
    : model_(&model),
      cfg_(cfg),
      opt_(model.params().pointers(), cfg),
      rng_(cfg.seed) {
  if (cfg_.batch_size < 1)
    throw std::invalid_argument("Trainer: batch_size must be >= 1");
}

std::vector<EpochLog> Trainer::run(const std::vector<DialogPair>& pairs,
                                   const std::vector<Subgraph>& subgraphs,
                                   int epochs) {
  check_eval_inputs(pairs, subgraphs, "train");
  std::vector<EpochLog> logs;
  auto param_ptrs = model_->params().pointers();
  for (int e = 0; e < epochs; ++e) {
    std::vector<size_t> order(pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<size_t>(rng_.uniform_int(
                    static_cast<int64_t>(i)))]);

    LossBreakdown epoch_loss;
    size_t pos = 0;
    while (pos < order.size()) {
      size_t end = std::min(pos + static_cast<size_t>(cfg_.batch_size),
                            order.size());
      model_->params().zero_grads();
      for (size_t b = pos; b < end; ++b) {
        size_t idx = order[b];
        Tape t(true);
        auto fwd = model_->forward_example(t, pairs[idx], subgraphs[idx],
                                           &rng_);
        LossBreakdown lb = model_->loss_values(t, fwd.loss);
        if (!std::isfinite(lb.total))
          throw std::runtime_error("non-finite loss at step " +
                                   std::to_string(step_));
        epoch_loss.gen += lb.gen;
        epoch_loss.copy += lb.copy;
        epoch_loss.gate += lb.gate;
        epoch_loss.total += lb.total;
        t.backward(fwd.loss.total);
      }
      double inv = 1.0 / static_cast<double>(end - pos);
      for (Parameter* p : param_ptrs)
        for (int64_t i = 0; i < p->numel(); ++i) p->grad[i] *= inv;
      opt_.step();
      ++step_;
      pos = end;
    }
    ++epoch_;
    double inv_n = 1.0 / static_cast<double>(pairs.size());
    EpochLog log;
    log.epoch = epoch_;
    log.mean_loss = {epoch_loss.gen * inv_n, epoch_loss.copy * inv_n,
                     epoch_loss.gate * inv_n, epoch_loss.total * inv_n};
    log.ppl = evaluate_ppl(*model_, pairs, subgraphs);
    logs.push_back(log);
    log_info("epoch " + std::to_string(log.epoch) + " loss " +
             std::to_string(log.mean_loss.total) + " ppl " +
             std::to_string(log.ppl));
  }
  return logs;
}

Checkpoint Trainer::make_checkpoint(uint64_t config_hash) const {
  Checkpoint ckpt;
  ckpt.config_hash = config_hash;
  ckpt.step = step_;
  ckpt.epoch = static_cast<uint32_t>(epoch_);
  ckpt.rng_state = rng_.save_state();
  ckpt.vocab_text = model_->vocab().serialize();
  for (const auto& p : model_->params().all())
    ckpt.params.emplace_back(p->name, p->value);
  ckpt.has_adam = true;
  ckpt.adam = opt_.state();
  return ckpt;
}

void Trainer::restore(const Checkpoint& ckpt, uint64_t expected_config_hash) {
  if (ckpt.config_hash != expected_config_hash)
    throw std::runtime_error("checkpoint: config hash mismatch");
  const auto& params = model_->params().all();
  if (ckpt.params.size() != params.size())
    throw std::runtime_error("checkpoint: parameter count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    if (ckpt.params[i].first != params[i]->name)
      throw std::runtime_error("checkpoint: parameter name mismatch at '" +
                               ckpt.params[i].first + "'");
    if (!ckpt.params[i].second.same_shape(params[i]->value))
      throw std::runtime_error("checkpoint: shape mismatch at '" +
                               params[i]->name + "'");
    params[i]->value = ckpt.params[i].second;
  }
  if (ckpt.has_adam) opt_.restore(ckpt.adam);
  rng_.load_state(ckpt.rng_state);
  step_ = ckpt.step;
  epoch_ = static_cast<int>(ckpt.epoch);
}

}  // namespace edgeflow

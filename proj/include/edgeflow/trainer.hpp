#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edgeflow/checkpoint.hpp"
#include "edgeflow/seq2seq.hpp"

namespace edgeflow {

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 30;
  double grad_clip_norm = 5.0;
  int epochs = 10;
  uint64_t seed = 0;
};

// Adam over the summed example gradients, after scaling to a batch mean and
// global-norm clipping. Moments are exposed for checkpointing.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<Parameter*> params, const TrainConfig& cfg);

  // Applies one update from the gradients currently held by the parameters
  // and zeroes them. Returns the post-clip global gradient norm.
  double step();

  // Scales every gradient so the global norm is at most max_norm.
  static double clip_global_norm(const std::vector<Parameter*>& params,
                                 double max_norm);

  AdamState state() const;
  void restore(const AdamState& state);

 private:
  std::vector<Parameter*> params_;
  TrainConfig cfg_;
  AdamState st_;
};

struct EpochLog {
  int epoch = 0;
  LossBreakdown mean_loss;
  double ppl = 0.0;
};

std::string loss_log_to_csv(const std::vector<EpochLog>& logs);

// Mixture perplexity: exp(mean -log p_t(reference token)) over every
// reference token (responses plus <eos>), dropout disabled.
double evaluate_ppl(const DialogModel& model,
                    const std::vector<DialogPair>& pairs,
                    const std::vector<Subgraph>& subgraphs);

// Steps whose reference token is a subgraph concept score it under the copy
// distribution; all other steps score under the vocabulary distribution.
double evaluate_concept_ppl(const DialogModel& model,
                            const std::vector<DialogPair>& pairs,
                            const std::vector<Subgraph>& subgraphs);

// Mean gate value over copy-labeled steps (teacher forced, dropout off).
double mean_copy_gate(const DialogModel& model,
                      const std::vector<DialogPair>& pairs,
                      const std::vector<Subgraph>& subgraphs);

// Single-worker training loop. Shuffling and dropout consume the trainer's
// own RNG, so a fixed seed reproduces the loss log bit for bit, and resuming
// from a checkpoint continues the identical trajectory.
class Trainer {
 public:
  Trainer(DialogModel& model, const TrainConfig& cfg);

  std::vector<EpochLog> run(const std::vector<DialogPair>& pairs,
                            const std::vector<Subgraph>& subgraphs,
                            int epochs);

  uint64_t step_count() const { return step_; }
  int epoch_count() const { return epoch_; }

  Checkpoint make_checkpoint(uint64_t config_hash) const;
  void restore(const Checkpoint& ckpt, uint64_t expected_config_hash);

 private:
  DialogModel* model_;
  TrainConfig cfg_;
  AdamOptimizer opt_;
  Rng rng_;
  uint64_t step_ = 0;
  int epoch_ = 0;
};

}  // namespace edgeflow

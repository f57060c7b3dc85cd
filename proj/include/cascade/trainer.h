// include/cascade/trainer.h

// Copyright 2026  Cascade ASR Project Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CASCADE_TRAINER_H_
#define CASCADE_TRAINER_H_

#include <optional>
#include <string>
#include <vector>

#include "cascade/checkpoint.h"
#include "cascade/corpus.h"
#include "cascade/g2p.h"
#include "cascade/ssl.h"
#include "cascade/tasks.h"
#include "cascade/tts.h"

namespace cascade {

// Normalized per-task loss weights. The supervised share is casr + ncasr;
// the rest splits the unsupervised budget.
struct TaskWeights {
  double casr = 0.5;
  double ncasr = 0.5;
  double cjoist = 0.0;
  double ncjoist = 0.0;
  double tts = 0.0;
  double bestrq = 0.0;

  double Sum() const {
    return casr + ncasr + cjoist + ncjoist + tts + bestrq;
  }
  void Validate() const;
};

// Experiment grid: the baseline splits its weight equally between the two
// supervised tasks; every other label runs 40/40 supervised with the
// remaining 20% split across unsupervised tasks by fixed fractions. Each
// weight is computed as a single exact rational division.
TaskWeights ResolveWeights(const std::string& label);
const std::vector<std::string>& ExperimentLabels();

struct OptimizerConfig {
  double lr = 3e-3;
  int64_t warmup_steps = 100;  // linear warmup then inverse-sqrt decay
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

struct TrainerOptions {
  TaskWeights weights;
  OptimizerConfig opt;
  int64_t batch_supervised = 8;
  int64_t batch_audio = 8;
  int64_t batch_text = 8;
  int64_t threads = 1;
};

// Read-only data plane for training.
struct TrainData {
  const std::vector<SupervisedExample>* supervised = nullptr;
  const std::vector<UnsupervisedAudio>* audio_only = nullptr;
  const std::vector<UnsupervisedText>* text_only = nullptr;
  const WordpieceModel* wpm = nullptr;
  const G2p* g2p = nullptr;
  const TtsOracle* tts = nullptr;  // synthesis for the augmentation path
};

struct StepLosses {
  // One entry per task with nonzero weight, in fixed task order.
  std::vector<std::pair<std::string, double>> tasks;
  double total = 0.0;
};

class Trainer {
 public:
  Trainer(TrainState state, const TrainData& data,
          const TrainerOptions& options);

  // One iteration: samples one batch per needed dataset, accumulates the
  // weighted gradients, applies one Adam update. Frozen arrays never move.
  StepLosses Step();

  const TrainState& state() const { return state_; }
  TrainState& mutable_state() { return state_; }
  const Quantizer& quantizer() const { return quantizer_; }

 private:
  TrainState state_;
  TrainData data_;
  TrainerOptions options_;
  Quantizer quantizer_;
};

struct RunOptions {
  int64_t steps = 0;
  int64_t checkpoint_every = 0;  // 0 writes only the final checkpoint
  std::string out_dir;           // loss log and checkpoints; empty = no files
  bool quiet = true;
};

// Full loop: per-step CSV loss log (`step,task,loss`), periodic and final
// checkpoints. A non-finite loss aborts, leaving the last good checkpoint
// on disk.
TrainState RunTraining(TrainState init, const TrainData& data,
                       const TrainerOptions& options, const RunOptions& run);

}  // namespace cascade

#endif  // CASCADE_TRAINER_H_

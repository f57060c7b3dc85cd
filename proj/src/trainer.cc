// src/trainer.cc

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

#include "cascade/trainer.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "cascade/parallel.h"

namespace cascade {

void TaskWeights::Validate() const {
  for (double w : {casr, ncasr, cjoist, ncjoist, tts, bestrq})
    CASCADE_CHECK_USAGE(w >= 0.0 && std::isfinite(w),
                        "task weights must be non-negative");
  CASCADE_CHECK_USAGE(std::abs(Sum() - 1.0) <= 1e-9,
                      "task weights must sum to 1, got ", Sum());
}

namespace {

// Exact rational weights: value = num / den in one division.
double Frac(int64_t num, int64_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

// The unsupervised budget is 1/5; table fractions scale inside it.
TaskWeights Grid(int64_t cj_num, int64_t cj_den, int64_t tts_num,
                 int64_t tts_den, int64_t brq_num, int64_t brq_den) {
  TaskWeights w;
  w.casr = Frac(2, 5);
  w.ncasr = Frac(2, 5);
  w.cjoist = cj_num == 0 ? 0.0 : Frac(cj_num, 5 * cj_den);
  w.ncjoist = w.cjoist;
  w.tts = tts_num == 0 ? 0.0 : Frac(tts_num, 5 * tts_den);
  w.bestrq = brq_num == 0 ? 0.0 : Frac(brq_num, 5 * brq_den);
  return w;
}

}  // namespace

TaskWeights ResolveWeights(const std::string& label) {
  if (label == "E-0") {
    TaskWeights w;
    w.casr = Frac(1, 2);
    w.ncasr = Frac(1, 2);
    return w;
  }
  if (label == "E-A") return Grid(1, 2, 0, 1, 0, 1);
  if (label == "E-B") return Grid(0, 1, 1, 1, 0, 1);
  if (label == "E-C") return Grid(0, 1, 0, 1, 1, 1);
  if (label == "E-AB") return Grid(1, 4, 1, 2, 0, 1);
  if (label == "E-AC") return Grid(1, 4, 0, 1, 1, 2);
  if (label == "E-ABC") return Grid(1, 6, 1, 3, 1, 3);
  throw UsageError(StrCat("unknown experiment label: ", label));
}

const std::vector<std::string>& ExperimentLabels() {
  static const std::vector<std::string> kLabels = {
      "E-0", "E-A", "E-B", "E-C", "E-AB", "E-AC", "E-ABC"};
  return kLabels;
}

namespace {

struct ItemResult {
  // Component losses this item contributes, keyed by task name.
  std::vector<std::pair<std::string, double>> losses;
  std::map<std::string, Tensor> grads;
  bool skipped = false;
};

std::vector<int64_t> SampleIndices(uint64_t seed, int64_t corpus_size,
                                   int64_t batch) {
  Rng rng(seed);
  std::vector<int64_t> out;
  out.reserve(static_cast<size_t>(batch));
  for (int64_t i = 0; i < batch; ++i)
    out.push_back(rng.UniformInt(0, corpus_size - 1));
  return out;
}

double LearningRate(const OptimizerConfig& opt, int64_t t) {
  const double step = static_cast<double>(t);
  const double warm = static_cast<double>(std::max<int64_t>(1, opt.warmup_steps));
  return opt.lr * std::min(step / warm, std::sqrt(warm / step));
}

}  // namespace

Trainer::Trainer(TrainState state, const TrainData& data,
                 const TrainerOptions& options)
    : state_(std::move(state)), data_(data), options_(options) {
  options_.weights.Validate();
  state_.model_cfg.Validate();
  CASCADE_CHECK_USAGE(options_.batch_supervised >= 1 &&
                          options_.batch_audio >= 1 &&
                          options_.batch_text >= 1,
                      "batch sizes must be >= 1");
  quantizer_.projection = state_.params.Get("quantizer.proj");
  quantizer_.codebook = state_.params.Get("quantizer.codebook");
  quantizer_.seed = DeriveSeed(state_.master_seed, "quantizer");
}

StepLosses Trainer::Step() {
  const TaskWeights& w = options_.weights;
  const ModelConfig& cfg = state_.model_cfg;
  const int64_t step = state_.step;
  const uint64_t seed = state_.master_seed;

  const bool need_sup = w.casr > 0 || w.ncasr > 0;
  const bool need_text = w.cjoist > 0 || w.ncjoist > 0 || w.tts > 0;
  const bool need_audio = w.bestrq > 0;

  struct ItemSpec {
    enum Kind { kSupervised, kText, kAudio } kind;
    int64_t corpus_index;
    uint64_t mask_seed;
    double audio_weight = 0.0;  // masked-prediction weight, set after census
  };
  std::vector<ItemSpec> items;
  if (need_sup) {
    CASCADE_CHECK_USAGE(data_.supervised && !data_.supervised->empty(),
                        "supervised corpus missing");
    for (int64_t idx : SampleIndices(DeriveSeed(seed, "batch-s", step),
                                     data_.supervised->size(),
                                     options_.batch_supervised))
      items.push_back({ItemSpec::kSupervised, idx, 0});
  }
  if (need_text) {
    CASCADE_CHECK_USAGE(data_.text_only && !data_.text_only->empty(),
                        "unpaired text corpus missing");
    int64_t slot = 0;
    for (int64_t idx : SampleIndices(DeriveSeed(seed, "batch-ut", step),
                                     data_.text_only->size(),
                                     options_.batch_text))
      items.push_back({ItemSpec::kText, idx,
                       DeriveSeed(seed, "mask-ut", step, slot++)});
  }
  if (need_audio) {
    CASCADE_CHECK_USAGE(data_.audio_only && !data_.audio_only->empty(),
                        "unpaired audio corpus missing");
    // Census first: utterances too short to mask contribute nothing, and
    // the remaining ones share the batch weight equally.
    std::vector<int64_t> idxs =
        SampleIndices(DeriveSeed(seed, "batch-us", step),
                      data_.audio_only->size(), options_.batch_audio);
    int64_t contributors = 0;
    std::vector<bool> ok(idxs.size());
    for (size_t i = 0; i < idxs.size(); ++i) {
      const int64_t frames =
          (*data_.audio_only)[static_cast<size_t>(idxs[i])]
              .audio.NumFrames();
      const int64_t stacked = (frames + cfg.stride - 1) / cfg.stride;
      // Same arithmetic as the span masker's skip condition.
      ok[i] = std::floor(cfg.audio_mask_ratio *
                         static_cast<double>(stacked)) >= 1.0;
      contributors += ok[i] ? 1 : 0;
    }
    int64_t slot = 0;
    for (size_t i = 0; i < idxs.size(); ++i) {
      ItemSpec spec{ItemSpec::kAudio, idxs[i],
                    DeriveSeed(seed, "mask-us", step, slot++)};
      spec.audio_weight =
          (ok[i] && contributors > 0)
              ? w.bestrq / static_cast<double>(contributors)
              : 0.0;
      if (spec.audio_weight > 0) items.push_back(spec);
    }
  }

  const double inv_bs = 1.0 / static_cast<double>(options_.batch_supervised);
  const double inv_bt = 1.0 / static_cast<double>(options_.batch_text);

  std::vector<ItemResult> results(items.size());
  ParallelFor(static_cast<int64_t>(items.size()), options_.threads,
              [&](int64_t i) {
    const ItemSpec& spec = items[static_cast<size_t>(i)];
    ItemResult& res = results[static_cast<size_t>(i)];
    Tape tape;
    ParamVars pv(&tape, &state_.params, /*trainable=*/true);
    Var combined;
    bool has_combined = false;
    auto add_term = [&](Var loss, double weight, const char* task) {
      res.losses.emplace_back(task, tape.Value(loss)[0]);
      if (weight <= 0) return;
      Var term = Scale(loss, weight);
      combined = has_combined ? Add(combined, term) : term;
      has_combined = true;
    };
    switch (spec.kind) {
      case ItemSpec::kSupervised: {
        const auto& ex =
            (*data_.supervised)[static_cast<size_t>(spec.corpus_index)];
        CascadeLosses l = AsrLosses(pv, cfg, *data_.wpm, ex.audio, ex.words);
        add_term(l.causal, w.casr * inv_bs, "casr");
        add_term(l.noncausal, w.ncasr * inv_bs, "ncasr");
        break;
      }
      case ItemSpec::kText: {
        const auto& ex =
            (*data_.text_only)[static_cast<size_t>(spec.corpus_index)];
        if (w.cjoist > 0 || w.ncjoist > 0) {
          Rng mask_rng(spec.mask_seed);
          CascadeLosses jl = JoistLosses(pv, cfg, *data_.wpm, *data_.g2p,
                                         ex.words, mask_rng);
          add_term(jl.causal, w.cjoist * inv_bt, "cjoist");
          add_term(jl.noncausal, w.ncjoist * inv_bt, "ncjoist");
        }
        if (w.tts > 0) {
          FeatureSequence synth = data_.tts->Synthesize(ex.words);
          CascadeLosses tl = AsrLosses(pv, cfg, *data_.wpm, synth, ex.words);
          // One task weight covers both synthetic decoding paths.
          Var tts_loss = Scale(Add(tl.causal, tl.noncausal), 0.5);
          add_term(tts_loss, w.tts * inv_bt, "tts");
        }
        break;
      }
      case ItemSpec::kAudio: {
        const auto& ex =
            (*data_.audio_only)[static_cast<size_t>(spec.corpus_index)];
        Rng mask_rng(spec.mask_seed);
        auto brq = BestRqLosses(pv, cfg, quantizer_, ex.audio, mask_rng);
        if (!brq.has_value()) {
          res.skipped = true;
          return;
        }
        add_term(brq->loss, spec.audio_weight, "bestrq");
        break;
      }
    }
    if (!has_combined) {
      res.skipped = true;
      return;
    }
    tape.Backward(combined);
    res.grads = pv.CollectGrads();
  });

  // Deterministic reduction in item order, then name order.
  std::map<std::string, Tensor> grad_acc;
  for (const ItemResult& res : results) {
    if (res.skipped) continue;
    for (const auto& [name, g] : res.grads) {
      auto it = grad_acc.find(name);
      if (it == grad_acc.end()) {
        grad_acc.emplace(name, g);
      } else {
        Tensor& acc = it->second;
        for (int64_t i = 0; i < acc.NumElements(); ++i) acc[i] += g[i];
      }
    }
  }

  // Per-task means for logging and the non-finite abort.
  StepLosses out;
  const std::vector<std::pair<std::string, double>> weight_of = {
      {"casr", w.casr},     {"ncasr", w.ncasr}, {"cjoist", w.cjoist},
      {"ncjoist", w.ncjoist}, {"tts", w.tts},   {"bestrq", w.bestrq}};
  for (const auto& [task, weight] : weight_of) {
    if (weight <= 0) continue;
    double sum = 0.0;
    int64_t n = 0;
    for (const ItemResult& res : results)
      for (const auto& [name, value] : res.losses)
        if (name == task) {
          sum += value;
          ++n;
        }
    const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    CASCADE_CHECK_RUNTIME(std::isfinite(mean), "non-finite loss in task '",
                          task, "' at step ", step);
    out.tasks.emplace_back(task, mean);
    out.total += weight * mean;
  }

  // Adam over every trainable array; absent gradients count as zero.
  const int64_t t_adam = state_.opt.t + 1;
  const double lr = LearningRate(options_.opt, t_adam);
  const double b1 = options_.opt.beta1, b2 = options_.opt.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_adam));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_adam));
  for (auto& [name, value] : state_.params.entries()) {
    if (state_.params.IsFrozen(name)) continue;
    Tensor& m = state_.opt.m.try_emplace(name, Tensor::Zeros(value.shape()))
                    .first->second;
    Tensor& v = state_.opt.v.try_emplace(name, Tensor::Zeros(value.shape()))
                    .first->second;
    const auto git = grad_acc.find(name);
    const Tensor* g = git == grad_acc.end() ? nullptr : &git->second;
    for (int64_t i = 0; i < value.NumElements(); ++i) {
      const double gi = g ? (*g)[i] : 0.0;
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      value[i] -= lr * mhat / (std::sqrt(vhat) + options_.opt.eps);
    }
  }
  state_.opt.t = t_adam;
  ++state_.step;
  return out;
}

TrainState RunTraining(TrainState init, const TrainData& data,
                       const TrainerOptions& options, const RunOptions& run) {
  CASCADE_CHECK_USAGE(run.steps >= 0, "steps must be >= 0");
  namespace fs = std::filesystem;
  std::ofstream log;
  if (!run.out_dir.empty()) {
    fs::create_directories(run.out_dir);
    log.open(fs::path(run.out_dir) / "loss_log.csv",
             std::ios::binary | std::ios::trunc);
    CASCADE_CHECK_RUNTIME(log.good(), "cannot open loss log in ",
                          run.out_dir);
    log << "step,task,loss\n";
  }

  Trainer trainer(std::move(init), data, options);
  for (int64_t i = 0; i < run.steps; ++i) {
    StepLosses losses = trainer.Step();
    if (log.is_open()) {
      for (const auto& [task, value] : losses.tasks)
        log << trainer.state().step << "," << task << "," << value << "\n";
    }
    if (!run.quiet && (i % 100 == 0 || i + 1 == run.steps))
      std::cerr << "step " << trainer.state().step << " total "
                << losses.total << "\n";
    if (run.checkpoint_every > 0 && !run.out_dir.empty() &&
        trainer.state().step % run.checkpoint_every == 0) {
      SaveCheckpoint(trainer.state(),
                     (fs::path(run.out_dir) /
                      ("ckpt-" + std::to_string(trainer.state().step) +
                       ".bin"))
                         .string());
    }
  }
  if (!run.out_dir.empty())
    SaveCheckpoint(trainer.state(),
                   (fs::path(run.out_dir) / "ckpt-final.bin").string());
  return std::move(trainer.mutable_state());
}

}  // namespace cascade

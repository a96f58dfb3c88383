#pragma once

#include <ostream>

#include "svs/corpus.hpp"
#include "svs/diffusion.hpp"
#include "svs/objectives.hpp"

namespace svs {

/// Decoupled-weight-decay Adam over one ParamSet. Moment buffers follow the
/// set's fixed parameter order.
class AdamW {
 public:
  AdamW(ParamSet& params, double lr, double beta1, double beta2, double weight_decay,
        double eps = 1e-8);
  /// One update from a backward pass; lr_scale applies schedule decay.
  void step(const GradMap& grads, double lr_scale = 1.0);
  int64_t steps_taken() const { return t_; }

 private:
  ParamSet& params_;
  double lr_, beta1_, beta2_, wd_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct LossBreakdown {
  double l_dur = 0, l_recon = 0, l_adv = 0, l_wd = 0, l_gp = 0;
  double l_g = 0, l_d = 0;
};

void write_loss_csv_header(std::ostream& os);
void write_loss_csv_row(std::ostream& os, int64_t step, const LossBreakdown& lb);

/// Probability of replacing the ground-truth noised input with a model sample
/// when fine-tuning: (1 - (t-1)/T)^2.
double finetune_mix_prob(int t, int T);

class Trainer {
 public:
  Trainer(TrainConfig cfg, Corpus corpus);

  /// One optimization step (critic updates plus one generator update for the
  /// adversarial presets; a single generator update otherwise).
  LossBreakdown step();

  /// Run cfg.steps steps, logging losses and writing periodic checkpoints.
  void run(std::ostream* log_csv = nullptr);

  const TrainConfig& config() const { return cfg_; }
  ParamSet& generator() { return gen_; }
  ParamSet& discriminator() { return disc_; }
  const DiffusionSchedule& schedule() const { return sched_; }
  int64_t step_count() const { return step_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  LossBreakdown step_adversarial();
  LossBreakdown step_reconstruction();
  Batch draw_batch();
  double decay_scale() const;

  TrainConfig cfg_;
  Corpus corpus_;
  DiffusionSchedule sched_;
  std::mt19937_64 rng_;
  ParamSet gen_;
  ParamSet disc_;
  AdamW gen_opt_;
  AdamW disc_opt_;
  int64_t step_ = 0;
};

/// Full synthesis path: encode the score (predicted durations unless ground
/// truth is given) and run the reverse diffusion chain (or the feed-forward
/// decoder for the fft preset).
Tensor synthesize_mel(const MusicalScore& score, const ParamSet& gen, const TrainConfig& cfg,
                      std::mt19937_64& rng, const std::vector<int64_t>* gt_durations = nullptr);

MelSpectrogram tensor_to_mel(const Tensor& t, const SignalConfig& sig);

}  // namespace svs

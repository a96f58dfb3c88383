#include "svs/trainer.hpp"

#include <cmath>
#include <fstream>

namespace svs {

AdamW::AdamW(ParamSet& params, double lr, double beta1, double beta2, double weight_decay,
             double eps)
    : params_(params), lr_(lr), beta1_(beta1), beta2_(beta2), wd_(weight_decay), eps_(eps) {
  for (const auto& [name, t] : params_.items()) {
    m_.emplace_back(t.data().size(), 0.0);
    v_.emplace_back(t.data().size(), 0.0);
  }
}

void AdamW::step(const GradMap& grads, double lr_scale) {
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, double(t_));
  double bc2 = 1.0 - std::pow(beta2_, double(t_));
  double lr = lr_ * lr_scale;
  for (size_t i = 0; i < params_.items().size(); ++i) {
    Tensor& p = params_.items()[i].second;
    if (!grads.contains(p)) continue;
    const std::vector<double>& g = grads.at(p).data();
    std::vector<double>& w = p.mutable_data();
    if (g.size() != w.size()) throw AutodiffError("AdamW: gradient size mismatch");
    for (size_t j = 0; j < w.size(); ++j) {
      w[j] -= lr * wd_ * w[j];
      m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g[j];
      v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g[j] * g[j];
      w[j] -= lr * (m_[i][j] / bc1) / (std::sqrt(v_[i][j] / bc2) + eps_);
    }
  }
}

void write_loss_csv_header(std::ostream& os) {
  os << "step,l_dur,l_recon,l_adv,l_wd,l_gp,l_g,l_d\n";
}

void write_loss_csv_row(std::ostream& os, int64_t step, const LossBreakdown& lb) {
  os << step << ',' << lb.l_dur << ',' << lb.l_recon << ',' << lb.l_adv << ',' << lb.l_wd << ','
     << lb.l_gp << ',' << lb.l_g << ',' << lb.l_d << '\n';
}

double finetune_mix_prob(int t, int T) {
  if (t < 1 || t > T) throw NumericError("finetune_mix_prob: step outside schedule");
  double r = 1.0 - double(t - 1) / double(T);
  return r * r;
}

namespace {

Tensor normalize_mel_t(const Tensor& mel, const TrainConfig& cfg) {
  return mul_scalar(add_scalar(mel, -cfg.mel_norm_mean), 1.0 / cfg.mel_norm_scale);
}

Tensor denormalize_mel_t(const Tensor& x, const TrainConfig& cfg) {
  return add_scalar(mul_scalar(x, cfg.mel_norm_scale), cfg.mel_norm_mean);
}

double checked(const Tensor& loss, const char* term, int64_t step) {
  double v = loss.item();
  if (!std::isfinite(v)) {
    throw NumericError(std::string("train: non-finite ") + term + " at step " +
                       std::to_string(step));
  }
  return v;
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, Corpus corpus)
    : cfg_(std::move(cfg)),
      corpus_(std::move(corpus)),
      sched_(compute_schedule(cfg_.T, cfg_.beta_min, cfg_.beta_max)),
      rng_(cfg_.seed),
      gen_(init_generator_params(cfg_, rng_)),
      disc_(init_discriminator_params(cfg_, rng_)),
      gen_opt_(gen_, cfg_.lr, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.weight_decay),
      disc_opt_(disc_, cfg_.lr, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.weight_decay) {
  if (corpus_.train.empty()) throw DataError("trainer: empty training corpus");
}

Batch Trainer::draw_batch() {
  std::vector<size_t> picks;
  for (int i = 0; i < cfg_.batch_size; ++i) picks.push_back(size_t(rng_() % corpus_.train.size()));
  return load_batch(corpus_.train, picks, cfg_, rng_);
}

double Trainer::decay_scale() const {
  return cfg_.lr_decay == LrDecay::kExp ? std::pow(cfg_.lr_decay_rate, double(step_)) : 1.0;
}

LossBreakdown Trainer::step() {
  bool adversarial = cfg_.lambda_adv != 0.0 &&
                     (cfg_.preset == Preset::kDiffWgan || cfg_.preset == Preset::kDiffMixed);
  LossBreakdown lb = adversarial ? step_adversarial() : step_reconstruction();
  ++step_;
  return lb;
}

LossBreakdown Trainer::step_adversarial() {
  Batch batch = draw_batch();
  LossBreakdown lb;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (int du = 0; du < cfg_.d_updates_per_g; ++du) {
    std::vector<Tensor> d_real, d_fake, gps;
    for (const TrainSample& s : batch.samples) {
      int t = 1 + int(rng_() % uint64_t(cfg_.T));
      Tensor x0 = normalize_mel_t(s.mel, cfg_);
      Tensor eps_t = Tensor::randn(x0.shape(), rng_);
      Tensor x_t = forward_noise(x0, t, eps_t, sched_);
      Tensor x_prev_real =
          t == 1 ? x0 : forward_noise(x0, t - 1, Tensor::randn(x0.shape(), rng_), sched_);

      EncodedScore enc = encode_score(s.score, gen_, cfg_, &s.durations);
      Tensor x0_hat = diffusion_decoder(x_t, t, enc.ms, gen_, cfg_).detach();
      Tensor x_prev_fake = denoise_step(x_t, t, x0_hat, Tensor::randn(x0.shape(), rng_), sched_);

      d_real.push_back(msc_discriminator(x_prev_real, x_t, t, s.score, s.durations, disc_, cfg_));
      d_fake.push_back(msc_discriminator(x_prev_fake, x_t, t, s.score, s.durations, disc_, cfg_));
      Tensor x_tilde = interpolate_pair(x_prev_real, x_prev_fake, unif(rng_));
      Tensor d_mix = msc_discriminator(x_tilde, x_t, t, s.score, s.durations, disc_, cfg_);
      gps.push_back(gradient_penalty(d_mix, x_tilde));
    }
    Tensor l_wd = wasserstein_loss(d_real, d_fake);
    Tensor l_gp = mean_stack(gps);
    Tensor l_d = add(l_wd, mul_scalar(l_gp, cfg_.lambda_gp));
    lb.l_wd = checked(l_wd, "wasserstein loss", step_);
    lb.l_gp = checked(l_gp, "gradient penalty", step_);
    lb.l_d = checked(l_d, "critic loss", step_);
    disc_opt_.step(backward(l_d), decay_scale());
  }

  std::vector<Tensor> d_fake, l_durs, l_recons;
  for (const TrainSample& s : batch.samples) {
    int t = 1 + int(rng_() % uint64_t(cfg_.T));
    Tensor x0 = normalize_mel_t(s.mel, cfg_);
    Tensor x_t = forward_noise(x0, t, Tensor::randn(x0.shape(), rng_), sched_);
    EncodedScore enc = encode_score(s.score, gen_, cfg_, &s.durations);
    Tensor x0_hat = diffusion_decoder(x_t, t, enc.ms, gen_, cfg_);
    Tensor x_prev_fake = denoise_step(x_t, t, x0_hat, Tensor::randn(x0.shape(), rng_), sched_);
    d_fake.push_back(msc_discriminator(x_prev_fake, x_t, t, s.score, s.durations, disc_, cfg_));
    l_durs.push_back(duration_loss(enc.dur_pred, s.durations));
    l_recons.push_back(recon_loss(x0_hat, x0));
  }
  Tensor l_dur = mean_stack(l_durs);
  Tensor l_recon = mean_stack(l_recons);
  Tensor l_adv = generator_adv_loss(d_fake, cfg_.adv_printed_sign);
  Tensor l_g = add(l_dur, mul_scalar(l_adv, cfg_.lambda_adv));
  if (cfg_.lambda_recon != 0.0) l_g = add(l_g, mul_scalar(l_recon, cfg_.lambda_recon));
  lb.l_dur = checked(l_dur, "duration loss", step_);
  lb.l_recon = checked(l_recon, "reconstruction loss", step_);
  lb.l_adv = checked(l_adv, "adversarial loss", step_);
  lb.l_g = checked(l_g, "generator loss", step_);
  gen_opt_.step(backward(l_g), decay_scale());
  return lb;
}

LossBreakdown Trainer::step_reconstruction() {
  Batch batch = draw_batch();
  LossBreakdown lb;
  std::vector<Tensor> l_durs, l_recons;
  for (const TrainSample& s : batch.samples) {
    EncodedScore enc = encode_score(s.score, gen_, cfg_, &s.durations);
    Tensor x0 = normalize_mel_t(s.mel, cfg_);
    Tensor x0_hat;
    if (cfg_.preset == Preset::kFft) {
      x0_hat = fft_decoder(enc.ms, gen_, cfg_);
    } else {
      int t = 1 + int(rng_() % uint64_t(cfg_.T));
      Tensor x_t = forward_noise(x0, t, Tensor::randn(x0.shape(), rng_), sched_);
      x0_hat = diffusion_decoder(x_t, t, enc.ms, gen_, cfg_);
    }
    l_durs.push_back(duration_loss(enc.dur_pred, s.durations));
    l_recons.push_back(recon_loss(x0_hat, x0));
  }
  Tensor l_dur = mean_stack(l_durs);
  Tensor l_recon = mean_stack(l_recons);
  Tensor l_g = add(l_dur, mul_scalar(l_recon, cfg_.lambda_recon));
  lb.l_dur = checked(l_dur, "duration loss", step_);
  lb.l_recon = checked(l_recon, "reconstruction loss", step_);
  lb.l_g = checked(l_g, "generator loss", step_);
  gen_opt_.step(backward(l_g), decay_scale());
  return lb;
}

void Trainer::run(std::ostream* log_csv) {
  if (log_csv != nullptr) write_loss_csv_header(*log_csv);
  bool keep_disc =
      cfg_.preset == Preset::kDiffWgan || cfg_.preset == Preset::kDiffMixed;
  for (int i = 0; i < cfg_.steps; ++i) {
    LossBreakdown lb = step();
    if (log_csv != nullptr) write_loss_csv_row(*log_csv, step_, lb);
    if (cfg_.checkpoint_every > 0 && !cfg_.checkpoint.empty() &&
        step_ % cfg_.checkpoint_every == 0) {
      save_checkpoint(cfg_.checkpoint, gen_, keep_disc ? &disc_ : nullptr, cfg_);
    }
  }
  if (!cfg_.checkpoint.empty()) {
    save_checkpoint(cfg_.checkpoint, gen_, keep_disc ? &disc_ : nullptr, cfg_);
  }
}

Tensor synthesize_mel(const MusicalScore& score, const ParamSet& gen, const TrainConfig& cfg,
                      std::mt19937_64& rng, const std::vector<int64_t>* gt_durations) {
  EncodedScore enc = encode_score(score, gen, cfg, gt_durations);
  if (cfg.preset == Preset::kFft) {
    return denormalize_mel_t(fft_decoder(enc.ms, gen, cfg), cfg).detach();
  }
  DiffusionSchedule sched = compute_schedule(cfg.T, cfg.beta_min, cfg.beta_max);
  auto generator = [&](const Tensor& x_t, int t) {
    return diffusion_decoder(x_t, t, enc.ms, gen, cfg);
  };
  Tensor sampled = sample_loop(generator, {cfg.signal.mel_bins, enc.frames}, sched, rng);
  return denormalize_mel_t(sampled, cfg).detach();
}

MelSpectrogram tensor_to_mel(const Tensor& t, const SignalConfig& sig) {
  if (t.shape().size() != 2 || t.dim(0) != sig.mel_bins) {
    throw ShapeError("tensor_to_mel: expected mel_bins x L");
  }
  MelSpectrogram mel;
  mel.bins = int(t.dim(0));
  mel.frames = int(t.dim(1));
  mel.config = sig;
  mel.values.reserve(t.data().size());
  double floor_log = std::log(sig.log_floor);
  for (double v : t.data()) mel.values.push_back(float(std::max(v, floor_log)));
  return mel;
}

}  // namespace svs

#pragma once

#include <functional>
#include <random>

#include "svs/tensor.hpp"

namespace svs {

/// Precomputed constants of the four-step exponential variance schedule.
/// alpha_bar[0] is defined as 1 so t=1 is a valid zero-variance final step.
struct DiffusionSchedule {
  int T = 0;
  double beta_min = 0.0, beta_max = 0.0;
  std::vector<double> beta;        // beta[t], t in 1..T (index 0 unused)
  std::vector<double> alpha;       // 1 - beta_t
  std::vector<double> alpha_bar;   // prod_{s<=t} alpha_s, alpha_bar[0] = 1
  std::vector<double> beta_tilde;  // (1-alpha_bar_{t-1})/(1-alpha_bar_t) * beta_t
};

DiffusionSchedule compute_schedule(int T, double beta_min, double beta_max);

/// x_t = sqrt(alpha_bar_t) x0 + sqrt(1-alpha_bar_t) eps
Tensor forward_noise(const Tensor& x0, int t, const Tensor& eps, const DiffusionSchedule& sched);

/// x_t = sqrt(1-beta_t) x_{t-1} + sqrt(beta_t) eps
Tensor single_step_noise(const Tensor& x_prev, int t, const Tensor& eps,
                         const DiffusionSchedule& sched);

struct PosteriorParams {
  Tensor mean;
  double variance = 0.0;
};

/// Gaussian posterior q(x_{t-1} | x_t, x0): mean and scalar variance beta_tilde_t.
PosteriorParams posterior_params(const Tensor& x0, const Tensor& x_t, int t,
                                 const DiffusionSchedule& sched);

/// One reverse step: posterior mean of (x0_hat, x_t) plus sqrt(beta_tilde_t) * noise.
/// At t=1 the variance is exactly zero and the output equals x0_hat.
Tensor denoise_step(const Tensor& x_t, int t, const Tensor& x0_hat, const Tensor& noise,
                    const DiffusionSchedule& sched);

/// Full reverse chain from x_T ~ N(0, I). The generator maps (x_t, t) to a
/// clean estimate of the same shape. Deterministic given the rng state.
Tensor sample_loop(const std::function<Tensor(const Tensor&, int)>& generator, Shape mel_shape,
                   const DiffusionSchedule& sched, std::mt19937_64& rng);

}  // namespace svs

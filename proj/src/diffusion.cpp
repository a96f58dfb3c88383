#include "svs/diffusion.hpp"

#include <cmath>

#include "svs/ops.hpp"

namespace svs {

namespace {

void check_t(int t, const DiffusionSchedule& sched, const char* op) {
  if (t < 1 || t > sched.T) {
    throw ShapeError(std::string(op) + ": t=" + std::to_string(t) + " outside 1.." +
                     std::to_string(sched.T));
  }
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

}  // namespace

DiffusionSchedule compute_schedule(int T, double beta_min, double beta_max) {
  if (T < 1) throw ShapeError("compute_schedule: T must be >= 1");
  if (!(0.0 < beta_min && beta_min < beta_max)) {
    throw ShapeError("compute_schedule: need 0 < beta_min < beta_max");
  }
  DiffusionSchedule s;
  s.T = T;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.beta.assign(static_cast<size_t>(T) + 1, 0.0);
  s.alpha.assign(static_cast<size_t>(T) + 1, 0.0);
  s.alpha_bar.assign(static_cast<size_t>(T) + 1, 1.0);
  s.beta_tilde.assign(static_cast<size_t>(T) + 1, 0.0);
  double tt = static_cast<double>(T);
  for (int t = 1; t <= T; ++t) {
    double expo = beta_min / tt - 0.5 * (beta_max - beta_min) * (2.0 * t - 1.0) / (tt * tt);
    double b = 1.0 - std::exp(expo);
    if (!(b > 0.0 && b < 1.0)) {
      throw NumericError("compute_schedule: beta_" + std::to_string(t) + "=" + std::to_string(b) +
                         " outside (0,1)");
    }
    s.beta[static_cast<size_t>(t)] = b;
    s.alpha[static_cast<size_t>(t)] = 1.0 - b;
    s.alpha_bar[static_cast<size_t>(t)] = s.alpha_bar[static_cast<size_t>(t) - 1] * (1.0 - b);
    s.beta_tilde[static_cast<size_t>(t)] =
        (1.0 - s.alpha_bar[static_cast<size_t>(t) - 1]) /
        (1.0 - s.alpha_bar[static_cast<size_t>(t)]) * b;
  }
  return s;
}

Tensor forward_noise(const Tensor& x0, int t, const Tensor& eps, const DiffusionSchedule& sched) {
  check_t(t, sched, "forward_noise");
  check_same_shape(x0, eps, "forward_noise");
  double ab = sched.alpha_bar[static_cast<size_t>(t)];
  return add(mul_scalar(x0, std::sqrt(ab)), mul_scalar(eps, std::sqrt(1.0 - ab)));
}

Tensor single_step_noise(const Tensor& x_prev, int t, const Tensor& eps,
                         const DiffusionSchedule& sched) {
  check_t(t, sched, "single_step_noise");
  check_same_shape(x_prev, eps, "single_step_noise");
  double b = sched.beta[static_cast<size_t>(t)];
  return add(mul_scalar(x_prev, std::sqrt(1.0 - b)), mul_scalar(eps, std::sqrt(b)));
}

PosteriorParams posterior_params(const Tensor& x0, const Tensor& x_t, int t,
                                 const DiffusionSchedule& sched) {
  check_t(t, sched, "posterior_params");
  check_same_shape(x0, x_t, "posterior_params");
  double ab = sched.alpha_bar[static_cast<size_t>(t)];
  double ab_prev = sched.alpha_bar[static_cast<size_t>(t) - 1];
  double b = sched.beta[static_cast<size_t>(t)];
  double a = sched.alpha[static_cast<size_t>(t)];
  double c0 = std::sqrt(ab_prev) * b / (1.0 - ab);
  double ct = std::sqrt(a) * (1.0 - ab_prev) / (1.0 - ab);
  PosteriorParams p;
  p.mean = add(mul_scalar(x0, c0), mul_scalar(x_t, ct));
  p.variance = sched.beta_tilde[static_cast<size_t>(t)];
  return p;
}

Tensor denoise_step(const Tensor& x_t, int t, const Tensor& x0_hat, const Tensor& noise,
                    const DiffusionSchedule& sched) {
  check_t(t, sched, "denoise_step");
  PosteriorParams p = posterior_params(x0_hat, x_t, t, sched);
  if (p.variance == 0.0) return p.mean;
  check_same_shape(x_t, noise, "denoise_step");
  return add(p.mean, mul_scalar(noise, std::sqrt(p.variance)));
}

Tensor sample_loop(const std::function<Tensor(const Tensor&, int)>& generator, Shape mel_shape,
                   const DiffusionSchedule& sched, std::mt19937_64& rng) {
  Tensor x = Tensor::randn(mel_shape, rng);
  for (int t = sched.T; t >= 1; --t) {
    Tensor x0_hat = generator(x, t);
    if (x0_hat.shape() != mel_shape) {
      throw ShapeError("sample_loop: generator output " + shape_str(x0_hat.shape()) +
                       " does not match mel shape " + shape_str(mel_shape));
    }
    Tensor noise = t > 1 ? Tensor::randn(mel_shape, rng) : Tensor::zeros(mel_shape);
    x = denoise_step(x, t, x0_hat, noise, sched).detach();
  }
  return x;
}

}  // namespace svs

#include "svs/objectives.hpp"

namespace svs {

Tensor mean_stack(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("mean_stack: empty batch");
  Tensor acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
  return mul_scalar(acc, 1.0 / double(xs.size()));
}

Tensor abs_(const Tensor& x) { return leaky_relu(x, -1.0); }

Tensor duration_loss(const Tensor& dur_pred, const std::vector<int64_t>& gt_durations) {
  if (dur_pred.size() != int64_t(gt_durations.size())) {
    throw ShapeError("duration_loss: prediction/target length mismatch");
  }
  std::vector<double> gt(gt_durations.begin(), gt_durations.end());
  Tensor target = Tensor::leaf(dur_pred.shape(), std::move(gt));
  return mean(square(sub(dur_pred, target)));
}

Tensor recon_loss(const Tensor& x0_hat, const Tensor& x0) {
  if (x0_hat.shape() != x0.shape()) throw ShapeError("recon_loss: shape mismatch");
  return mean(abs_(sub(x0_hat, x0)));
}

Tensor wasserstein_loss(const std::vector<Tensor>& d_real, const std::vector<Tensor>& d_fake) {
  return add(neg(mean_stack(d_real)), mean_stack(d_fake));
}

Tensor interpolate_pair(const Tensor& x_real, const Tensor& x_fake, double alpha) {
  if (x_real.shape() != x_fake.shape()) throw ShapeError("interpolate_pair: shape mismatch");
  if (alpha < 0.0 || alpha > 1.0) throw NumericError("interpolate_pair: alpha outside [0,1]");
  const auto& a = x_real.data();
  const auto& b = x_fake.data();
  std::vector<double> mix(a.size());
  for (size_t i = 0; i < a.size(); ++i) mix[i] = alpha * a[i] + (1.0 - alpha) * b[i];
  return Tensor::leaf(x_real.shape(), std::move(mix), true);
}

Tensor gradient_penalty(const Tensor& d_out, const Tensor& x_tilde) {
  Tensor g = grad(d_out, x_tilde);
  return square(add_scalar(l2_norm(g), -1.0));
}

Tensor generator_adv_loss(const std::vector<Tensor>& d_fake, bool printed_sign) {
  Tensor m = mean_stack(d_fake);
  return printed_sign ? m : neg(m);
}

}  // namespace svs

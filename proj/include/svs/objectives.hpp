#pragma once

#include "svs/ops.hpp"

namespace svs {

/// Mean of a non-empty list of same-shape tensors (batch reduction over
/// per-sample scalars, mostly).
Tensor mean_stack(const std::vector<Tensor>& xs);

/// Differentiable |x| (slope -1 on the negative side).
Tensor abs_(const Tensor& x);

/// Mean squared error between predicted and ground-truth frame counts.
Tensor duration_loss(const Tensor& dur_pred, const std::vector<int64_t>& gt_durations);

/// Mean absolute deviation between the denoised estimate and the target mel.
Tensor recon_loss(const Tensor& x0_hat, const Tensor& x0);

/// Critic Wasserstein term: -E[D(real)] + E[D(fake)].
Tensor wasserstein_loss(const std::vector<Tensor>& d_real, const std::vector<Tensor>& d_fake);

/// Random point on the chord between real and fake, re-rooted as a leaf that
/// requires gradient so the critic can be differentiated at it.
Tensor interpolate_pair(const Tensor& x_real, const Tensor& x_fake, double alpha);

/// One-sample penalty (||grad_x D|| - 1)^2, built from the retained graph of
/// d_out so it stays differentiable with respect to critic parameters.
Tensor gradient_penalty(const Tensor& d_out, const Tensor& x_tilde);

/// Generator adversarial term. The standard sign rewards high critic scores
/// on fakes; printed_sign keeps the opposite orientation for fidelity runs.
Tensor generator_adv_loss(const std::vector<Tensor>& d_fake, bool printed_sign);

}  // namespace svs

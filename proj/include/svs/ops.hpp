#pragma once

#include "svs/tensor.hpp"

namespace svs {

// --- elementwise primitives (numpy-style broadcasting on binaries) ---
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor recip(const Tensor& x);
Tensor exp_(const Tensor& x);
Tensor log_(const Tensor& x);
Tensor sqrt_(const Tensor& x);
Tensor square(const Tensor& x);
Tensor tanh_(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor silu(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);

Tensor add_scalar(const Tensor& x, double s);
Tensor mul_scalar(const Tensor& x, double s);

// --- structural primitives ---
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);  // 2-D
Tensor reshape(const Tensor& x, Shape shape);
Tensor broadcast_to(const Tensor& x, Shape shape);
/// Sum x down to a broadcast-compatible smaller shape (inverse of broadcast_to).
Tensor reduce_to(const Tensor& x, Shape shape);
/// Gather flat elements; index -1 reads zero. Linear, so exactly invertible
/// by scatter in the backward pass.
Tensor take(const Tensor& x, std::shared_ptr<const std::vector<int64_t>> idx, Shape out_shape);
Tensor concat0(const std::vector<Tensor>& xs);

// --- reductions ---
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Sum over the last axis, keeping it as size 1.
Tensor sum_last(const Tensor& x);
Tensor l2_norm(const Tensor& x);

// --- composed neural-net ops ---
Tensor softmax_last(const Tensor& x);
/// Normalizes over the last axis; gain/bias shaped like that axis.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
/// Row lookup: table is V x C, ids in [0, V); result is ids.size() x C.
Tensor embed(const Tensor& table, const std::vector<int64_t>& ids);
/// x: C_in x L, w: C_out x C_in x K (K odd), b: C_out. Same-length non-causal conv.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int64_t dilation = 1);
/// x: C_in x H x W, w: C_out x C_in x KH x KW (odd kernels), b: C_out.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int64_t stride = 1);
/// x: rows x C_in times W: C_in x C_out plus bias C_out.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);
/// Linearly resample the last axis of a C x L tensor to length w.
Tensor interp_linear(const Tensor& x, int64_t w);

}  // namespace svs

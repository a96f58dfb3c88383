#include "svs/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace svs {

namespace {

using detail::make_node;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (size_t i = 0; i < rank; ++i) {
    int64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    int64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                       shape_str(b));
    }
    out[i] = std::max(da, db);
  }
  return out;
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

// Elementwise binary primitive on already-identical shapes.
template <class Fwd, class Bwd>
Tensor ew2(const char* op, const Tensor& a, const Tensor& b, Fwd fwd, Bwd bwd) {
  std::vector<double> out(a.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = fwd(a.data()[i], b.data()[i]);
  return make_node(op, a.shape(), std::move(out), {a, b}, bwd);
}

}  // namespace

Tensor broadcast_to(const Tensor& x, Shape shape) {
  if (same_shape(x.shape(), shape)) return x;
  const Shape& in = x.shape();
  // validate
  broadcast_shape(in, shape, "broadcast_to");
  size_t rank = shape.size();
  if (in.size() > rank) throw ShapeError("broadcast_to: cannot drop dimensions");
  // strides of input aligned to output rank, 0 on broadcast axes
  std::vector<int64_t> stride(rank, 0);
  int64_t s = 1;
  for (size_t i = in.size(); i-- > 0;) {
    size_t o = i + (rank - in.size());
    stride[o] = (in[i] == 1 && shape[o] != 1) ? 0 : s;
    s *= in[i];
  }
  int64_t n = numel(shape);
  std::vector<double> out(static_cast<size_t>(n));
  std::vector<int64_t> ix(rank, 0);
  for (int64_t f = 0; f < n; ++f) {
    int64_t src = 0;
    for (size_t d = 0; d < rank; ++d) src += ix[d] * stride[d];
    out[static_cast<size_t>(f)] = x.data()[static_cast<size_t>(src)];
    for (size_t d = rank; d-- > 0;) {
      if (++ix[d] < shape[d]) break;
      ix[d] = 0;
    }
  }
  Shape in_shape = in;
  return make_node("broadcast", shape, std::move(out), {x},
                   [in_shape](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                     return {reduce_to(g, in_shape)};
                   });
}

Tensor reduce_to(const Tensor& x, Shape shape) {
  if (same_shape(x.shape(), shape)) return x;
  const Shape& in = x.shape();
  broadcast_shape(shape, in, "reduce_to");
  size_t rank = in.size();
  std::vector<int64_t> stride(rank, 0);
  int64_t s = 1;
  for (size_t i = shape.size(); i-- > 0;) {
    size_t o = i + (rank - shape.size());
    stride[o] = (shape[i] == 1 && in[o] != 1) ? 0 : s;
    s *= shape[i];
  }
  std::vector<double> out(static_cast<size_t>(numel(shape)), 0.0);
  std::vector<int64_t> ix(rank, 0);
  int64_t n = numel(in);
  for (int64_t f = 0; f < n; ++f) {
    int64_t dst = 0;
    for (size_t d = 0; d < rank; ++d) dst += ix[d] * stride[d];
    out[static_cast<size_t>(dst)] += x.data()[static_cast<size_t>(f)];
    for (size_t d = rank; d-- > 0;) {
      if (++ix[d] < in[d]) break;
      ix[d] = 0;
    }
  }
  Shape in_shape = in;
  return make_node("reduce", shape, std::move(out), {x},
                   [in_shape](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                     return {broadcast_to(g, in_shape)};
                   });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!same_shape(a.shape(), b.shape())) {
    Shape out = broadcast_shape(a.shape(), b.shape(), "add");
    return add(broadcast_to(a, out), broadcast_to(b, out));
  }
  return ew2("add", a, b, [](double x, double y) { return x + y; },
             [](const Tensor&, const Tensor& g) -> std::vector<Tensor> { return {g, g}; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (!same_shape(a.shape(), b.shape())) {
    Shape out = broadcast_shape(a.shape(), b.shape(), "mul");
    return mul(broadcast_to(a, out), broadcast_to(b, out));
  }
  Tensor ac = a, bc = b;
  return ew2("mul", a, b, [](double x, double y) { return x * y; },
             [ac, bc](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
               return {mul(g, bc), mul(g, ac)};
             });
}

Tensor neg(const Tensor& x) {
  std::vector<double> out(x.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = -x.data()[i];
  return make_node("neg", x.shape(), std::move(out), {x},
                   [](const Tensor&, const Tensor& g) -> std::vector<Tensor> { return {neg(g)}; });
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, neg(b)); }
Tensor div(const Tensor& a, const Tensor& b) { return mul(a, recip(b)); }

Tensor recip(const Tensor& x) {
  std::vector<double> out(x.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / x.data()[i];
  return make_node("recip", x.shape(), std::move(out), {x},
                   [](const Tensor& self, const Tensor& g) -> std::vector<Tensor> {
                     return {neg(mul(g, square(self)))};
                   });
}

Tensor exp_(const Tensor& x) {
  std::vector<double> out(x.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::exp(x.data()[i]);
  return make_node("exp", x.shape(), std::move(out), {x},
                   [](const Tensor& self, const Tensor& g) -> std::vector<Tensor> {
                     return {mul(g, self)};
                   });
}

Tensor log_(const Tensor& x) {
  std::vector<double> out(x.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::log(x.data()[i]);
  Tensor xc = x;
  return make_node("log", x.shape(), std::move(out), {x},
                   [xc](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                     return {mul(g, recip(xc))};
                   });
}

Tensor sqrt_(const Tensor& x) {
  std::vector<double> out(x.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(x.data()[i]);
  return make_node("sqrt", x.shape(), std::move(out), {x},
                   [](const Tensor& self, const Tensor& g) -> std::vector<Tensor> {
                     return {mul(g, mul_scalar(recip(self), 0.5))};
                   });
}

Tensor square(const Tensor& x) { return mul(x, x); }

Tensor tanh_(const Tensor& x) {
  std::vector<double> out(x.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x.data()[i]);
  return make_node("tanh", x.shape(), std::move(out), {x},
                   [](const Tensor& self, const Tensor& g) -> std::vector<Tensor> {
                     return {mul(g, sub(Tensor::full(self.shape(), 1.0), square(self)))};
                   });
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.data().size());
  for (size_t i = 0; i < out.size(); ++i) {
    double v = x.data()[i];
    out[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return make_node("sigmoid", x.shape(), std::move(out), {x},
                   [](const Tensor& self, const Tensor& g) -> std::vector<Tensor> {
                     return {mul(g, mul(self, sub(Tensor::full(self.shape(), 1.0), self)))};
                   });
}

Tensor silu(const Tensor& x) { return mul(x, sigmoid(x)); }

Tensor relu(const Tensor& x) { return leaky_relu(x, 0.0); }

Tensor leaky_relu(const Tensor& x, double slope) {
  std::vector<double> out(x.data().size());
  auto mask = std::make_shared<std::vector<double>>(x.data().size());
  for (size_t i = 0; i < out.size(); ++i) {
    bool pos = x.data()[i] >= 0.0;
    (*mask)[i] = pos ? 1.0 : slope;
    out[i] = x.data()[i] * (*mask)[i];
  }
  Shape shape = x.shape();
  return make_node("leaky_relu", x.shape(), std::move(out), {x},
                   [mask, shape](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                     // activation mask is piecewise-constant in x: treated as a
                     // constant factor under further differentiation
                     return {mul(g, Tensor::leaf(shape, *mask))};
                   });
}

Tensor add_scalar(const Tensor& x, double s) { return add(x, Tensor::scalar(s)); }
Tensor mul_scalar(const Tensor& x, double s) { return mul(x, Tensor::scalar(s)); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  }
  int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(static_cast<size_t>(m * n));
  Eigen::Map<const RowMat> ma(a.data().data(), m, k);
  Eigen::Map<const RowMat> mb(b.data().data(), k, n);
  Eigen::Map<RowMat> mo(out.data(), m, n);
  mo.noalias() = ma * mb;
  Tensor ac = a, bc = b;
  return make_node("matmul", {m, n}, std::move(out), {a, b},
                   [ac, bc](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                     return {matmul(g, transpose(bc)), matmul(transpose(ac), g)};
                   });
}

Tensor transpose(const Tensor& x) {
  if (x.shape().size() != 2) throw ShapeError("transpose: expected 2-D, got " + shape_str(x.shape()));
  int64_t r = x.dim(0), c = x.dim(1);
  std::vector<double> out(static_cast<size_t>(r * c));
  for (int64_t i = 0; i < r; ++i)
    for (int64_t j = 0; j < c; ++j)
      out[static_cast<size_t>(j * r + i)] = x.data()[static_cast<size_t>(i * c + j)];
  return make_node("transpose", {c, r}, std::move(out), {x},
                   [](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                     return {transpose(g)};
                   });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  Shape in = x.shape();
  return make_node("reshape", std::move(shape), x.data(), {x},
                   [in](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                     return {reshape(g, in)};
                   });
}

namespace {

// scatter-add: exact adjoint of take
Tensor scatter(const Tensor& s, std::shared_ptr<const std::vector<int64_t>> idx, Shape out_shape) {
  std::vector<double> out(static_cast<size_t>(numel(out_shape)), 0.0);
  for (size_t i = 0; i < idx->size(); ++i) {
    int64_t j = (*idx)[i];
    if (j >= 0) out[static_cast<size_t>(j)] += s.data()[i];
  }
  Shape in_shape = s.shape();
  return make_node("scatter", std::move(out_shape), std::move(out), {s},
                   [idx, in_shape](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                     return {take(g, idx, in_shape)};
                   });
}

}  // namespace

Tensor take(const Tensor& x, std::shared_ptr<const std::vector<int64_t>> idx, Shape out_shape) {
  if (static_cast<int64_t>(idx->size()) != numel(out_shape)) {
    throw ShapeError("take: index count does not match output shape " + shape_str(out_shape));
  }
  std::vector<double> out(idx->size());
  int64_t n = x.size();
  for (size_t i = 0; i < idx->size(); ++i) {
    int64_t j = (*idx)[i];
    if (j >= n) throw ShapeError("take: index out of range");
    out[i] = j < 0 ? 0.0 : x.data()[static_cast<size_t>(j)];
  }
  Shape in_shape = x.shape();
  return make_node("take", std::move(out_shape), std::move(out), {x},
                   [idx, in_shape](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                     return {scatter(g, idx, in_shape)};
                   });
}

Tensor concat0(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("concat0: no inputs");
  Shape tail(xs[0].shape().begin() + 1, xs[0].shape().end());
  int64_t rows = 0;
  for (const Tensor& x : xs) {
    Shape t(x.shape().begin() + 1, x.shape().end());
    if (t != tail) throw ShapeError("concat0: trailing dims differ");
    rows += x.dim(0);
  }
  Shape out_shape = xs[0].shape();
  out_shape[0] = rows;
  std::vector<double> out;
  out.reserve(static_cast<size_t>(numel(out_shape)));
  std::vector<int64_t> offsets;
  for (const Tensor& x : xs) {
    offsets.push_back(static_cast<int64_t>(out.size()));
    out.insert(out.end(), x.data().begin(), x.data().end());
  }
  std::vector<Shape> in_shapes;
  for (const Tensor& x : xs) in_shapes.push_back(x.shape());
  return make_node("concat0", out_shape, std::move(out), xs,
                   [offsets, in_shapes](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                     std::vector<Tensor> grads;
                     for (size_t i = 0; i < in_shapes.size(); ++i) {
                       int64_t n = numel(in_shapes[i]);
                       auto idx = std::make_shared<std::vector<int64_t>>();
                       idx->reserve(static_cast<size_t>(n));
                       for (int64_t j = 0; j < n; ++j) idx->push_back(offsets[i] + j);
                       grads.push_back(take(g, idx, in_shapes[i]));
                     }
                     return grads;
                   });
}

Tensor sum(const Tensor& x) { return reduce_to(x, {}); }

Tensor mean(const Tensor& x) { return mul_scalar(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor sum_last(const Tensor& x) {
  Shape s = x.shape();
  if (s.empty()) return x;
  s.back() = 1;
  return reduce_to(x, s);
}

Tensor l2_norm(const Tensor& x) { return sqrt_(add_scalar(sum(square(x)), 1e-12)); }

Tensor softmax_last(const Tensor& x) {
  // shift by the per-row max (constant; softmax is shift-invariant)
  Shape s = x.shape();
  int64_t n = s.empty() ? 1 : s.back();
  int64_t rows = x.size() / n;
  Shape mshape = s;
  if (!mshape.empty()) mshape.back() = 1;
  std::vector<double> mx(static_cast<size_t>(rows), -1e300);
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t j = 0; j < n; ++j)
      mx[static_cast<size_t>(r)] =
          std::max(mx[static_cast<size_t>(r)], x.data()[static_cast<size_t>(r * n + j)]);
  Tensor e = exp_(sub(x, Tensor::leaf(mshape, std::move(mx))));
  return div(e, sum_last(e));
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  int64_t n = x.shape().back();
  if (gain.size() != n || bias.size() != n) {
    throw ShapeError("layer_norm: gain/bias length must match last axis " + std::to_string(n));
  }
  Tensor mu = mul_scalar(sum_last(x), 1.0 / static_cast<double>(n));
  Tensor c = sub(x, mu);
  Tensor var = mul_scalar(sum_last(square(c)), 1.0 / static_cast<double>(n));
  Tensor norm = mul(c, recip(sqrt_(add_scalar(var, eps))));
  return add(mul(norm, gain), bias);
}

Tensor embed(const Tensor& table, const std::vector<int64_t>& ids) {
  if (table.shape().size() != 2) throw ShapeError("embed: table must be 2-D");
  int64_t v = table.dim(0), c = table.dim(1);
  auto idx = std::make_shared<std::vector<int64_t>>();
  idx->reserve(ids.size() * static_cast<size_t>(c));
  for (int64_t id : ids) {
    if (id < 0 || id >= v) {
      throw ShapeError("embed: id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(v));
    }
    for (int64_t j = 0; j < c; ++j) idx->push_back(id * c + j);
  }
  return take(table, idx, {static_cast<int64_t>(ids.size()), c});
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int64_t dilation) {
  if (x.shape().size() != 2 || w.shape().size() != 3) {
    throw ShapeError("conv1d: expected x C_in x L and w C_out x C_in x K, got " +
                     shape_str(x.shape()) + " / " + shape_str(w.shape()));
  }
  int64_t cin = x.dim(0), len = x.dim(1);
  int64_t cout = w.dim(0), k = w.dim(2);
  if (w.dim(1) != cin) {
    throw ShapeError("conv1d: channel mismatch x " + shape_str(x.shape()) + " vs w " +
                     shape_str(w.shape()));
  }
  int64_t half = dilation * (k - 1) / 2;
  auto idx = std::make_shared<std::vector<int64_t>>();
  idx->reserve(static_cast<size_t>(cin * k * len));
  for (int64_t c = 0; c < cin; ++c)
    for (int64_t kk = 0; kk < k; ++kk)
      for (int64_t l = 0; l < len; ++l) {
        int64_t src = l + dilation * kk - half;
        idx->push_back(src >= 0 && src < len ? c * len + src : -1);
      }
  Tensor col = take(x, idx, {cin * k, len});
  Tensor y = matmul(reshape(w, {cout, cin * k}), col);
  return add(y, reshape(b, {cout, 1}));
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int64_t stride) {
  if (x.shape().size() != 3 || w.shape().size() != 4) {
    throw ShapeError("conv2d: expected x C_in x H x W and w C_out x C_in x KH x KW, got " +
                     shape_str(x.shape()) + " / " + shape_str(w.shape()));
  }
  int64_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  int64_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != cin) {
    throw ShapeError("conv2d: channel mismatch x " + shape_str(x.shape()) + " vs w " +
                     shape_str(w.shape()));
  }
  int64_t ph = (kh - 1) / 2, pw = (kw - 1) / 2;
  int64_t oh = (h + 2 * ph - kh) / stride + 1;
  int64_t ow = (wd + 2 * pw - kw) / stride + 1;
  if (oh < 1 || ow < 1) {
    throw ShapeError("conv2d: input " + shape_str(x.shape()) + " too small for kernel/stride");
  }
  auto idx = std::make_shared<std::vector<int64_t>>();
  idx->reserve(static_cast<size_t>(cin * kh * kw * oh * ow));
  for (int64_t c = 0; c < cin; ++c)
    for (int64_t a = 0; a < kh; ++a)
      for (int64_t bb = 0; bb < kw; ++bb)
        for (int64_t i = 0; i < oh; ++i)
          for (int64_t j = 0; j < ow; ++j) {
            int64_t si = i * stride + a - ph;
            int64_t sj = j * stride + bb - pw;
            idx->push_back(si >= 0 && si < h && sj >= 0 && sj < wd ? (c * h + si) * wd + sj : -1);
          }
  Tensor col = take(x, idx, {cin * kh * kw, oh * ow});
  Tensor y = matmul(reshape(w, {cout, cin * kh * kw}), col);
  y = add(y, reshape(b, {cout, 1}));
  return reshape(y, {cout, oh, ow});
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add(matmul(x, w), b);
}

Tensor interp_linear(const Tensor& x, int64_t w) {
  if (x.shape().size() != 2) throw ShapeError("interp_linear: expected 2-D, got " + shape_str(x.shape()));
  int64_t c = x.dim(0), l = x.dim(1);
  auto lo = std::make_shared<std::vector<int64_t>>();
  auto hi = std::make_shared<std::vector<int64_t>>();
  std::vector<double> wlo(static_cast<size_t>(c * w)), whi(static_cast<size_t>(c * w));
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t j = 0; j < w; ++j) {
      double pos = w > 1 ? static_cast<double>(j) * (l - 1) / (w - 1) : (l - 1) / 2.0;
      int64_t p0 = static_cast<int64_t>(pos);
      int64_t p1 = std::min(p0 + 1, l - 1);
      double frac = pos - static_cast<double>(p0);
      lo->push_back(ch * l + p0);
      hi->push_back(ch * l + p1);
      wlo[static_cast<size_t>(ch * w + j)] = 1.0 - frac;
      whi[static_cast<size_t>(ch * w + j)] = frac;
    }
  Shape out_shape{c, w};
  return add(mul(take(x, lo, out_shape), Tensor::leaf(out_shape, std::move(wlo))),
             mul(take(x, hi, out_shape), Tensor::leaf(out_shape, std::move(whi))));
}

}  // namespace svs

#include "svs/gradcheck.hpp"

#include <cmath>

#include "svs/ops.hpp"

namespace svs {

GradcheckResult gradcheck(const std::string& name,
                          const std::function<Tensor(const std::vector<Tensor>&)>& fn,
                          std::vector<Tensor> inputs, double tol, double step) {
  // analytic gradients
  Tensor loss = fn(inputs);
  GradMap g = backward(loss);
  double worst = 0.0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (!inputs[i].requires_grad()) continue;
    std::vector<double> ad(static_cast<size_t>(inputs[i].size()), 0.0);
    if (g.contains(inputs[i])) ad = g.at(inputs[i]).data();
    for (int64_t j = 0; j < inputs[i].size(); ++j) {
      auto eval = [&](double delta) {
        std::vector<Tensor> probe;
        for (size_t k = 0; k < inputs.size(); ++k) {
          std::vector<double> d = inputs[k].data();
          if (k == i) d[static_cast<size_t>(j)] += delta;
          probe.push_back(Tensor::leaf(inputs[k].shape(), std::move(d), inputs[k].requires_grad()));
        }
        return fn(probe).item();
      };
      double fd = (eval(step) - eval(-step)) / (2.0 * step);
      double a = ad[static_cast<size_t>(j)];
      double rel = std::fabs(a - fd) / std::max({1.0, std::fabs(a), std::fabs(fd)});
      worst = std::max(worst, rel);
    }
  }
  return {name, worst, worst < tol};
}

namespace {

Tensor rnd(Shape shape, std::mt19937_64& rng, bool rg = true) {
  return Tensor::randn(std::move(shape), rng, 1.0, rg);
}

}  // namespace

std::vector<GradcheckResult> gradcheck_primitives(const std::string& filter, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradcheckResult> out;
  auto run = [&](const std::string& name, std::vector<Tensor> inputs,
                 std::function<Tensor(const std::vector<Tensor>&)> fn) {
    if (!filter.empty() && name.find(filter) == std::string::npos) return;
    out.push_back(gradcheck(name, fn, std::move(inputs)));
  };

  run("add", {rnd({3, 4}, rng), rnd({3, 4}, rng)},
      [](const std::vector<Tensor>& v) { return sum(mul(add(v[0], v[1]), v[0])); });
  run("add_broadcast", {rnd({3, 1}, rng), rnd({3, 4}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(add(v[0], v[1]))); });
  run("mul", {rnd({2, 5}, rng), rnd({2, 5}, rng)},
      [](const std::vector<Tensor>& v) { return sum(mul(v[0], v[1])); });
  run("matmul", {rnd({3, 4}, rng), rnd({4, 2}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(matmul(v[0], v[1]))); });
  run("conv1d", {rnd({2, 7}, rng), rnd({3, 2, 3}, rng), rnd({3}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(conv1d(v[0], v[1], v[2], 2))); });
  run("conv2d", {rnd({2, 6, 5}, rng), rnd({3, 2, 3, 3}, rng), rnd({3}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(conv2d(v[0], v[1], v[2], 2))); });
  run("tanh", {rnd({4}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(tanh_(v[0]))); });
  run("sigmoid", {rnd({4}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(sigmoid(v[0]))); });
  run("silu", {rnd({4}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(silu(v[0]))); });
  run("softmax", {rnd({3, 5}, rng)},
      [](const std::vector<Tensor>& v) {
        return sum(mul(softmax_last(v[0]), square(v[0])));
      });
  run("layer_norm", {rnd({3, 6}, rng), rnd({6}, rng), rnd({6}, rng)},
      [](const std::vector<Tensor>& v) {
        return sum(square(layer_norm(v[0], v[1], v[2])));
      });
  run("sum", {rnd({2, 3, 2}, rng)},
      [](const std::vector<Tensor>& v) { return square(sum(v[0])); });
  run("mean", {rnd({2, 3}, rng)},
      [](const std::vector<Tensor>& v) { return square(mean(v[0])); });
  run("square", {rnd({5}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(v[0])); });
  {
    // keep sqrt inputs well away from 0
    std::vector<double> d(6);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (double& x : d) x = u(rng);
    run("sqrt", {Tensor::leaf({6}, d, true)},
        [](const std::vector<Tensor>& v) { return sum(sqrt_(v[0])); });
  }
  run("l2_norm", {rnd({7}, rng)},
      [](const std::vector<Tensor>& v) { return l2_norm(v[0]); });
  run("embed", {rnd({5, 3}, rng)},
      [](const std::vector<Tensor>& v) {
        return sum(square(embed(v[0], {1, 4, 1, 0})));
      });
  run("reshape", {rnd({2, 6}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(reshape(v[0], {3, 4}))); });
  run("broadcast", {rnd({1, 4}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(broadcast_to(v[0], {3, 4}))); });
  run("transpose", {rnd({3, 4}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(matmul(transpose(v[0]), v[0]))); });
  run("concat0", {rnd({2, 3}, rng), rnd({1, 3}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(concat0({v[0], v[1]}))); });
  run("interp_linear", {rnd({2, 5}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(interp_linear(v[0], 9))); });
  run("leaky_relu", {rnd({8}, rng)},
      [](const std::vector<Tensor>& v) { return sum(square(leaky_relu(v[0], 0.2))); });
  run("recip", {rnd({4}, rng)},
      [](const std::vector<Tensor>& v) { return sum(recip(add_scalar(square(v[0]), 1.0))); });
  run("exp", {rnd({4}, rng)},
      [](const std::vector<Tensor>& v) { return sum(exp_(v[0])); });
  return out;
}

GradcheckResult gradcheck_gradient_penalty(uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  Tensor w1 = Tensor::randn({6, 4}, rng, 0.5, true);
  Tensor b1 = Tensor::randn({4}, rng, 0.1, true);
  Tensor w2 = Tensor::randn({4, 1}, rng, 0.5, true);
  Tensor x_data = Tensor::randn({1, 6}, rng);

  auto penalty = [&x_data](const std::vector<Tensor>& v) {
    Tensor x = Tensor::leaf(x_data.shape(), x_data.data(), true);
    Tensor h = tanh_(linear(x, v[0], v[1]));
    Tensor d = matmul(h, v[2]);
    Tensor gx = grad(reshape(d, {}), x);
    return square(add_scalar(l2_norm(gx), -1.0));
  };
  GradcheckResult r = gradcheck("gradient_penalty_double_backprop", penalty, {w1, b1, w2},
                                tol, 1e-5);
  return r;
}

}  // namespace svs

#include <doctest.h>

#include <cmath>

#include "svs/gradcheck.hpp"
#include "svs/ops.hpp"
#include "svs/tensor.hpp"

using namespace svs;

TEST_CASE("elementwise forward values") {
  Tensor a = Tensor::leaf({2}, {1, 2});
  Tensor b = Tensor::leaf({2}, {3, 4});
  Tensor c = add(a, b);
  CHECK(c.data()[0] == 4.0);
  CHECK(c.data()[1] == 6.0);

  CHECK(silu(Tensor::scalar(0.0)).item() == 0.0);
  CHECK(silu(Tensor::scalar(2.0)).item() ==
        doctest::Approx(2.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
}

TEST_CASE("matmul identity") {
  std::mt19937_64 rng(11);
  Tensor a = Tensor::randn({3, 3}, rng);
  std::vector<double> id(9, 0.0);
  id[0] = id[4] = id[8] = 1.0;
  Tensor y = matmul(Tensor::leaf({3, 3}, id), a);
  for (int i = 0; i < 9; ++i) CHECK(y.data()[i] == doctest::Approx(a.data()[i]).epsilon(1e-15));
}

TEST_CASE("shape mismatch names operation and shapes") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 5});
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("matmul"), ShapeError);
  CHECK_THROWS_WITH_AS(add(a, b), doctest::Contains("[2,3]"), ShapeError);
}

TEST_CASE("non-finite values are reported, not propagated") {
  Tensor z = Tensor::zeros({2});
  CHECK_THROWS_AS(recip(z), NumericError);
  CHECK_THROWS_AS(Tensor::leaf({1}, {std::nan("")}), NumericError);
}

TEST_CASE("backward of sum of squares") {
  Tensor x = Tensor::leaf({3}, {1, 2, 3}, true);
  GradMap g = backward(sum(square(x)));
  const Tensor& gx = g.at(x);
  CHECK(gx.data()[0] == doctest::Approx(2.0));
  CHECK(gx.data()[1] == doctest::Approx(4.0));
  CHECK(gx.data()[2] == doctest::Approx(6.0));
}

TEST_CASE("backward requires scalar loss") {
  Tensor x = Tensor::leaf({3}, {1, 2, 3}, true);
  CHECK_THROWS_AS(backward(square(x)), AutodiffError);
}

TEST_CASE("backward twice on the same graph is an error") {
  Tensor x = Tensor::leaf({2}, {1, 2}, true);
  Tensor loss = sum(square(x));
  backward(loss);
  CHECK_THROWS_AS(backward(loss), AutodiffError);
}

TEST_CASE("orthonormal map preserves gradient norm of l2 objective") {
  // W = 2-D rotation; grad_x ||Wx|| = W^T Wx / ||Wx|| has unit norm
  double th = 0.83;
  Tensor w = Tensor::leaf({2, 2}, {std::cos(th), -std::sin(th), std::sin(th), std::cos(th)});
  Tensor x = Tensor::leaf({2, 1}, {0.7, -1.4}, true);
  GradMap g = backward(l2_norm(matmul(w, x)));
  const auto& d = g.at(x).data();
  CHECK(std::sqrt(d[0] * d[0] + d[1] * d[1]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("every primitive passes finite-difference gradcheck") {
  for (const auto& r : gradcheck_primitives()) {
    INFO(r.name, " max rel err ", r.max_rel_err);
    CHECK(r.passed);
  }
}

TEST_CASE("second derivative of x^3 at x=2") {
  Tensor x = Tensor::leaf({}, {2.0}, true);
  Tensor f = mul(x, mul(x, x));
  Tensor g1 = grad(f, x);
  Tensor g2 = grad(g1, x);
  CHECK(g2.item() == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("grad of grad of a linear map is zero") {
  Tensor x = Tensor::leaf({}, {1.5}, true);
  Tensor f = add_scalar(mul_scalar(x, 3.0), 1.0);
  Tensor g1 = grad(f, x);
  CHECK(g1.item() == doctest::Approx(3.0));
  // g1 has no dependence on x; grad reports it unreachable
  CHECK_THROWS_AS(grad(g1, x), AutodiffError);
}

TEST_CASE("gradient penalty double-backprop matches finite differences") {
  GradcheckResult r = gradcheck_gradient_penalty();
  INFO("max rel err ", r.max_rel_err);
  CHECK(r.passed);
}

TEST_CASE("gradcheck reports a corrupted backward rule") {
  // negative control: a "square" whose backward pretends d/dx = x
  auto bad_square = [](const std::vector<Tensor>& v) {
    const Tensor& x = v[0];
    std::vector<double> out(x.data().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * x.data()[i];
    Tensor xc = x;
    Tensor y = detail::make_node(
        "bad_square", x.shape(), std::move(out), {x},
        [xc](const Tensor&, const Tensor& g) -> std::vector<Tensor> { return {mul(g, xc)}; });
    return sum(y);
  };
  std::mt19937_64 rng(3);
  auto r = gradcheck("bad_square", bad_square, {Tensor::randn({4}, rng, 1.0, true)});
  CHECK_FALSE(r.passed);
}

TEST_CASE("detach cuts the graph") {
  Tensor x = Tensor::leaf({2}, {1, 2}, true);
  Tensor y = sum(square(x).detach());
  CHECK_FALSE(y.requires_grad());
}

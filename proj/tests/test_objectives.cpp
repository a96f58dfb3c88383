#include <random>

#include "doctest.h"
#include "svs/objectives.hpp"

using namespace svs;

TEST_CASE("duration and reconstruction loss oracles") {
  Tensor pred = Tensor::leaf({3}, {1.0, 2.0, 3.0});
  CHECK(duration_loss(pred, {1, 1, 1}).item() == doctest::Approx((0.0 + 1.0 + 4.0) / 3.0));
  CHECK_THROWS_AS(duration_loss(pred, {1, 1}), ShapeError);

  Tensor a = Tensor::leaf({2, 2}, {1.0, -2.0, 0.5, 3.0});
  Tensor b = Tensor::leaf({2, 2}, {0.0, 1.0, 0.5, 1.0});
  CHECK(recon_loss(a, b).item() == doctest::Approx((1.0 + 3.0 + 0.0 + 2.0) / 4.0));
  CHECK(recon_loss(a, a).item() == doctest::Approx(0.0));
}

TEST_CASE("wasserstein loss is -mean(real)+mean(fake), order-invariant") {
  std::vector<Tensor> real{Tensor::scalar(3.0), Tensor::scalar(1.0)};
  std::vector<Tensor> fake{Tensor::scalar(0.5), Tensor::scalar(-1.5)};
  CHECK(wasserstein_loss(real, fake).item() == doctest::Approx(-2.0 + (-0.5)));
  std::vector<Tensor> real_r{real[1], real[0]};
  std::vector<Tensor> fake_r{fake[1], fake[0]};
  CHECK(wasserstein_loss(real_r, fake_r).item() ==
        doctest::Approx(wasserstein_loss(real, fake).item()));
}

TEST_CASE("generator adversarial sign convention") {
  std::vector<Tensor> fake{Tensor::scalar(2.0), Tensor::scalar(4.0)};
  CHECK(generator_adv_loss(fake, false).item() == doctest::Approx(-3.0));
  CHECK(generator_adv_loss(fake, true).item() == doctest::Approx(3.0));
}

TEST_CASE("interpolation stays on the chord and requires grad") {
  std::mt19937_64 rng(3);
  Tensor r = Tensor::randn({4, 5}, rng);
  Tensor f = Tensor::randn({4, 5}, rng);
  Tensor m = interpolate_pair(r, f, 0.25);
  CHECK(m.requires_grad());
  for (size_t i = 0; i < m.data().size(); ++i) {
    CHECK(m.data()[i] == doctest::Approx(0.25 * r.data()[i] + 0.75 * f.data()[i]).epsilon(1e-12));
  }
  CHECK(interpolate_pair(r, f, 1.0).data() == r.data());
  CHECK(interpolate_pair(r, f, 0.0).data() == f.data());
  CHECK_THROWS_AS(interpolate_pair(r, f, 1.5), NumericError);
}

TEST_CASE("gradient penalty oracles on linear and constant critics") {
  std::mt19937_64 rng(9);
  int64_t n = 16;
  Tensor w = Tensor::randn({n, 1}, rng);
  double norm = 0.0;
  for (double v : w.data()) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<double> wn(w.data());
  for (double& v : wn) v /= norm;
  Tensor w_unit = Tensor::leaf({n, 1}, wn, true);

  Tensor x = Tensor::randn({1, n}, rng, 1.0, true);
  // unit-norm linear critic: the penalty vanishes
  Tensor d1 = reshape(matmul(x, w_unit), {});
  CHECK(gradient_penalty(d1, x).item() <= 1e-10);
  // doubled critic: (2-1)^2 = 1
  Tensor x2 = Tensor::randn({1, n}, rng, 1.0, true);
  Tensor d2 = reshape(mul_scalar(matmul(x2, w_unit), 2.0), {});
  CHECK(gradient_penalty(d2, x2).item() == doctest::Approx(1.0).epsilon(1e-9));
  // constant critic: gradient is zero, penalty (0-1)^2 = 1
  Tensor x3 = Tensor::randn({1, n}, rng, 1.0, true);
  Tensor d3 = mul(sum(x3), Tensor::scalar(0.0));
  CHECK(gradient_penalty(d3, x3).item() == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("gradient penalty backpropagates into critic weights") {
  std::mt19937_64 rng(11);
  int64_t n = 6, h = 4;
  Tensor w1 = Tensor::randn({n, h}, rng, 0.5, true);
  Tensor w2 = Tensor::randn({h, 1}, rng, 0.5, true);
  Tensor x = Tensor::randn({1, n}, rng, 1.0, true);
  Tensor d = reshape(matmul(tanh_(matmul(x, w1)), w2), {});
  Tensor gp = gradient_penalty(d, x);
  GradMap g = backward(gp);
  REQUIRE(g.contains(w1));
  REQUIRE(g.contains(w2));
  double s1 = 0.0, s2 = 0.0;
  for (double v : g.at(w1).data()) s1 += std::abs(v);
  for (double v : g.at(w2).data()) s2 += std::abs(v);
  CHECK(s1 > 0.0);
  CHECK(s2 > 0.0);
}

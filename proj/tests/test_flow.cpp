#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>
#include <vector>

#include "fbmflow/fbm.hpp"
#include "fbmflow/fields.hpp"
#include "fbmflow/flow.hpp"

using namespace fbmflow;
using namespace fbmflow::flow;

TEST_CASE("analytic constants of the built-in fields") {
  const auto c = make_field("constant:sigma=-0.7,n=2");
  CHECK(c.dimension() == 2);
  CHECK(c.constants(0).sup == 0.7);
  CHECK(c.constants(0).lipschitz == 0.0);
  CHECK(c.constants(0).derivative_lipschitz == 0.0);

  const auto s = make_field("sine:A=1,omega=1;0,phi=0");
  CHECK(s.constants(0).sup == 1.0);
  CHECK(s.constants(0).lipschitz == 1.0);
  CHECK(s.constants(0).derivative_lipschitz == 1.0);
  CHECK(s.conforming());

  const auto l = make_field("linear_test:lambda=1");
  CHECK_FALSE(l.conforming());

  CHECK(make_field("zero:n=3,channels=2").is_zero());
  CHECK_THROWS_AS(make_field("spiral:n=2"), std::invalid_argument);
  CHECK_THROWS_AS(make_field("sine:A=0"), std::invalid_argument);
  CHECK_THROWS_AS(make_field("sine:A=1,colour=red"), std::invalid_argument);
}

TEST_CASE("constants bound the fields at random probes and are nearly attained") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-4, 4);
  for (const char* key : {"sine:A=0.3,omega=2;-1;0.5,phi=0.1,channels=3", "gaussian_bump:A=1.5,sigma=0.7,n=3,channels=2"}) {
    const auto f = make_field(key);
    const std::size_t n = f.dimension();
    for (std::size_t c = 0; c < f.channel_count(); ++c) {
      const auto k = f.constants(c);
      double sup = 0.0, lip = 0.0;
      for (int t = 0; t < 20000; ++t) {
        std::vector<double> x(n), y(n), ux(n), uy(n), jx(n * n), jy(n * n);
        for (auto& v : x) v = u(gen);
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.05 * u(gen);
        f.evaluate(c, x, ux, jx);
        f.evaluate(c, y, uy, jy);
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += (x[i] - y[i]) * (x[i] - y[i]);
        d = std::sqrt(d);
        for (std::size_t i = 0; i < n; ++i) {
          REQUIRE(std::abs(ux[i]) <= k.sup + 1e-12);
          REQUIRE(std::abs(ux[i] - uy[i]) <= k.lipschitz * d + 1e-12);
          for (std::size_t j = 0; j < n; ++j)
            REQUIRE(std::abs(jx[i * n + j] - jy[i * n + j]) <= k.derivative_lipschitz * d + 1e-12);
          sup = std::max(sup, std::abs(ux[i]));
          lip = std::max(lip, std::abs(ux[i] - uy[i]) / d);
        }
      }
      CHECK(sup > 0.9 * k.sup);
      CHECK(lip > 0.8 * k.lipschitz);
    }
  }
}

TEST_CASE("jacobians match central differences") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-2, 2);
  for (const char* key : {"sine:A=0.5,omega=1;2,phi=0.3,channels=2", "gaussian_bump:A=1,sigma=0.8", "linear_test:lambda=0.7,n=2"}) {
    const auto f = make_field(key);
    const std::size_t n = f.dimension();
    for (int t = 0; t < 50; ++t) {
      std::vector<double> x(n), jac(n * n), up(n), um(n);
      for (auto& v : x) v = u(gen);
      for (std::size_t c = 0; c < f.channel_count(); ++c) {
        f.jacobian(c, x, jac);
        for (std::size_t j = 0; j < n; ++j) {
          auto xp = x, xm = x;
          xp[j] += 1e-5;
          xm[j] -= 1e-5;
          f.value(c, xp, up);
          f.value(c, xm, um);
          for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs((up[i] - um[i]) / 2e-5 - jac[i * n + j]) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("zero and constant fields") {
  const auto path = fbm::sample_paths(fbm::TimeGrid(1.0, 256), 0.75, 1, 3);
  const std::vector<double> x0{0.3, -1.0};
  const auto zero = integrate_with_tangent(make_field("zero:n=2"), path, x0, 1, std::vector<double>{1.0, 2.0});
  for (std::size_t k = 0; k < zero.flow.nodes(); ++k) {
    CHECK(zero.flow.state(k)[0] == 0.3);
    CHECK(zero.flow.state(k)[1] == -1.0);
    CHECK(zero.tangent.vector(k)[1] == 2.0);
  }
  const auto c = integrate_with_tangent(make_field("constant:sigma=0.5,n=2"), path, x0);
  for (std::size_t k = 0; k < c.flow.nodes(); ++k) {
    CHECK(c.flow.state(k)[0] == doctest::Approx(0.3 + 0.5 * path.channel(0)[k]).epsilon(1e-14));
    CHECK(c.flow.state(k)[1] == -1.0);
    CHECK(c.tangent.jacobian(k)[0] == 1.0);
    CHECK(c.tangent.jacobian(k)[1] == 0.0);
  }
}

TEST_CASE("linear field reproduces the Euler product") {
  const auto path = fbm::sample_paths(fbm::TimeGrid(1.0, 512), 0.75, 1, 4);
  const double x0 = 1.3, lambda = 0.8;
  const auto sol = integrate_with_tangent(make_field("linear_test:lambda=0.8"), path, std::span(&x0, 1), 1,
                                          std::vector<double>{2.0});
  double prod = 1.0;
  for (std::size_t k = 0; k < 512; ++k) prod *= 1.0 + lambda * path.increment(0, k);
  CHECK(sol.flow.state(512)[0] == doctest::Approx(x0 * prod).epsilon(1e-12));
  CHECK(sol.tangent.vector(512)[0] == doctest::Approx(2.0 * prod).epsilon(1e-12));
  // The Euler product converges to the exponential closed form.
  CHECK(sol.tangent.vector(512)[0] == doctest::Approx(2.0 * std::exp(lambda * path.channel(0)[512])).epsilon(0.05));
}

TEST_CASE("solving in two halves equals one solve") {
  const auto field = make_field("sine:A=0.4,omega=1;1.5,channels=2");
  const auto path = fbm::sample_paths(fbm::TimeGrid(1.0, 400), 0.7, 2, 6);
  const std::vector<double> x0{0.1, 0.2};
  const auto whole = integrate_flow(field, path, x0);
  const auto first = integrate_flow(field, path, x0, 1, 0, 200);
  const std::vector<double> mid(first.state(200).begin(), first.state(200).end());
  const auto second = integrate_flow(field, path, mid, 1, 200, 400);
  CHECK(second.times.front() == whole.times[200]);
  for (std::size_t i = 0; i < 2; ++i) CHECK(second.state(200)[i] == whole.state(400)[i]);
}

TEST_CASE("jacobian matches finite differences of the flow map") {
  const auto field = make_field("sine:A=0.5,omega=1;2,phi=0.2,channels=2");
  const auto path = fbm::sample_paths(fbm::TimeGrid(1.0, 256), 0.75, 2, 7);
  const std::vector<double> x0{0.4, -0.3};
  const auto sol = integrate_with_tangent(field, path, x0);
  const double h = 1e-5;
  for (std::size_t j = 0; j < 2; ++j) {
    auto xp = x0, xm = x0;
    xp[j] += h;
    xm[j] -= h;
    const auto fp = integrate_flow(field, path, xp), fm = integrate_flow(field, path, xm);
    for (std::size_t k : {64, 256})
      for (std::size_t i = 0; i < 2; ++i)
        CHECK((fp.state(k)[i] - fm.state(k)[i]) / (2 * h) ==
              doctest::Approx(sol.tangent.jacobian(k)[i * 2 + j]).epsilon(1e-6));
  }
}

TEST_CASE("jacobian determinant stays positive for the sine field") {
  const auto field = make_field("sine:A=0.2,omega=1;1");
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto path = fbm::sample_paths(fbm::TimeGrid(1.0, 1024), 0.75, 1, seed);
    const auto sol = integrate_with_tangent(field, path, std::vector<double>{0.5, 0.5});
    for (std::size_t k = 0; k < sol.tangent.nodes(); ++k) {
      const auto J = sol.tangent.jacobian(k);
      REQUIRE(J[0] * J[3] - J[1] * J[2] > 0.0);
    }
  }
}

TEST_CASE("tangent along a given trajectory equals the joint solve") {
  const auto field = make_field("gaussian_bump:A=1,sigma=0.5");
  const auto path = fbm::sample_paths(fbm::TimeGrid(1.0, 128), 0.8, 1, 8);
  const std::vector<double> x0{0.2, 0.1}, v0{1.0, -1.0};
  const auto joint = integrate_with_tangent(field, path, x0, 1, v0);
  const auto tan = integrate_tangent(field, path, integrate_flow(field, path, x0), v0);
  CHECK(tan.jacobians == joint.tangent.jacobians);
  CHECK(tan.vectors == joint.tangent.vectors);
  CHECK(tan.jacobian(0)[0] == 1.0);
  CHECK(tan.vector(0)[1] == -1.0);
}

TEST_CASE("refinement records every r-th node of the fine path") {
  const auto field = make_field("sine:A=0.3,omega=2;1");
  const auto path = fbm::sample_paths(fbm::TimeGrid(1.0, 256), 0.7, 1, 9);
  const std::vector<double> x0{0.0, 0.0};
  const auto coarse = integrate_flow(field, path, x0, 4);
  const auto fine = integrate_flow(field, path, x0, 1);
  REQUIRE(coarse.nodes() == 65);
  for (std::size_t k = 0; k <= 64; ++k) CHECK(coarse.state(k)[1] == fine.state(4 * k)[1]);
  CHECK_THROWS_AS(integrate_flow(field, path, x0, 3), std::invalid_argument);
}

TEST_CASE("bad inputs and divergence") {
  const auto path = fbm::sample_paths(fbm::TimeGrid(1.0, 64), 0.7, 2, 10);
  const std::vector<double> x0{0.0, 0.0};
  CHECK_THROWS_AS(integrate_flow(make_field("sine:A=1"), path, x0), std::invalid_argument);
  CHECK_THROWS_AS(integrate_flow(make_field("sine:A=1,channels=2"), path, std::vector<double>{1.0}),
                  std::invalid_argument);
  const auto one = fbm::sample_paths(fbm::TimeGrid(1.0, 64), 0.7, 1, 10);
  const double big = 1e300;
  try {
    integrate_flow(make_field("linear_test:lambda=1e300"), one, std::span(&big, 1));
    FAIL("expected divergence");
  } catch (const FlowDivergence& e) {
    CHECK(e.step() == 0);
  }
}

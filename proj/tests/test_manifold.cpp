#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <random>
#include <vector>

#include "fbmflow/fbm.hpp"
#include "fbmflow/fields.hpp"
#include "fbmflow/flow.hpp"
#include "fbmflow/manifold.hpp"

using namespace fbmflow;
using namespace fbmflow::geometry;

constexpr double kPi = std::numbers::pi;

TEST_CASE("reference measures of the built-in meshes") {
  CHECK(std::abs(make_manifold("circle:r=1,n=2", 1000).total_weight() - 2 * kPi) < 1e-6);
  CHECK(make_manifold("segment:length=1,n=3", 77).total_weight() == doctest::Approx(1.0).epsilon(1e-15));
  const auto sphere = make_manifold("sphere:r=1,n=3", 10000);
  CHECK(sphere.total_weight() == doctest::Approx(4 * kPi).epsilon(1e-3));
  CHECK(sphere.intrinsic_dim == 2);
  const auto torus = make_manifold("torus:r1=2,r2=0.5", 2000);
  CHECK(torus.total_weight() == doctest::Approx(4 * kPi * kPi).epsilon(1e-12));
  CHECK(make_manifold("circle:r=2,n=4", 10).ambient_dim == 4);
  CHECK_THROWS_AS(make_manifold("blob", 10), std::invalid_argument);
  CHECK_THROWS_AS(make_manifold("sphere:n=2", 10), std::invalid_argument);
}

TEST_CASE("frames are orthonormal and tangent") {
  for (const char* key : {"circle:r=1.5,n=3", "sphere:r=2,n=3", "torus:r1=3,r2=1", "segment:length=2,n=2"}) {
    const auto mesh = make_manifold(key, 400);
    const std::size_t m = mesh.intrinsic_dim, n = mesh.ambient_dim;
    for (std::size_t q = 0; q < mesh.size(); ++q) {
      const auto f = mesh.frame(q);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          double d = 0.0;
          for (std::size_t c = 0; c < n; ++c) d += f[i * n + c] * f[j * n + c];
          REQUIRE(std::abs(d - (i == j ? 1.0 : 0.0)) < 1e-10);
        }
      REQUIRE(mesh.weights[q] > 0.0);
    }
  }
}

TEST_CASE("gram volume examples") {
  const std::vector<double> ortho{1, 0, 0, 0, 1, 0};
  CHECK(gram_volume(ortho, 2, 3) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> twice{0, 2, 0};
  CHECK(gram_volume(twice, 1, 3) == doctest::Approx(2.0).epsilon(1e-15));
  const std::vector<double> skew{1, 0, 0, 1, 1, 0};
  CHECK(gram_volume(skew, 2, 3) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> dependent{1, 2, 3, 2, 4, 6};
  CHECK(gram_volume(dependent, 2, 3) < 1e-7);
  CHECK(gram_hadamard_check(ortho, 2, 3));
  CHECK(gram_hadamard_check(dependent, 2, 3));
  CHECK(hadamard_product_bound(skew, 2, 3) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("gram volume ignores order and sign of the frame vectors") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  std::vector<double> v(3 * 5);
  for (auto& x : v) x = z(gen);
  std::vector<double> w(v.size());
  const std::size_t perm[] = {2, 0, 1};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 5; ++c) w[i * 5 + c] = (i == 1 ? -1.0 : 1.0) * v[perm[i] * 5 + c];
  CHECK(gram_volume(w, 3, 5) == doctest::Approx(gram_volume(v, 3, 5)).epsilon(1e-12));
}

TEST_CASE("gram majorisation holds on random frames") {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> scale(-3, 3);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t m = 1 + t % 4, n = m + 1 + (t / 4) % 3;
    std::vector<double> v(m * n);
    for (std::size_t i = 0; i < m; ++i) {
      const double s = std::pow(10.0, scale(gen));
      for (std::size_t c = 0; c < n; ++c) v[i * n + c] = s * z(gen);
    }
    REQUIRE(gram_hadamard_check(v, m, n));
    REQUIRE(gram_volume(v, m, n) <= hadamard_product_bound(v, m, n) * (1 + 1e-12));
  }
}

TEST_CASE("synthetic jacobians") {
  const auto circle = make_circle(1.0, 2, 1000);
  const double doubled = hausdorff_measure(circle, [](std::size_t, std::span<double> j) {
    j[0] = 2, j[1] = 0, j[2] = 0, j[3] = 2;
  });
  CHECK(doubled == doctest::Approx(4 * kPi).epsilon(1e-6));
  const auto sphere = make_sphere(1.0, 3, 2000);
  // Rotation about an oblique axis (Rodrigues).
  const double th = 1.1, a[3] = {1 / std::sqrt(3.0), 1 / std::sqrt(3.0), 1 / std::sqrt(3.0)};
  const auto rot = [&](std::size_t, std::span<double> j) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        const double k = (r == c ? std::cos(th) : 0.0) + (1 - std::cos(th)) * a[r] * a[c];
        const double cross = r == c ? 0.0 : ((c - r + 3) % 3 == 1 ? -1.0 : 1.0) * a[3 - r - c] * std::sin(th);
        j[r * 3 + c] = k + cross;
      }
  };
  CHECK(std::abs(hausdorff_measure(sphere, rot) - sphere.total_weight()) < 1e-12);
}

TEST_CASE("quadrature is consistent under refinement") {
  // J = diag(1, 3) stretches the circle into an ellipse with semi-axes 1 and 3.
  const auto stretch = [](std::size_t, std::span<double> j) { j[0] = 1, j[1] = 0, j[2] = 0, j[3] = 3; };
  const double coarse = hausdorff_measure(make_circle(1.0, 2, 200), stretch);
  const double fine = hausdorff_measure(make_circle(1.0, 2, 400), stretch);
  const double ellipse = 13.364893220555258;  // 4 * 3 * E(1 - 1/9), complete elliptic integral
  CHECK(std::abs(coarse - fine) / fine < 1e-6);
  CHECK(fine == doctest::Approx(ellipse).epsilon(1e-8));
}

TEST_CASE("measure under the flow") {
  const auto circle = make_circle(1.0, 2, 64);
  const auto path = fbm::sample_paths(fbm::TimeGrid(1.0, 128), 0.75, 1, 12);
  auto tangents_for = [&](const char* key) {
    const auto f = flow::make_field(key);
    std::vector<flow::TangentTrajectory> t;
    for (std::size_t q = 0; q < circle.size(); ++q)
      t.push_back(flow::integrate_with_tangent(f, path, circle.point(q)).tangent);
    return t;
  };
  for (const char* key : {"zero:n=2", "constant:sigma=0.7,n=2"}) {
    const auto curve = measure_curve(circle, tangents_for(key));
    for (double v : curve.measure) CHECK(v == doctest::Approx(2 * kPi).epsilon(1e-13));
  }
  const auto t = tangents_for("sine:A=0.4,omega=1;1");
  CHECK(hausdorff_measure(circle, t, 0) == doctest::Approx(circle.total_weight()).epsilon(1e-15));
  CHECK(hausdorff_measure(circle, t, 128) != doctest::Approx(circle.total_weight()));
  CHECK_THROWS_AS(hausdorff_measure(circle, std::span(t).subspan(1), 0), std::invalid_argument);
}

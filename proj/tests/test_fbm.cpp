#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <filesystem>
#include <vector>

#include "fbmflow/fbm.hpp"
#include "fbmflow/rng.hpp"

using namespace fbmflow;
using namespace fbmflow::fbm;

TEST_CASE("covariance examples") {
  for (double h : {0.3, 0.5, 0.75}) CHECK(fbm_covariance(1, 1, h) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fbm_covariance(1, 2, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fbm_covariance(1, 2, 0.75) == doctest::Approx(1.4142135623730951).epsilon(1e-15));
  CHECK(fbm_covariance(0.3, 1.7, 0.8) == fbm_covariance(1.7, 0.3, 0.8));
  CHECK_THROWS_AS(fbm_covariance(1, 1, 1.0), std::domain_error);
  CHECK_THROWS_AS(fbm_covariance(-1, 1, 0.5), std::domain_error);
}

TEST_CASE("time grid endpoints") {
  const TimeGrid g(0.7, 3);
  CHECK(g.time(0) == 0.0);
  CHECK(g.time(3) == 0.7);
  CHECK_THROWS(TimeGrid(1.0, 1));
}

TEST_CASE("cholesky factor reproduces the target covariance") {
  for (std::size_t n : {64, 1024}) {
    const TimeGrid grid(1.0, n);
    const Sampler s(grid, 0.75);
    const auto L = s.increment_factor();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= j; ++k) g += L[i * n + k] * L[j * n + k];
        const double target = fgn_autocovariance(i - j, 0.75);
        num += (g - target) * (g - target);
        den += target * target;
      }
    CHECK(std::sqrt(num / den) < 1e-10);
  }
}

TEST_CASE("cholesky reports the failing pivot") {
  std::vector<double> a{1, 0, 0, 2, 1, 0, 0, 0, 1};
  try {
    cholesky_in_place(a, 3);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot() == 1);
  }
}

TEST_CASE("paths start at zero and are reproducible") {
  const TimeGrid grid(2.0, 100);
  for (auto m : {Method::cholesky, Method::circulant}) {
    const auto a = sample_paths(grid, 0.7, 3, 5, m);
    const auto b = sample_paths(grid, 0.7, 3, 5, m);
    CHECK(a.channel_count() == 3);
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(a.channel(c)[0] == 0.0);
      for (std::size_t k = 0; k < grid.nodes(); ++k) REQUIRE(a.channel(c)[k] == b.channel(c)[k]);
    }
  }
}

TEST_CASE("brownian case has uncorrelated increments") {
  const TimeGrid grid(1.0, 512);
  const Sampler s(grid, 0.5, Method::circulant);
  double num = 0.0, d0 = 0.0;
  const int R = 10000;
  for (int r = 0; r < R; ++r) {
    const auto p = s.sample(1, derive_replication_seed(3, r));
    for (std::size_t k = 0; k + 1 < 511; ++k) {
      num += p.increment(0, k) * p.increment(0, k + 1);
      d0 += p.increment(0, k) * p.increment(0, k);
    }
  }
  CHECK(std::abs(num / d0) < 3.0 / std::sqrt(R * 511.0));
}

TEST_CASE("variance and self-similarity for both methods") {
  const TimeGrid grid(1.0, 64);
  for (auto m : {Method::cholesky, Method::circulant}) {
    const Sampler s(grid, 0.8, m);
    double v16 = 0.0, v64 = 0.0;
    const int R = 10000;
    for (int r = 0; r < R; ++r) {
      const auto p = s.sample(1, derive_replication_seed(9, r));
      v16 += p.channel(0)[16] * p.channel(0)[16];
      v64 += p.channel(0)[64] * p.channel(0)[64];
    }
    v16 /= R;
    v64 /= R;
    CHECK(v64 == doctest::Approx(1.0).epsilon(0.05));
    CHECK(v16 == doctest::Approx(std::pow(0.25, 1.6)).epsilon(0.05));
    CHECK(v64 / v16 == doctest::Approx(std::pow(4.0, 1.6)).epsilon(0.08));
  }
}

TEST_CASE("hoelder norm examples") {
  const TimeGrid grid(1.0, 300);
  std::vector<double> lin, sq, flat(grid.nodes(), 3.0);
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    lin.push_back(grid.time(k));
    sq.push_back(grid.time(k) * grid.time(k));
  }
  CHECK(holder_norm(grid, flat, 0.4, 0.0, 1.0) == 0.0);
  CHECK(holder_norm(grid, lin, 0.5, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  // Continuum value (4/3) sqrt(2/3); grid nodes straddle the maximiser 1/3.
  CHECK(holder_norm(grid, sq, 0.5, 0.0, 1.0) == doctest::Approx(1.0886621079036347).epsilon(1e-4));
  CHECK_THROWS_AS(holder_norm(grid, lin, 0.5, 0.5, 0.5), std::domain_error);
}

TEST_CASE("hoelder norm of a path grows with the window") {
  const auto p = sample_paths(TimeGrid(1.0, 256), 0.75, 2, 17);
  const std::span<const double> comps[] = {p.channel(0), p.channel(1)};
  double prev = 0.0;
  for (double b : {0.25, 0.5, 0.75, 1.0}) {
    const double v = holder_norm(p.grid(), comps, 0.6, 0.0, b);
    CHECK(std::isfinite(v));
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("refinement keeps the coarse nodes") {
  const auto coarse = sample_paths(TimeGrid(1.0, 32), 0.7, 1, 4);
  const auto fine = refine_path(coarse, 4, 99);
  CHECK(fine.grid().steps() == 128);
  for (std::size_t k = 0; k <= 32; ++k) CHECK(fine.channel(0)[4 * k] == coarse.channel(0)[k]);
  CHECK(fine.subsample(4).channel(0)[7] == coarse.channel(0)[7]);
}

TEST_CASE("refined paths keep the fBm law") {
  const TimeGrid grid(1.0, 8);
  const Sampler s(grid, 0.75);
  double v = 0.0, c = 0.0;
  const int R = 4000;
  for (int r = 0; r < R; ++r) {
    const auto f = refine_path(s.sample(1, derive_replication_seed(1, r)), 4, derive_replication_seed(2, r));
    const double a = f.channel(0)[1], b = f.channel(0)[3];
    v += a * a;
    c += a * b;
  }
  CHECK(v / R == doctest::Approx(fbm_covariance(1.0 / 32, 1.0 / 32, 0.75)).epsilon(0.08));
  CHECK(c / R == doctest::Approx(fbm_covariance(1.0 / 32, 3.0 / 32, 0.75)).epsilon(0.08));
}

TEST_CASE("csv round trip with metadata") {
  const auto p = sample_paths(TimeGrid(1.5, 20), 0.65, 2, 0xfedcba9876543210ULL, Method::circulant);
  const auto file = std::filesystem::temp_directory_path() / "fbmflow_path_test.csv";
  write_csv(p, file);
  write_metadata(p, file);
  const auto q = read_csv(file);
  CHECK(q.hurst() == p.hurst());
  CHECK(q.seed() == p.seed());
  CHECK(q.method() == Method::circulant);
  CHECK(q.grid() == p.grid());
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t k = 0; k <= 20; ++k) CHECK(q.channel(c)[k] == p.channel(c)[k]);
}

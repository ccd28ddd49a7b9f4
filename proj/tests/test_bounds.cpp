#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "fbmflow/bounds.hpp"
#include "fbmflow/fields.hpp"

using namespace fbmflow;
using namespace fbmflow::bound;

namespace {

// alpha = 0.4, beta = 0.7
HolderParams p47() { return HolderParams::make(0.75, 0.05, 0.15); }

BoundConstants constants_for(const char* key, double H, double norm, double T = 1.0) {
  const auto f = flow::make_field(key);
  const std::vector<double> norms(f.channel_count(), norm);
  return compute_constants(default_params(H), f, norms, f.dimension(), T);
}

}  // namespace

TEST_CASE("default exponents") {
  const auto p = default_params(0.75);
  CHECK(p.epsilon == 0.0625);
  CHECK(p.delta == 0.125);
  CHECK(p.alpha == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(p.beta == doctest::Approx(0.6875).epsilon(1e-15));
  const auto q = default_params(0.51);
  CHECK(q.alpha == doctest::Approx(0.495).epsilon(1e-12));
  CHECK(q.beta == doctest::Approx(0.5075).epsilon(1e-12));
  CHECK(q.alpha + q.beta > 1.0);
  CHECK_THROWS_AS(default_params(0.5), std::invalid_argument);
  CHECK_THROWS_AS(HolderParams::make(0.75, 0.2, 0.1), std::invalid_argument);
}

TEST_CASE("gamma against a high precision table") {
  const double table[][2] = {
      {0.05, 19.470085311255511756}, {0.15, 6.2202728740498766477}, {0.25, 3.6256099082219083119},
      {0.35, 2.5461469772122877756}, {0.45, 1.9681364006023823456}, {0.55, 1.6161242687335750095},
      {0.65, 1.38479510202650975},   {0.75, 1.2254167024651774974}, {0.85, 1.1124837369484651617},
      {0.95, 1.0314533171290321506}, {1.05, 0.97350426556277562168}, {1.15, 0.93304093110748159857},
      {1.25, 0.9064024770554770322}, {1.35, 0.89115144202430080063}, {1.45, 0.88566138027107207569},
      {1.55, 0.88886834780346632698}, {1.65, 0.90011681631723152201}, {1.75, 0.91906252684888328435},
      {1.85, 0.94561117640619548624}, {1.95, 0.97988065127258065425}};
  for (const auto& row : table) CHECK(std::abs(bound::gamma(row[0]) / row[1] - 1.0) < 1e-10);
}

TEST_CASE("constant chain golden values") {
  CHECK(k1(0.4, 0.7) == doctest::Approx(2.2541209959720553).epsilon(1e-12));
  CHECK(c_alpha(0.4) == doctest::Approx(0.67150497244207336).epsilon(1e-12));
  const double norm = 1.0;
  const ConstantChain chain(p47(), flow::make_field("constant:sigma=1,n=1"), std::span(&norm, 1), 1);
  CHECK(chain.m_alpha() == doctest::Approx(1.0 / 0.6).epsilon(1e-14));
  CHECK(chain.mtilde1_alpha() == 0.0);
  CHECK(chain.b2() == 0.0);
}

TEST_CASE("non-conforming fields and bad exponents are rejected") {
  const double norm = 1.0;
  CHECK_THROWS_AS(ConstantChain(p47(), flow::make_field("linear_test:lambda=1"), std::span(&norm, 1), 1),
                  std::invalid_argument);
  HolderParams bad = p47();
  bad.beta = bad.alpha;
  CHECK_THROWS_AS(ConstantChain(bad, flow::make_field("sine:A=1"), std::span(&norm, 1), 2), std::invalid_argument);
}

TEST_CASE("delta0 branch is taken when the first term dominates") {
  // alpha = 0.49 makes c_alpha M~1_alpha large against a2 + b2.
  const auto p = HolderParams::make(0.9, 0.01, 0.39);
  const double norm = 1.5;
  const ConstantChain chain(p, flow::make_field("sine:A=0.5,omega=1;1"), std::span(&norm, 1), 2);
  const auto sol = solve_delta(chain, 1.0);
  CHECK(sol.branch == DeltaBranch::delta0);
  const double scale = 3.0 * 2.0 * chain.k1();
  CHECK(sol.delta == std::pow(scale * chain.c_alpha() * chain.mtilde1_alpha(), -1.0 / p.beta));
  CHECK(chain.a2(sol.delta) + chain.b2() <= chain.c_alpha() * chain.mtilde1_alpha());
}

TEST_CASE("delta solves its defining equation and S stays below 2") {
  for (const char* key : {"sine:A=0.2,omega=1;1", "sine:A=3,omega=4;1;2,channels=3", "gaussian_bump:A=2,sigma=0.3",
                          "gaussian_bump:A=0.1,sigma=5,n=4,channels=2"})
    for (double H : {0.51, 0.6, 0.75, 0.9, 0.99})
      for (double norm : {1e-3, 0.5, 3.0, 100.0}) {
        const auto k = constants_for(key, H, norm);
        const double lhs = std::pow(k.delta, -k.params.beta);
        const double rhs = 3.0 * k.dimension * k.k1 * std::max(k.c_alpha * k.mtilde1_alpha, k.a2 + k.b2);
        CHECK(std::abs(lhs - rhs) / lhs < 1e-10);
        CHECK(k.s <= 2.0);
        CHECK(k.s >= 1.0);
        CHECK(k.condition_k);
        CHECK(k.condition_b);
        CHECK(k.condition_ab);
        CHECK(k.a2 <= k.a2_majorant * (1.0 + 1e-12));
        CHECK(k.c_t == doctest::Approx(1.0 / k.delta));
      }
}

TEST_CASE("zero field is the degenerate case") {
  const auto k = constants_for("zero:n=2", 0.75, 2.0, 3.0);
  CHECK(k.solution.branch == DeltaBranch::degenerate);
  CHECK(k.delta == 3.0);
  CHECK(k.s == 1.0);
  CHECK(k.c_t == 0.0);
  const auto t = tangent_growth_bound(k, 3.0, 2.5);
  CHECK(t.bound == 2.5);
  const auto h = hausdorff_growth_bound(k, 3.0, 1, 2 * std::numbers::pi, 2);
  CHECK(h.bound == doctest::Approx(std::sqrt(2.0) * 2 * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("short horizons use a single interval") {
  const auto k = constants_for("sine:A=0.2,omega=1;1", 0.75, 1.0);
  const double T = 0.5 * k.delta;
  const auto t = tangent_growth_bound(k, T, 3.0);
  CHECK(t.intervals == 1);
  CHECK(t.bound == doctest::Approx(k.s * 3.0).epsilon(1e-14));
  CHECK(t.bound <= 6.0);
  const auto h = hausdorff_growth_bound(k, T, 1, 2 * std::numbers::pi, 2);
  CHECK(h.bound == doctest::Approx(std::sqrt(2.0) * k.s * 2 * std::numbers::pi).epsilon(1e-14));
  CHECK(h.bound <= 4 * std::sqrt(2.0) * std::numbers::pi);
  CHECK_THROWS_AS(hausdorff_growth_bound(k, T, 2, 1.0, 2), std::invalid_argument);
}

TEST_CASE("bounds are finite in log2 when they overflow") {
  const auto k = constants_for("sine:A=5,omega=3;3", 0.55, 20.0, 10.0);
  const auto t = tangent_growth_bound(k, 10.0, 1.0);
  CHECK(std::isfinite(t.log2_bound));
  CHECK(t.log2_bound > 0.0);
  CHECK(t.log2_bound == doctest::Approx(t.intervals * std::log2(k.s)));
  CHECK(t.log2_closed_form == doctest::Approx(k.c_t * 10.0));
}

TEST_CASE("single channel rate does not depend on the path norm") {
  const auto f = flow::make_field("sine:A=0.7,omega=2;1");
  double rate = 0.0;
  for (double norm : {0.3, 1.0, 2.0, 17.0}) {
    const auto k = compute_constants(default_params(0.7), f, std::span(&norm, 1), 2, 1.0);
    const double expected = std::pow(3.0 * 2 * k.k1 * std::max(k.c_alpha * k.mtilde1_alpha, k.a2 + k.b2), 1.0 / k.params.beta);
    CHECK(k.c_t == doctest::Approx(expected).epsilon(1e-10));
    if (rate == 0.0) rate = single_channel_rate(k);
    CHECK(single_channel_rate(k) == doctest::Approx(rate).epsilon(1e-9));
  }
}

TEST_CASE("bound is monotone in T, the path norm and the Lipschitz constant") {
  const auto p = default_params(0.75);
  auto bound_for = [&](double T, double norm, double lip) {
    const flow::FieldConstants c{0.5, lip, 0.8};
    const ConstantChain chain(p, std::span(&c, 1), std::span(&norm, 1), 2);
    return hausdorff_growth_bound(compute_constants(chain, T), T, 1, 1.0, 2).log2_bound;
  };
  double prev = -1e300;
  for (double T : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double b = bound_for(T, 1.0, 1.0);
    CHECK(b >= prev);
    prev = b;
  }
  prev = -1e300;
  for (double norm : {0.01, 0.1, 1.0, 3.0, 10.0}) {
    const double b = bound_for(1.0, norm, 1.0);
    CHECK(b >= prev);
    prev = b;
  }
  prev = -1e300;
  for (double lip : {0.1, 0.5, 1.0, 2.0, 8.0}) {
    const double b = bound_for(1.0, 1.0, lip);
    CHECK(b >= prev);
    prev = b;
  }
}

TEST_CASE("window checks") {
  const auto k = constants_for("sine:A=0.2,omega=1;1", 0.75, 1.0);
  const double h = k.delta / 10.0;
  std::vector<double> still(2 * 101, 0.5);
  auto c = lemma_flow_check(k, still, 2, h);
  CHECK(c.windows == 10);
  CHECK(c.pairs == 100);
  CHECK(c.violations == 0);
  CHECK(holder_window_check(k, still, 2, h).violations == 0);

  std::vector<double> jump = still;
  for (std::size_t i = 50 * 2; i < jump.size(); ++i) jump[i] += 1e3;
  CHECK(lemma_flow_check(k, jump, 2, h).violations > 0);
  CHECK(holder_window_check(k, jump, 2, h).violations == 1);

  // Windows shorter than one step leave nothing to check.
  CHECK(lemma_flow_check(k, still, 2, 20.0 * k.delta).windows == 0);
}

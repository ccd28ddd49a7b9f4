#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "fbmflow/experiment.hpp"
#include "fbmflow/rng.hpp"

using namespace fbmflow;
using namespace fbmflow::experiment;

namespace {

ExperimentConfig small(const char* field = "sine:A=0.2,omega=1;1") {
  ExperimentConfig c;
  c.field = field;
  c.steps = 128;
  c.replications = 6;
  c.points = 40;
  c.lemma_points = 4;
  return c;
}

}  // namespace

TEST_CASE("config parsing and resolution") {
  const auto kv = config::KeyValues::parse(
      "field = gaussian_bump:A=1,sigma=0.5  # comment\n"
      "[path]\nH = 0.7\nT = 2\ngrid = 256\nmethod = circulant\n"
      "[run]\nreplications = 7\nseed = 18446744073709551615\n"
      "[manifold]\npoints = 33\n");
  const auto c = ExperimentConfig::from(kv);
  CHECK(c.field == "gaussian_bump:A=1,sigma=0.5");
  CHECK(c.hurst == 0.7);
  CHECK(c.horizon == 2.0);
  CHECK(c.steps == 256);
  CHECK(c.method == fbm::Method::circulant);
  CHECK(c.replications == 7);
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(c.points == 33);
  const auto again = ExperimentConfig::from(c.resolved());
  CHECK(again.resolved().render() == c.resolved().render());
  CHECK_THROWS_AS(ExperimentConfig::from(config::KeyValues::parse("path.hurst = 0.7")), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from(config::KeyValues::parse("run.replications = 0")), std::invalid_argument);
}

TEST_CASE("worker count from the environment") {
  setenv("FBMFLOW_WORKERS", "3", 1);
  CHECK(default_workers() == 3);
  unsetenv("FBMFLOW_WORKERS");
  CHECK(default_workers() == 1);
}

TEST_CASE("zero field rows sit exactly at the initial measure") {
  auto c = small("zero:n=2");
  const auto report = run_bound_experiment(c);
  const double circumference = geometry::make_manifold(c.manifold, c.points).total_weight();
  for (const auto& r : report.rows) {
    REQUIRE(r.ok());
    CHECK(r.hausdorff_empirical == circumference);
    CHECK(r.tangent_empirical == 1.0);
    CHECK(r.hausdorff_bound == doctest::Approx(std::sqrt(2.0) * circumference).epsilon(1e-14));
    CHECK(r.hausdorff_log2_slack() >= 0.0);
    CHECK(r.c_t == 0.0);
  }
  CHECK(report.summary.violations() == 0);
}

TEST_CASE("sine field rows certify") {
  const auto report = run_bound_experiment(small());
  CHECK(report.summary.failed == 0);
  CHECK(report.summary.violations() == 0);
  CHECK(report.summary.tangent_min_log2_slack > 0.0);
  for (const auto& r : report.rows) {
    CHECK(r.s <= 2.0);
    CHECK(r.p == doctest::Approx(r.horizon / r.delta));
  }
}

TEST_CASE("reports are byte identical at any worker count") {
  auto c = small();
  const std::string one = render_report(run_bound_experiment(c));
  for (std::size_t w : {2, 4, 9}) {
    c.workers = w;
    CHECK(render_report(run_bound_experiment(c)) == one);
  }
  CHECK(one.find("# config run.seed = 1") != std::string::npos);
  CHECK(one.find("# summary total violations = 0") != std::string::npos);
}

TEST_CASE("a single derived seed reproduces its row") {
  const auto c = small();
  const auto report = run_bound_experiment(c);
  const auto& row = report.rows[4];
  CHECK(row.derived_seed == derive_replication_seed(c.seed, 4));
  const auto again = run_replication(c, 4, row.derived_seed);
  CHECK(report_fields(again) == report_fields(row));
}

TEST_CASE("failures are recorded per row and fail the batch only when all fail") {
  const auto c = small("linear_test:lambda=1,n=2");
  const auto row = run_replication(c, 0, 5);
  CHECK_FALSE(row.ok());
  CHECK(row.status.find("non-conforming") != std::string::npos);
  CHECK(report_fields(row).size() == report_header(1).size());
  CHECK_THROWS_AS(run_bound_experiment(c), std::runtime_error);
}

TEST_CASE("mismatched manifold and field dimensions are rejected") {
  auto c = small("sine:A=1,omega=1;1;1");
  CHECK_THROWS_AS(run_bound_experiment(c), std::invalid_argument);
}

TEST_CASE("report layout") {
  const auto h = report_header(3);
  CHECK(h[8] == "holder_norm_0");
  CHECK(h[10] == "holder_norm_2");
  const auto c = small("sine:A=0.2,omega=1;1,channels=3");
  const auto report = run_bound_experiment(c);
  std::istringstream in(render_report(report));
  std::string line;
  std::size_t data = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t commas = 0;
    for (char ch : line) commas += ch == ',';
    CHECK(commas + 1 == h.size());
    ++data;
  }
  CHECK(data == 1 + c.replications);
}

TEST_CASE("measure curve starts at the reference measure") {
  auto c = small();
  const auto curve = run_measure_curve(c);
  CHECK(curve.times.size() == c.steps + 1);
  CHECK(curve.measure.front() == doctest::Approx(2 * std::numbers::pi).epsilon(1e-14));
  for (double v : curve.measure) CHECK(v > 0.0);
}

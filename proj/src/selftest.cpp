#include "fbmflow/selftest.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fbmflow/bounds.hpp"
#include "fbmflow/experiment.hpp"
#include "fbmflow/fbm.hpp"
#include "fbmflow/fields.hpp"
#include "fbmflow/flow.hpp"
#include "fbmflow/fractional.hpp"
#include "fbmflow/log.hpp"
#include "fbmflow/manifold.hpp"
#include "fbmflow/rng.hpp"

namespace fbmflow::selftest {

namespace {

using Check = std::function<std::string()>;  // empty string = pass

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fail_if(bool bad, const std::string& what) { return bad ? what : std::string(); }

}  // namespace

int run(const Options& options, std::ostream& out) {
  const bound::Tuning tuning{options.mutate_k1 ? 1.5 : 1.0};
  auto previous = set_warning_sink({});
  std::vector<std::pair<std::string, Check>> checks;

  checks.emplace_back("rng.philox_known_answer", [] {
    const auto b = Philox4x64(0, 0).block(1);
    return fail_if(b[0] != 0x02f4ba6408e4d89bULL || b[3] != 0x907d7a052fd5b4dcULL, "block mismatch");
  });
  checks.emplace_back("fbm.covariance_golden", [] {
    return fail_if(rel(fbm::fbm_covariance(1, 2, 0.75), std::sqrt(2.0)) > 1e-14 ||
                       fbm::fbm_covariance(1, 2, 0.5) != 1.0,
                   "covariance formula");
  });
  checks.emplace_back("fbm.variance_monte_carlo", [] {
    const fbm::TimeGrid grid(1.0, 32);
    const fbm::Sampler sampler(grid, 0.7);
    double s = 0.0;
    const int R = 4000;
    for (int r = 0; r < R; ++r) {
      const double v = sampler.sample(1, derive_replication_seed(7, r)).channel(0)[32];
      s += v * v;
    }
    return fail_if(rel(s / R, 1.0) > 0.1, "Var B(1) = " + std::to_string(s / R));
  });
  checks.emplace_back("fbm.determinism", [] {
    const fbm::TimeGrid grid(1.0, 64);
    const auto a = fbm::sample_paths(grid, 0.75, 2, 99);
    const auto b = fbm::sample_paths(grid, 0.75, 2, 99);
    bool same = true;
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t k = 0; k < grid.nodes(); ++k) same = same && a.channel(c)[k] == b.channel(c)[k];
    return fail_if(!same, "paths differ");
  });
  checks.emplace_back("fbm.holder_norm_golden", [] {
    const fbm::TimeGrid grid(1.0, 300);
    std::vector<double> v;
    for (std::size_t k = 0; k < grid.nodes(); ++k) v.push_back(grid.time(k) * grid.time(k));
    return fail_if(rel(fbm::holder_norm(grid, v, 0.5, 0.0, 1.0), 1.0886621079036347) > 1e-4, "t^2 norm");
  });
  checks.emplace_back("frac.power_rule", [] {
    const auto f = frac::SampledFunction::from([](double) { return 1.0; }, 0.0, 1.0, 256);
    const auto i = frac::rl_integral(f, 0.5);
    return fail_if(rel(i.values.back(), 1.1283791670955126) > 1e-4, "I^0.5 1 at 1");
  });
  checks.emplace_back("frac.inversion", [] {
    const auto f = frac::SampledFunction::from([](double x) { return std::sin(x); }, 0.0, 1.0, 512);
    const auto back = frac::weyl_derivative(frac::rl_integral(f, 0.4), 0.4);
    double err = 0.0, top = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) {
      err = std::max(err, std::abs(back.values[k] - f.values[k]));
      top = std::max(top, std::abs(f.values[k]));
    }
    return fail_if(err / top > 1e-2, "D(I sin) error " + std::to_string(err / top));
  });
  checks.emplace_back("frac.zahle_matches_stieltjes", [] {
    const auto f = frac::SampledFunction::from([](double x) { return x; }, 0.0, 1.0, 512);
    const auto g = frac::SampledFunction::from([](double x) { return x * x; }, 0.0, 1.0, 512);
    const double v = frac::zahle_integral(f, g, 0.3);
    return fail_if(rel(v, 2.0 / 3.0) > 2e-3, "int x d(x^2) = " + std::to_string(v));
  });
  checks.emplace_back("flow.field_constants_probe", [] {
    const auto field = flow::make_field("sine:A=0.7,omega=1.5;-0.5,phi=0.3,channels=2");
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-3, 3);
    for (std::size_t c = 0; c < 2; ++c) {
      const auto k = field.constants(c);
      for (int t = 0; t < 500; ++t) {
        std::vector<double> x{u(gen), u(gen)}, y{u(gen), u(gen)}, ux(2), uy(2), jx(4), jy(4);
        field.evaluate(c, x, ux, jx);
        field.evaluate(c, y, uy, jy);
        const double d = std::hypot(x[0] - y[0], x[1] - y[1]);
        for (int i = 0; i < 2; ++i) {
          if (std::abs(ux[i]) > k.sup + 1e-12) return std::string("A1");
          if (std::abs(ux[i] - uy[i]) > k.lipschitz * d + 1e-12) return std::string("A2");
          for (int j = 0; j < 2; ++j)
            if (std::abs(jx[i * 2 + j] - jy[i * 2 + j]) > k.derivative_lipschitz * d + 1e-12) return std::string("A3");
        }
      }
    }
    return std::string();
  });
  checks.emplace_back("flow.constant_field_exact", [] {
    const auto field = flow::make_field("constant:sigma=0.5,n=1");
    const auto path = fbm::sample_paths(fbm::TimeGrid(1.0, 128), 0.75, 1, 3);
    const double x0 = 0.25;
    const auto traj = flow::integrate_flow(field, path, std::span(&x0, 1));
    double err = 0.0;
    for (std::size_t k = 0; k < traj.nodes(); ++k)
      err = std::max(err, std::abs(traj.state(k)[0] - (x0 + 0.5 * path.channel(0)[k])));
    return fail_if(err > 1e-13, "max error " + std::to_string(err));
  });
  checks.emplace_back("bound.k1_c_alpha_golden", [tuning] {
    const auto field = flow::make_field("constant:sigma=1,n=1");
    const double norm = 1.0;
    const bound::ConstantChain chain(bound::HolderParams::make(0.75, 0.05, 0.15), field, std::span(&norm, 1), 1, tuning);
    // alpha = 0.4, beta = 0.7
    return fail_if(rel(chain.k1(), 2.2541209959720553) > 1e-10 || rel(chain.c_alpha(), 0.67150497244207336) > 1e-10,
                   "k1 = " + std::to_string(chain.k1()));
  });
  checks.emplace_back("bound.delta_solver", [tuning] {
    for (const char* key : {"sine:A=0.2,omega=1;1", "gaussian_bump:A=1,sigma=0.5", "sine:A=2,omega=3;1,channels=3"})
      for (double H : {0.55, 0.75, 0.95})
        for (double norm : {0.1, 1.0, 10.0}) {
          const auto field = flow::make_field(key);
          const std::vector<double> norms(field.channel_count(), norm);
          const auto k = bound::compute_constants(bound::default_params(H), field, norms, 2, 1.0, tuning);
          if (k.solution.residual > 1e-10) return std::string("residual");
          if (!(k.s <= 2.0)) return std::string("S > 2");
          if (!(k.condition_k && k.condition_b && k.condition_ab)) return std::string("interval condition");
        }
    return std::string();
  });
  checks.emplace_back("bound.certification_small", [tuning] {
    experiment::ExperimentConfig c;
    c.steps = 256;
    c.replications = 4;
    c.points = 64;
    const auto report = experiment::run_bound_experiment(c, tuning);
    const auto& s = report.summary;
    return fail_if(s.failed > 0 || s.violations() > 0, "violations = " + std::to_string(s.violations()));
  });
  checks.emplace_back("geometry.circle_and_rotation", [] {
    const auto mesh = geometry::make_circle(1.0, 2, 1000);
    const double th = 0.7;
    const double rot = geometry::hausdorff_measure(mesh, [th](std::size_t, std::span<double> j) {
      j[0] = std::cos(th), j[1] = -std::sin(th), j[2] = std::sin(th), j[3] = std::cos(th);
    });
    return fail_if(std::abs(mesh.total_weight() - 2 * std::numbers::pi) > 1e-6 ||
                       std::abs(rot - mesh.total_weight()) > 1e-12,
                   "measure");
  });
  checks.emplace_back("geometry.hadamard_fuzz", [] {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> z;
    for (int t = 0; t < 2000; ++t) {
      const std::size_t m = 1 + t % 4, n = m + 1 + t % 3;
      std::vector<double> v(m * n);
      for (auto& x : v) x = z(gen);
      if (!geometry::gram_hadamard_check(v, m, n)) return std::string("frame ") + std::to_string(t);
    }
    return std::string();
  });
  checks.emplace_back("experiment.worker_invariance", [] {
    experiment::ExperimentConfig c;
    c.steps = 128;
    c.replications = 3;
    c.points = 32;
    c.workers = 1;
    const auto one = experiment::render_report(experiment::run_bound_experiment(c));
    c.workers = 3;
    const auto three = experiment::render_report(experiment::run_bound_experiment(c));
    return fail_if(one != three, "reports differ");
  });

  int failures = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [name, check] : checks) {
    std::string detail;
    try {
      detail = check();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
      out << "PASS " << name << "\n";
    } else {
      ++failures;
      out << "FAIL " << name << ": " << detail << "\n";
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << (failures ? "selftest FAILED: " : "selftest passed: ") << checks.size() - failures << "/" << checks.size()
      << " properties in " << secs << " s\n";
  set_warning_sink(previous);
  return failures;
}

}  // namespace fbmflow::selftest

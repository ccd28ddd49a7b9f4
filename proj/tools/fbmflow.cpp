#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fbmflow/config.hpp"
#include "fbmflow/csv.hpp"
#include "fbmflow/experiment.hpp"
#include "fbmflow/fbm.hpp"
#include "fbmflow/fields.hpp"
#include "fbmflow/flow.hpp"
#include "fbmflow/fractional.hpp"
#include "fbmflow/manifold.hpp"
#include "fbmflow/selftest.hpp"

using namespace fbmflow;

namespace {

enum Exit { ok = 0, property_failure = 1, usage = 2, runtime = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out;
};

// Experiment settings shared by the path-driven subcommands; unset flags fall
// back to the config file, then to the built-in defaults.
struct ExperimentFlags {
  std::optional<std::string> field, manifold, method;
  std::optional<double> hurst, horizon, epsilon, delta;
  std::optional<std::size_t> steps, replications, points;

  void attach(CLI::App* cmd, bool bound_options) {
    cmd->add_option("--field", field, "vector field key, e.g. sine:A=0.2,omega=1;1");
    cmd->add_option("--H", hurst, "Hurst parameter");
    cmd->add_option("--T", horizon, "time horizon");
    cmd->add_option("--grid", steps, "number of grid steps");
    cmd->add_option("--method", method, "cholesky | circulant");
    if (bound_options) {
      cmd->add_option("--manifold", manifold, "manifold key, e.g. circle:r=1,n=2");
      cmd->add_option("--points", points, "quadrature points on the manifold");
      cmd->add_option("--replications", replications, "number of paths");
      cmd->add_option("--epsilon", epsilon, "override epsilon");
      cmd->add_option("--delta", delta, "override delta");
    }
  }

  experiment::ExperimentConfig resolve(const Globals& g) const {
    config::KeyValues kv;
    if (!g.config.empty()) {
      if (!std::filesystem::exists(g.config)) throw UsageError("config file not found: " + g.config);
      kv = config::KeyValues::load(g.config);
    }
    auto c = experiment::ExperimentConfig::from(kv);
    if (field) c.field = *field;
    if (manifold) c.manifold = *manifold;
    if (method) c.method = fbm::parse_method(*method);
    if (hurst) c.hurst = *hurst;
    if (horizon) c.horizon = *horizon;
    if (epsilon) c.epsilon = *epsilon;
    if (delta) c.delta = *delta;
    if (steps) c.steps = *steps;
    if (replications) c.replications = *replications;
    if (points) c.points = *points;
    if (g.seed) c.seed = *g.seed;
    c.workers = g.workers.value_or(experiment::default_workers());
    c.validate();
    return c;
  }
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  for (const auto& item : csv::split(s, ',')) v.push_back(config::parse_double(item, "--x0"));
  return v;
}

std::ofstream open_out(const std::string& path) {
  if (path.empty()) throw UsageError("--out is required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

frac::SampledFunction read_function(const std::string& file) {
  const auto table = csv::read(file);
  if (table.header.size() < 2 || table.rows.size() < 2) throw std::runtime_error(file + ": need columns x,value and 2+ rows");
  std::vector<double> v;
  for (const auto& r : table.rows) v.push_back(r[1]);
  return frac::SampledFunction(table.rows.front()[0], table.rows.back()[0], std::move(v));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fBm-driven stochastic flows: sampling, fractional calculus, growth bounds"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "experiment config file (key = value)");
  app.add_option("--seed", g.seed, "base seed");
  app.add_option("--workers", g.workers, "worker threads (default: FBMFLOW_WORKERS or 1)");
  app.add_option("--out", g.out, "output file");

  auto* sample = app.add_subcommand("sample-fbm", "sample fBm paths to CSV");
  double s_h = 0.75, s_t = 1.0;
  std::size_t s_n = 1024, s_channels = 1;
  std::string s_method = "cholesky";
  sample->add_option("--H", s_h, "Hurst parameter")->capture_default_str();
  sample->add_option("--T", s_t, "time horizon")->capture_default_str();
  sample->add_option("--grid", s_n, "number of grid steps")->capture_default_str();
  sample->add_option("--channels", s_channels, "independent channels")->capture_default_str();
  sample->add_option("--method", s_method, "cholesky | circulant")->capture_default_str();

  auto* frac_cmd = app.add_subcommand("fraccalc", "fractional operators on a sampled function");
  std::string f_op, f_in, f_in2, f_side = "left";
  double f_alpha = 0.5;
  frac_cmd->add_option("--op", f_op, "integral | derivative | zahle | wnorm")
      ->required()
      ->check(CLI::IsMember({"integral", "derivative", "zahle", "wnorm"}));
  frac_cmd->add_option("--alpha", f_alpha, "order")->capture_default_str();
  frac_cmd->add_option("--side", f_side, "left | right")->check(CLI::IsMember({"left", "right"}));
  frac_cmd->add_option("--in", f_in, "CSV with columns x,value")->required();
  frac_cmd->add_option("--in2", f_in2, "integrator g for --op zahle (CSV x,value)");

  auto* flow_cmd = app.add_subcommand("flow", "solve the flow and its Jacobian along one path");
  ExperimentFlags flow_flags;
  flow_flags.attach(flow_cmd, false);
  std::string x0_text = "0,0";
  flow_cmd->add_option("--x0", x0_text, "initial point, comma separated")->capture_default_str();

  auto* haus = app.add_subcommand("hausdorff", "measure curve of a manifold under one path");
  ExperimentFlags haus_flags;
  haus_flags.attach(haus, true);

  auto* verify = app.add_subcommand("verify-bound", "certify the growth bounds over many paths");
  ExperimentFlags verify_flags;
  verify_flags.attach(verify, true);

  auto* self = app.add_subcommand("selftest", "reduced-size property suite");
  std::string mutate;
  self->add_option("--mutate", mutate, "dev: negative control (k1)")->check(CLI::IsMember({"k1"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*sample) {
      const auto path = fbm::sample_paths(fbm::TimeGrid(s_t, s_n), s_h, s_channels, g.seed.value_or(1),
                                          fbm::parse_method(s_method));
      if (g.out.empty()) throw UsageError("--out is required");
      fbm::write_csv(path, g.out);
      fbm::write_metadata(path, g.out);
    } else if (*frac_cmd) {
      const auto f = read_function(f_in);
      const auto side = f_side == "left" ? frac::Side::left : frac::Side::right;
      if (f_op == "integral" || f_op == "derivative") {
        const auto r = f_op == "integral" ? frac::rl_integral(f, f_alpha, side) : frac::weyl_derivative(f, f_alpha, side);
        auto out = open_out(g.out);
        out << "x,value\n";
        for (std::size_t k = 0; k < r.values.size(); ++k)
          out << csv::format(r.node(k)) << "," << csv::format(r.values[k]) << "\n";
      } else {
        double v = 0.0;
        if (f_op == "zahle") {
          if (f_in2.empty()) throw UsageError("--op zahle needs --in2");
          v = frac::zahle_integral(f, read_function(f_in2), f_alpha);
        } else {
          v = frac::w_norm(f, f_alpha);
        }
        std::cout << csv::format(v) << "\n";
        if (!g.out.empty()) open_out(g.out) << "value\n" << csv::format(v) << "\n";
      }
    } else if (*flow_cmd) {
      const auto c = flow_flags.resolve(g);
      const auto field = flow::make_field(c.field);
      const auto x0 = parse_list(x0_text);
      const auto path = fbm::sample_paths(fbm::TimeGrid(c.horizon, c.steps), c.hurst, field.channel_count(), c.seed,
                                          c.method);
      const auto sol = flow::integrate_with_tangent(field, path, x0);
      const std::size_t n = field.dimension();
      auto out = open_out(g.out);
      out << "t";
      for (std::size_t i = 1; i <= n; ++i) out << ",x_" << i;
      for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= n; ++j) out << ",J_" << i << j;
      out << "\n";
      for (std::size_t k = 0; k < sol.flow.nodes(); ++k) {
        out << csv::format(sol.flow.times[k]);
        for (double v : sol.flow.state(k)) out << "," << csv::format(v);
        for (double v : sol.tangent.jacobian(k)) out << "," << csv::format(v);
        out << "\n";
      }
    } else if (*haus) {
      const auto c = haus_flags.resolve(g);
      const auto curve = experiment::run_measure_curve(c);
      auto out = open_out(g.out);
      out << "t,measure_estimate\n";
      for (std::size_t k = 0; k < curve.times.size(); ++k)
        out << csv::format(curve.times[k]) << "," << csv::format(curve.measure[k]) << "\n";
    } else if (*verify) {
      const auto c = verify_flags.resolve(g);
      const auto report = experiment::run_bound_experiment(c);
      if (!g.out.empty()) experiment::write_report(report, g.out);
      experiment::print_summary(report, std::cout);
      return report.summary.violations() == 0 ? Exit::ok : Exit::property_failure;
    } else if (*self) {
      selftest::Options opt;
      opt.mutate_k1 = mutate == "k1";
      return selftest::run(opt, std::cout) == 0 ? Exit::ok : Exit::property_failure;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return Exit::usage;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return Exit::usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::runtime;
  }
  return Exit::ok;
}

#include "fbmflow/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fbmflow/csv.hpp"
#include "fbmflow/fields.hpp"
#include "fbmflow/flow.hpp"
#include "fbmflow/rng.hpp"

namespace fbmflow::experiment {

namespace {

std::size_t positive(long long v, const std::string& what) {
  if (v < 1) throw std::invalid_argument(what + " must be >= 1");
  return static_cast<std::size_t>(v);
}

const std::set<std::string> kKeys = {
    "field",          "manifold",         "manifold.points", "path.H",         "path.T",
    "path.grid",      "path.method",      "run.replications", "run.seed",      "params.epsilon",
    "params.delta",   "check.lemma_points",
};

}  // namespace

ExperimentConfig ExperimentConfig::from(const config::KeyValues& kv) {
  for (const auto& [k, v] : kv.entries())
    if (!kKeys.count(k)) throw std::invalid_argument("unknown config key '" + k + "'");
  ExperimentConfig c;
  c.field = kv.get_string("field", c.field);
  c.manifold = kv.get_string("manifold", c.manifold);
  c.points = positive(kv.get_int("manifold.points", static_cast<long long>(c.points)), "manifold.points");
  c.hurst = kv.get_double("path.H", c.hurst);
  c.horizon = kv.get_double("path.T", c.horizon);
  c.steps = positive(kv.get_int("path.grid", static_cast<long long>(c.steps)), "path.grid");
  c.method = fbm::parse_method(kv.get_string("path.method", std::string(fbm::to_string(c.method))));
  c.replications = positive(kv.get_int("run.replications", static_cast<long long>(c.replications)), "run.replications");
  c.seed = kv.get_uint64("run.seed", c.seed);
  if (auto v = kv.get("params.epsilon")) c.epsilon = config::parse_double(*v, "params.epsilon");
  if (auto v = kv.get("params.delta")) c.delta = config::parse_double(*v, "params.delta");
  c.lemma_points = static_cast<std::size_t>(std::max(0LL, kv.get_int("check.lemma_points", static_cast<long long>(c.lemma_points))));
  return c;
}

config::KeyValues ExperimentConfig::resolved() const {
  config::KeyValues kv;
  const auto p = params();
  kv.set("field", field);
  kv.set("manifold", manifold);
  kv.set("manifold.points", std::to_string(points));
  kv.set("path.H", csv::format(hurst));
  kv.set("path.T", csv::format(horizon));
  kv.set("path.grid", std::to_string(steps));
  kv.set("path.method", std::string(fbm::to_string(method)));
  kv.set("run.replications", std::to_string(replications));
  kv.set("run.seed", std::to_string(seed));
  kv.set("params.epsilon", csv::format(p.epsilon));
  kv.set("params.delta", csv::format(p.delta));
  kv.set("check.lemma_points", std::to_string(lemma_points));
  return kv;
}

bound::HolderParams ExperimentConfig::params() const {
  const auto d = bound::default_params(hurst);
  return bound::HolderParams::make(hurst, epsilon.value_or(d.epsilon), delta.value_or(d.delta));
}

void ExperimentConfig::validate() const {
  params();
  if (!(horizon > 0.0)) throw std::invalid_argument("path.T must be positive");
  if (steps < 2) throw std::invalid_argument("path.grid must be >= 2");
  flow::make_field(field);
  geometry::make_manifold(manifold, 1);
}

std::size_t default_workers() {
  if (const char* env = std::getenv("FBMFLOW_WORKERS")) {
    const long long v = config::parse_int(env, "FBMFLOW_WORKERS");
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return 1;
}

double ReportRow::tangent_log2_slack() const { return tangent_bound_log2 - std::log2(tangent_empirical); }
double ReportRow::hausdorff_log2_slack() const { return hausdorff_bound_log2 - std::log2(hausdorff_empirical); }
bool ReportRow::tangent_violation() const { return ok() && tangent_log2_slack() < -1e-12; }
bool ReportRow::hausdorff_violation() const { return ok() && hausdorff_log2_slack() < -1e-12; }

struct Experiment::Impl {
  flow::VectorFieldSet fields;
  geometry::ManifoldMesh mesh;
  bound::HolderParams params;
  bound::Tuning tuning;
  fbm::Sampler sampler;
};

Experiment::Experiment(ExperimentConfig config, bound::Tuning tuning) : config_(std::move(config)) {
  config_.validate();
  auto fields = flow::make_field(config_.field);
  auto mesh = geometry::make_manifold(config_.manifold, config_.points);
  if (mesh.ambient_dim != fields.dimension())
    throw std::invalid_argument("manifold lives in R^" + std::to_string(mesh.ambient_dim) + " but the field in R^" +
                                std::to_string(fields.dimension()));
  fbm::Sampler sampler(fbm::TimeGrid(config_.horizon, config_.steps), config_.hurst, config_.method);
  impl_ = std::make_unique<Impl>(Impl{std::move(fields), std::move(mesh), config_.params(), tuning, std::move(sampler)});
}

Experiment::~Experiment() = default;
Experiment::Experiment(Experiment&&) noexcept = default;

std::size_t Experiment::channels() const { return impl_->fields.channel_count(); }

namespace {

double l1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

ReportRow Experiment::run_replication(std::size_t path_id, std::uint64_t derived_seed) const {
  const auto& fields = impl_->fields;
  const auto& mesh = impl_->mesh;
  const auto& params = impl_->params;
  ReportRow row;
  row.path_id = path_id;
  row.base_seed = config_.seed;
  row.derived_seed = derived_seed;
  row.horizon = config_.horizon;
  row.hurst = config_.hurst;
  row.alpha = params.alpha;
  row.beta = params.beta;
  row.holder_norms.assign(fields.channel_count(), std::numeric_limits<double>::quiet_NaN());
  try {
    const auto path = impl_->sampler.sample(fields.channel_count(), derived_seed);
    row.holder_norms = fbm::channel_holder_norms(path, params.beta);
    const auto k = bound::compute_constants(params, fields, row.holder_norms, fields.dimension(), config_.horizon,
                                            impl_->tuning);
    row.delta = k.delta;
    row.delta_branch = bound::to_string(k.solution.branch);
    row.p = k.p;
    row.c_t = k.c_t;
    row.s = k.s;
    row.kstar = k.kstar;
    row.ct_beta = std::pow(k.c_t, params.beta);
    row.moment_rhs = k.moment_rhs;

    const auto tb = bound::tangent_growth_bound(k, config_.horizon, 1.0);
    const auto hb = bound::hausdorff_growth_bound(k, config_.horizon, mesh.intrinsic_dim, mesh.total_weight(),
                                                  mesh.ambient_dim);
    row.tangent_bound = tb.bound;
    row.tangent_bound_log2 = tb.log2_bound;
    row.hausdorff_bound = hb.bound;
    row.hausdorff_bound_log2 = hb.log2_bound;

    const std::size_t n = mesh.ambient_dim, m = mesh.intrinsic_dim, N = config_.steps;
    const double h = path.grid().step();
    std::vector<double> measure(N + 1, 0.0);
    std::vector<double> x(n), vecs(m * n), v0_l1(m), states;
    const std::size_t stride =
        config_.lemma_points == 0 ? 0 : std::max<std::size_t>(1, mesh.size() / config_.lemma_points);
    double tangent_sup = 0.0;
    flow::Stepper stepper(fields, path);
    for (std::size_t q = 0; q < mesh.size(); ++q) {
      std::copy(mesh.point(q).begin(), mesh.point(q).end(), x.begin());
      std::copy(mesh.frame(q).begin(), mesh.frame(q).end(), vecs.begin());
      for (std::size_t i = 0; i < m; ++i) v0_l1[i] = l1(std::span(vecs).subspan(i * n, n));
      const bool lemma = stride != 0 && q % stride == 0 && q / stride < config_.lemma_points;
      states.clear();
      for (std::size_t step = 0;; ++step) {
        if (!geometry::gram_hadamard_check(vecs, m, n))
          throw geometry::GramBoundViolation("Gram majorisation failed at point " + std::to_string(q));
        measure[step] += mesh.weights[q] * geometry::gram_volume(vecs, m, n);
        for (std::size_t i = 0; i < m; ++i)
          tangent_sup = std::max(tangent_sup, l1(std::span(vecs).subspan(i * n, n)) / v0_l1[i]);
        if (lemma) states.insert(states.end(), x.begin(), x.end());
        if (step == N) break;
        stepper.advance(step, x, vecs);
      }
      if (lemma) {
        const auto lc = bound::lemma_flow_check(k, states, n, h);
        const auto hc = bound::holder_window_check(k, states, n, h);
        row.lemma_windows += lc.windows;
        row.lemma_violations += lc.violations;
        row.holder_violations += hc.violations;
        row.lemma_worst_ratio = std::max(row.lemma_worst_ratio, lc.worst_ratio);
      }
    }
    row.tangent_empirical = tangent_sup;
    row.hausdorff_empirical = *std::max_element(measure.begin(), measure.end());
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    row.status = "error: " + msg;
  }
  return row;
}

BoundReport Experiment::run() const {
  BoundReport report;
  report.config = config_;
  report.channels = channels();
  report.rows.resize(config_.replications);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r = next++; r < config_.replications; r = next++)
      report.rows[r] = run_replication(r, derive_replication_seed(config_.seed, r));
  };
  const std::size_t workers = std::clamp<std::size_t>(config_.workers, 1, config_.replications);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  report.summary = summarize(report.rows);
  if (report.summary.failed == report.rows.size())
    throw std::runtime_error("every replication failed; first error: " + report.rows.front().status);
  return report;
}

BoundReport run_bound_experiment(const ExperimentConfig& config, bound::Tuning tuning) {
  return Experiment(config, tuning).run();
}

ReportRow run_replication(const ExperimentConfig& config, std::size_t path_id, std::uint64_t derived_seed) {
  return Experiment(config).run_replication(path_id, derived_seed);
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double minimum(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::min_element(v.begin(), v.end());
}

}  // namespace

Summary summarize(const std::vector<ReportRow>& rows) {
  Summary s;
  s.rows = rows.size();
  std::vector<double> ts, hs, lhs, rhs, ks;
  for (const auto& r : rows) {
    if (!r.ok()) {
      ++s.failed;
      continue;
    }
    ts.push_back(r.tangent_log2_slack());
    hs.push_back(r.hausdorff_log2_slack());
    s.tangent_violations += r.tangent_violation();
    s.hausdorff_violations += r.hausdorff_violation();
    s.lemma_windows += r.lemma_windows;
    s.lemma_violations += r.lemma_violations;
    s.holder_violations += r.holder_violations;
    lhs.push_back(r.ct_beta);
    rhs.push_back(r.moment_rhs);
    ks.push_back(r.kstar);
    if (r.ct_beta > r.moment_rhs * (1.0 + 1e-12)) ++s.moment_pathwise_violations;
  }
  s.tangent_min_log2_slack = minimum(ts);
  s.tangent_median_log2_slack = median(ts);
  s.hausdorff_min_log2_slack = minimum(hs);
  s.hausdorff_median_log2_slack = median(hs);
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  s.moment_lhs_mean = mean(lhs);
  s.moment_rhs_mean = mean(rhs);
  for (int order = 1; order <= 4; ++order) {
    std::vector<double> pw;
    for (double k : ks) pw.push_back(std::pow(k, order));
    s.kstar_moments.push_back(mean(pw));
  }
  return s;
}

std::vector<std::string> report_header(std::size_t channels) {
  std::vector<std::string> h{"path_id", "base_seed", "derived_seed", "status", "T", "H", "alpha", "beta"};
  for (std::size_t c = 0; c < channels; ++c) h.push_back("holder_norm_" + std::to_string(c));
  for (const char* name :
       {"delta", "delta_branch", "p", "C_T", "S", "kstar", "tangent_bound", "tangent_bound_log2", "tangent_empirical",
        "tangent_log2_slack", "hausdorff_bound", "hausdorff_bound_log2", "hausdorff_empirical", "hausdorff_log2_slack",
        "ct_beta", "moment_rhs", "lemma_windows", "lemma_violations", "holder_violations", "lemma_worst_ratio"})
    h.emplace_back(name);
  return h;
}

std::vector<std::string> report_fields(const ReportRow& r) {
  using csv::format;
  std::vector<std::string> f{std::to_string(r.path_id), std::to_string(r.base_seed), std::to_string(r.derived_seed),
                             r.status,                  format(r.horizon),           format(r.hurst),
                             format(r.alpha),           format(r.beta)};
  for (double b : r.holder_norms) f.push_back(format(b));
  if (!r.ok()) {
    f.resize(report_header(r.holder_norms.size()).size(), "");
    return f;
  }
  for (std::string v : {format(r.delta), r.delta_branch, format(r.p), format(r.c_t), format(r.s), format(r.kstar),
                        format(r.tangent_bound), format(r.tangent_bound_log2), format(r.tangent_empirical),
                        format(r.tangent_log2_slack()), format(r.hausdorff_bound), format(r.hausdorff_bound_log2),
                        format(r.hausdorff_empirical), format(r.hausdorff_log2_slack()), format(r.ct_beta),
                        format(r.moment_rhs), std::to_string(r.lemma_windows), std::to_string(r.lemma_violations),
                        std::to_string(r.holder_violations), format(r.lemma_worst_ratio)})
    f.push_back(std::move(v));
  return f;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

void summary_lines(const Summary& s, std::ostream& out, const std::string& prefix) {
  using csv::format;
  out << prefix << "rows = " << s.rows << ", failed = " << s.failed << "\n";
  out << prefix << "tangent: violations = " << s.tangent_violations
      << ", min log2 slack = " << format(s.tangent_min_log2_slack)
      << ", median log2 slack = " << format(s.tangent_median_log2_slack) << "\n";
  out << prefix << "hausdorff: violations = " << s.hausdorff_violations
      << ", min log2 slack = " << format(s.hausdorff_min_log2_slack)
      << ", median log2 slack = " << format(s.hausdorff_median_log2_slack) << "\n";
  out << prefix << "flow estimate: windows = " << s.lemma_windows << ", violations = " << s.lemma_violations
      << ", hoelder window violations = " << s.holder_violations << "\n";
  out << prefix << "C_T^beta: mean = " << format(s.moment_lhs_mean) << ", bound mean = " << format(s.moment_rhs_mean)
      << ", pathwise violations = " << s.moment_pathwise_violations << "\n";
  out << prefix << "K* sample moments 1..4 =";
  for (double m : s.kstar_moments) out << " " << format(m);
  out << "\n";
  out << prefix << "total violations = " << s.violations() << "\n";
}

}  // namespace

std::string render_report(const BoundReport& report) {
  std::ostringstream out;
  out << "# fbmflow verify-bound report\n";
  out << "# rng = " << kRngName << "; replication seed = splitmix64(base ^ splitmix64(path_id))\n";
  out << "# holder norms are grid estimates; certification is relative to them\n";
  out << report.config.resolved().render("# config ");
  out << join(report_header(report.channels)) << "\n";
  for (const auto& r : report.rows) out << join(report_fields(r)) << "\n";
  summary_lines(report.summary, out, "# summary ");
  return out.str();
}

void write_report(const BoundReport& report, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << render_report(report);
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

void print_summary(const BoundReport& report, std::ostream& out) { summary_lines(report.summary, out, ""); }

geometry::MeasureCurve run_measure_curve(const ExperimentConfig& config) {
  config.validate();
  const auto fields = flow::make_field(config.field);
  const auto mesh = geometry::make_manifold(config.manifold, config.points);
  if (mesh.ambient_dim != fields.dimension()) throw std::invalid_argument("manifold and field dimensions differ");
  const auto path = fbm::sample_paths(fbm::TimeGrid(config.horizon, config.steps), config.hurst,
                                      fields.channel_count(), config.seed, config.method);
  const std::size_t n = mesh.ambient_dim, m = mesh.intrinsic_dim;
  geometry::MeasureCurve curve;
  curve.point_count = mesh.size();
  curve.rule = "midpoint-" + mesh.kind;
  for (std::size_t k = 0; k <= config.steps; ++k) curve.times.push_back(path.grid().time(k));
  curve.measure.assign(config.steps + 1, 0.0);
  flow::Stepper stepper(fields, path);
  std::vector<double> x(n), vecs(m * n);
  for (std::size_t q = 0; q < mesh.size(); ++q) {
    std::copy(mesh.point(q).begin(), mesh.point(q).end(), x.begin());
    std::copy(mesh.frame(q).begin(), mesh.frame(q).end(), vecs.begin());
    for (std::size_t k = 0;; ++k) {
      if (!geometry::gram_hadamard_check(vecs, m, n))
        throw geometry::GramBoundViolation("Gram majorisation failed at point " + std::to_string(q));
      curve.measure[k] += mesh.weights[q] * geometry::gram_volume(vecs, m, n);
      if (k == config.steps) break;
      stepper.advance(k, x, vecs);
    }
  }
  return curve;
}

}  // namespace fbmflow::experiment

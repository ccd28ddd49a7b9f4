#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fbmflow/bounds.hpp"
#include "fbmflow/config.hpp"
#include "fbmflow/fbm.hpp"
#include "fbmflow/manifold.hpp"

namespace fbmflow::experiment {

/// Config keys (flat, `[section]` headers allowed):
///   field, manifold, manifold.points,
///   path.H, path.T, path.grid, path.method,
///   run.replications, run.seed,
///   params.epsilon, params.delta, check.lemma_points
/// Worker count is an execution setting and is kept out of the resolved config.
struct ExperimentConfig {
  std::string field = "sine:A=0.2,omega=1;1";
  std::string manifold = "circle:r=1,n=2";
  std::size_t points = 500;
  double hurst = 0.75;
  double horizon = 1.0;
  std::size_t steps = 1024;
  fbm::Method method = fbm::Method::cholesky;
  std::size_t replications = 100;
  std::uint64_t seed = 1;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::size_t lemma_points = 8;

  std::size_t workers = 1;

  static ExperimentConfig from(const config::KeyValues& kv);
  config::KeyValues resolved() const;
  bound::HolderParams params() const;
  void validate() const;
};

/// Worker count from FBMFLOW_WORKERS, or 1.
std::size_t default_workers();

struct ReportRow {
  std::size_t path_id = 0;
  std::uint64_t base_seed = 0;
  std::uint64_t derived_seed = 0;
  std::string status = "ok";
  double horizon = 0.0, hurst = 0.0, alpha = 0.0, beta = 0.0;
  std::vector<double> holder_norms;
  double delta = 0.0;
  std::string delta_branch;
  double p = 0.0, c_t = 0.0, s = 0.0, kstar = 0.0;
  double tangent_bound = 0.0, tangent_bound_log2 = 0.0, tangent_empirical = 0.0;
  double hausdorff_bound = 0.0, hausdorff_bound_log2 = 0.0, hausdorff_empirical = 0.0;
  double ct_beta = 0.0, moment_rhs = 0.0;
  std::size_t lemma_windows = 0, lemma_violations = 0, holder_violations = 0;
  double lemma_worst_ratio = 0.0;

  bool ok() const { return status == "ok"; }
  double tangent_log2_slack() const;
  double hausdorff_log2_slack() const;
  bool tangent_violation() const;
  bool hausdorff_violation() const;
};

struct Summary {
  std::size_t rows = 0, failed = 0;
  std::size_t tangent_violations = 0, hausdorff_violations = 0;
  std::size_t lemma_windows = 0, lemma_violations = 0, holder_violations = 0;
  double tangent_min_log2_slack = 0.0, tangent_median_log2_slack = 0.0;
  double hausdorff_min_log2_slack = 0.0, hausdorff_median_log2_slack = 0.0;
  double moment_lhs_mean = 0.0, moment_rhs_mean = 0.0;
  std::size_t moment_pathwise_violations = 0;
  std::vector<double> kstar_moments;  // orders 1..4

  std::size_t violations() const {
    return tangent_violations + hausdorff_violations + lemma_violations + holder_violations +
           moment_pathwise_violations + (moment_lhs_mean > moment_rhs_mean ? 1 : 0);
  }
};

struct BoundReport {
  ExperimentConfig config;
  std::size_t channels = 0;
  std::vector<ReportRow> rows;
  Summary summary;
};

/// Shared read-only state of one experiment: fields, mesh and sampler.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config, bound::Tuning tuning = {});
  ~Experiment();
  Experiment(Experiment&&) noexcept;

  const ExperimentConfig& config() const { return config_; }
  std::size_t channels() const;

  /// Never throws for per-path failures; they end up in `status`.
  ReportRow run_replication(std::size_t path_id, std::uint64_t derived_seed) const;
  BoundReport run() const;

 private:
  struct Impl;
  ExperimentConfig config_;
  std::unique_ptr<Impl> impl_;
};

BoundReport run_bound_experiment(const ExperimentConfig& config, bound::Tuning tuning = {});
ReportRow run_replication(const ExperimentConfig& config, std::size_t path_id, std::uint64_t derived_seed);

Summary summarize(const std::vector<ReportRow>& rows);
std::vector<std::string> report_header(std::size_t channels);
std::vector<std::string> report_fields(const ReportRow& row);
std::string render_report(const BoundReport& report);
void write_report(const BoundReport& report, const std::filesystem::path& file);
void print_summary(const BoundReport& report, std::ostream& out);

/// Measure curve of the configured manifold under one path drawn with
/// `config.seed` itself.
geometry::MeasureCurve run_measure_curve(const ExperimentConfig& config);

}  // namespace fbmflow::experiment

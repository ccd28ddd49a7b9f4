#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fbmflow::fbm {

/// Uniform grid t_k = k T / N on [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const { return horizon_; }
  std::size_t steps() const { return steps_; }
  std::size_t nodes() const { return steps_ + 1; }
  double step() const { return horizon_ / static_cast<double>(steps_); }
  double time(std::size_t k) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  std::size_t steps_;
};

enum class Method { cholesky, circulant };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

/// Raised when the increment covariance fails to factor.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(std::size_t pivot, double value);
  std::size_t pivot() const { return pivot_; }
  double value() const { return value_; }

 private:
  std::size_t pivot_;
  double value_;
};

/// Raised when the circulant embedding has eigenvalues below tolerance.
class NegativeEmbedding : public std::runtime_error {
 public:
  NegativeEmbedding(std::size_t index, double value);
  std::size_t index() const { return index_; }
  double value() const { return value_; }

 private:
  std::size_t index_;
  double value_;
};

/// Multi-channel fBm sample on a uniform grid. channel(c)[k] = B_c(t_k), and
/// channel(c)[0] == 0 exactly.
class FbmPath {
 public:
  FbmPath(TimeGrid grid, double hurst, std::uint64_t seed, Method method,
          std::vector<std::vector<double>> channels);

  const TimeGrid& grid() const { return grid_; }
  double hurst() const { return hurst_; }
  std::uint64_t seed() const { return seed_; }
  Method method() const { return method_; }
  std::size_t channel_count() const { return channels_.size(); }
  std::span<const double> channel(std::size_t c) const { return channels_.at(c); }

  /// Increment B_c(t_{k+1}) - B_c(t_k).
  double increment(std::size_t c, std::size_t k) const { return channels_[c][k + 1] - channels_[c][k]; }

  /// Every `stride`-th node; the grid steps must be divisible by the stride.
  FbmPath subsample(std::size_t stride) const;

 private:
  TimeGrid grid_;
  double hurst_;
  std::uint64_t seed_;
  Method method_;
  std::vector<std::vector<double>> channels_;
};

/// E[B(s) B(t)] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double s, double t, double hurst);

/// Autocovariance of unit-spacing fractional Gaussian noise at integer lag.
double fgn_autocovariance(std::size_t lag, double hurst);

/// Generator for one (grid, H, method) triple. Holds the factorisation so it
/// can be shared read-only across workers drawing different seeds.
class Sampler {
 public:
  Sampler(TimeGrid grid, double hurst, Method method = Method::cholesky);
  ~Sampler();
  Sampler(Sampler&&) noexcept;
  Sampler& operator=(Sampler&&) noexcept;

  const TimeGrid& grid() const { return grid_; }
  double hurst() const { return hurst_; }
  Method method() const { return method_; }

  FbmPath sample(std::size_t channel_count, std::uint64_t seed) const;

  /// Row-major lower Cholesky factor of the unit-step fGn covariance (cholesky
  /// method only); sampled increments are L z scaled by h^H.
  std::span<const double> increment_factor() const;

 private:
  struct Impl;
  TimeGrid grid_;
  double hurst_;
  Method method_;
  std::unique_ptr<Impl> impl_;
};

FbmPath sample_paths(const TimeGrid& grid, double hurst, std::size_t channel_count, std::uint64_t seed,
                     Method method = Method::cholesky);

/// In-place lower Cholesky of a row-major symmetric matrix; the strict upper
/// triangle is zeroed. Throws NotPositiveDefinite naming the failing pivot.
void cholesky_in_place(std::span<double> a, std::size_t n);

/// Exact conditional refinement: a path on the grid refined `factor`-fold
/// whose values at the coarse nodes coincide with `coarse`, drawn from the fBm
/// law conditioned on those values.
FbmPath refine_path(const FbmPath& coarse, std::size_t factor, std::uint64_t seed);

/// Grid beta-Hoelder seminorm of a vector-valued sample on the nodes with
/// a <= t <= b: max over node pairs of ||f(t_j) - f(t_i)||_2 / (t_j - t_i)^beta.
/// `components` are per-dimension node sequences on `grid`.
double holder_norm(const TimeGrid& grid, std::span<const std::span<const double>> components, double beta,
                   double a, double b);

double holder_norm(const TimeGrid& grid, std::span<const double> values, double beta, double a, double b);

/// Per-channel grid Hoelder norm of a path over [0, T].
std::vector<double> channel_holder_norms(const FbmPath& path, double beta);

void write_csv(const FbmPath& path, const std::filesystem::path& file);
/// Writes the sidecar `<file>.meta` with H, N, T, seed, method and rng.
void write_metadata(const FbmPath& path, const std::filesystem::path& file);
/// Reads a path written by write_csv; metadata is taken from the sidecar when
/// present, otherwise H defaults to NaN and seed to 0.
FbmPath read_csv(const std::filesystem::path& file);

}  // namespace fbmflow::fbm

#include "fbmflow/fbm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>

#include "fbmflow/config.hpp"
#include "fbmflow/csv.hpp"
#include "fbmflow/rng.hpp"

namespace fbmflow::fbm {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("TimeGrid: horizon must be > 0");
  if (steps < 2) throw std::invalid_argument("TimeGrid: need at least 2 steps");
}

double TimeGrid::time(std::size_t k) const {
  if (k == steps_) return horizon_;
  return static_cast<double>(k) * horizon_ / static_cast<double>(steps_);
}

std::string_view to_string(Method m) { return m == Method::cholesky ? "cholesky" : "circulant"; }

Method parse_method(std::string_view s) {
  if (s == "cholesky") return Method::cholesky;
  if (s == "circulant") return Method::circulant;
  throw std::invalid_argument("unknown sampling method '" + std::string(s) + "'");
}

NotPositiveDefinite::NotPositiveDefinite(std::size_t pivot, double value)
    : std::runtime_error("covariance not positive definite at pivot " + std::to_string(pivot) + " (value " +
                         csv::format(value) + ")"),
      pivot_(pivot),
      value_(value) {}

NegativeEmbedding::NegativeEmbedding(std::size_t index, double value)
    : std::runtime_error("circulant embedding eigenvalue " + std::to_string(index) + " is negative (" +
                         csv::format(value) + ")"),
      index_(index),
      value_(value) {}

FbmPath::FbmPath(TimeGrid grid, double hurst, std::uint64_t seed, Method method,
                 std::vector<std::vector<double>> channels)
    : grid_(grid), hurst_(hurst), seed_(seed), method_(method), channels_(std::move(channels)) {
  if (channels_.empty()) throw std::invalid_argument("FbmPath: at least one channel required");
  for (const auto& ch : channels_) {
    if (ch.size() != grid_.nodes()) throw std::invalid_argument("FbmPath: channel length does not match grid");
    if (ch.front() != 0.0) throw std::invalid_argument("FbmPath: channels must start at 0");
    for (double v : ch)
      if (!std::isfinite(v)) throw std::invalid_argument("FbmPath: non-finite value");
  }
}

FbmPath FbmPath::subsample(std::size_t stride) const {
  if (stride == 0 || grid_.steps() % stride != 0)
    throw std::invalid_argument("subsample: stride must divide the step count");
  TimeGrid coarse(grid_.horizon(), grid_.steps() / stride);
  std::vector<std::vector<double>> out(channels_.size());
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    out[c].resize(coarse.nodes());
    for (std::size_t k = 0; k < coarse.nodes(); ++k) out[c][k] = channels_[c][k * stride];
  }
  return FbmPath(coarse, hurst_, seed_, method_, std::move(out));
}

double fbm_covariance(double s, double t, double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::domain_error("fbm_covariance: H must lie in (0,1)");
  if (!(s >= 0.0) || !(t >= 0.0)) throw std::domain_error("fbm_covariance: times must be >= 0");
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

double fgn_autocovariance(std::size_t lag, double hurst) {
  const double h2 = 2.0 * hurst;
  const double k = static_cast<double>(lag);
  if (lag == 0) return 1.0;
  return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(k - 1.0, h2));
}

namespace {

// Four partial sums keep the loop pipelined without reassociating globally,
// so results are identical on every run.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("sampler: H must lie in (0,1)");
}

}  // namespace

void cholesky_in_place(std::span<double> a, std::size_t n) {
  if (a.size() != n * n) throw std::invalid_argument("cholesky: matrix size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    double* row_i = a.data() + i * n;
    for (std::size_t j = 0; j < i; ++j) {
      const double* row_j = a.data() + j * n;
      row_i[j] = (row_i[j] - dot(row_i, row_j, j)) / row_j[j];
    }
    const double d = row_i[i] - dot(row_i, row_i, i);
    if (!(d > 0.0) || !std::isfinite(d)) throw NotPositiveDefinite(i, d);
    row_i[i] = std::sqrt(d);
    std::fill(row_i + i + 1, row_i + n, 0.0);
  }
}

struct Sampler::Impl {
  std::vector<double> factor;       // cholesky: N x N row-major lower
  std::vector<double> sqrt_eigen;   // circulant: sqrt(lambda_k / M)
  fftw_plan plan = nullptr;

  ~Impl() {
    if (plan) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

Sampler::Sampler(TimeGrid grid, double hurst, Method method)
    : grid_(grid), hurst_(hurst), method_(method), impl_(std::make_unique<Impl>()) {
  check_hurst(hurst);
  const std::size_t n = grid_.steps();
  if (method_ == Method::cholesky) {
    auto& l = impl_->factor;
    l.assign(n * n, 0.0);
    std::vector<double> gamma(n);
    for (std::size_t k = 0; k < n; ++k) gamma[k] = fgn_autocovariance(k, hurst);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) l[i * n + j] = gamma[i - j];
    cholesky_in_place(l, n);
    return;
  }

  const std::size_t m = 2 * n;
  std::vector<std::complex<double>> c(m), lambda(m);
  for (std::size_t j = 0; j <= n; ++j) c[j] = fgn_autocovariance(j, hurst);
  for (std::size_t j = 1; j < n; ++j) c[m - j] = c[j];
  {
    std::lock_guard lock(fftw_planner_mutex());
    impl_->plan = fftw_plan_dft_1d(static_cast<int>(m), reinterpret_cast<fftw_complex*>(c.data()),
                                   reinterpret_cast<fftw_complex*>(lambda.data()), FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  fftw_execute_dft(impl_->plan, reinterpret_cast<fftw_complex*>(c.data()),
                   reinterpret_cast<fftw_complex*>(lambda.data()));
  double lmax = 0.0;
  for (const auto& v : lambda) lmax = std::max(lmax, v.real());
  const double tol = 1e-10 * lmax;
  impl_->sqrt_eigen.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    double v = lambda[k].real();
    if (v < -tol) throw NegativeEmbedding(k, v);
    impl_->sqrt_eigen[k] = std::sqrt(std::max(v, 0.0) / static_cast<double>(m));
  }
}

Sampler::~Sampler() = default;
Sampler::Sampler(Sampler&&) noexcept = default;
Sampler& Sampler::operator=(Sampler&&) noexcept = default;

std::span<const double> Sampler::increment_factor() const {
  if (method_ != Method::cholesky) throw std::logic_error("increment_factor: only available for cholesky");
  return impl_->factor;
}

FbmPath Sampler::sample(std::size_t channel_count, std::uint64_t seed) const {
  if (channel_count == 0) throw std::invalid_argument("sample: channel_count must be >= 1");
  const std::size_t n = grid_.steps();
  const double scale = std::pow(grid_.step(), hurst_);
  std::vector<std::vector<double>> channels(channel_count, std::vector<double>(n + 1, 0.0));
  std::vector<double> inc(n);

  for (std::size_t c = 0; c < channel_count; ++c) {
    NormalStream normals(channel_seed(seed, c));
    if (method_ == Method::cholesky) {
      std::vector<double> z(n);
      for (auto& v : z) v = normals.next();
      const double* l = impl_->factor.data();
      for (std::size_t i = 0; i < n; ++i) inc[i] = scale * dot(l + i * n, z.data(), i + 1);
    } else {
      const std::size_t m = 2 * n;
      std::vector<std::complex<double>> xi(m), y(m);
      for (std::size_t k = 0; k < m; ++k) {
        const double re = normals.next();
        const double im = normals.next();
        xi[k] = impl_->sqrt_eigen[k] * std::complex<double>(re, im);
      }
      fftw_execute_dft(impl_->plan, reinterpret_cast<fftw_complex*>(xi.data()),
                       reinterpret_cast<fftw_complex*>(y.data()));
      for (std::size_t i = 0; i < n; ++i) inc[i] = scale * y[i].real();
    }
    auto& b = channels[c];
    for (std::size_t i = 0; i < n; ++i) b[i + 1] = b[i] + inc[i];
  }
  return FbmPath(grid_, hurst_, seed, method_, std::move(channels));
}

FbmPath sample_paths(const TimeGrid& grid, double hurst, std::size_t channel_count, std::uint64_t seed,
                     Method method) {
  return Sampler(grid, hurst, method).sample(channel_count, seed);
}

FbmPath refine_path(const FbmPath& coarse, std::size_t factor, std::uint64_t seed) {
  if (factor == 0) throw std::invalid_argument("refine_path: factor must be >= 1");
  if (factor == 1) return coarse;
  const double hurst = coarse.hurst();
  const TimeGrid& cg = coarse.grid();
  const TimeGrid fine_grid(cg.horizon(), cg.steps() * factor);
  const FbmPath draw = sample_paths(fine_grid, hurst, coarse.channel_count(), seed, Method::cholesky);

  // Matheron's rule: fine | coarse = draw + S_fc S_cc^{-1} (coarse - draw_c).
  const std::size_t nc = cg.steps();
  std::vector<double> scc(nc * nc);
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t j = 0; j <= i; ++j) scc[i * nc + j] = fbm_covariance(cg.time(i + 1), cg.time(j + 1), hurst);
  cholesky_in_place(scc, nc);

  std::vector<std::vector<double>> out(coarse.channel_count());
  std::vector<double> w(nc);
  for (std::size_t c = 0; c < coarse.channel_count(); ++c) {
    const auto cv = coarse.channel(c);
    const auto dv = draw.channel(c);
    for (std::size_t i = 0; i < nc; ++i) w[i] = cv[i + 1] - dv[(i + 1) * factor];
    for (std::size_t i = 0; i < nc; ++i) w[i] = (w[i] - dot(&scc[i * nc], w.data(), i)) / scc[i * nc + i];
    for (std::size_t i = nc; i-- > 0;) {
      double s = w[i];
      for (std::size_t j = i + 1; j < nc; ++j) s -= scc[j * nc + i] * w[j];
      w[i] = s / scc[i * nc + i];
    }
    auto& f = out[c];
    f.assign(dv.begin(), dv.end());
    for (std::size_t i = 1; i < fine_grid.nodes(); ++i) {
      if (i % factor == 0) {
        f[i] = cv[i / factor];
        continue;
      }
      const double ti = fine_grid.time(i);
      double s = 0.0;
      for (std::size_t j = 0; j < nc; ++j) s += fbm_covariance(ti, cg.time(j + 1), hurst) * w[j];
      f[i] += s;
    }
    f[0] = 0.0;
  }
  return FbmPath(fine_grid, hurst, coarse.seed(), Method::cholesky, std::move(out));
}

namespace {

std::pair<std::size_t, std::size_t> window_nodes(const TimeGrid& grid, double a, double b) {
  if (!(a < b)) throw std::domain_error("holder_norm: need a < b");
  const double h = grid.step();
  const double slack = 1e-9;
  const double lo = std::max(0.0, std::ceil(a / h - slack));
  const double hi = std::min(static_cast<double>(grid.steps()), std::floor(b / h + slack));
  if (!(hi >= lo + 1.0)) throw std::domain_error("holder_norm: window contains fewer than 2 grid nodes");
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

double holder_norm(const TimeGrid& grid, std::span<const std::span<const double>> components, double beta,
                   double a, double b) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::domain_error("holder_norm: beta must lie in (0,1]");
  if (components.empty()) throw std::invalid_argument("holder_norm: no components");
  for (auto comp : components)
    if (comp.size() != grid.nodes()) throw std::invalid_argument("holder_norm: sample length does not match grid");
  const auto [first, last] = window_nodes(grid, a, b);
  const std::size_t width = last - first;
  std::vector<double> inv_lag(width + 1, 0.0);
  for (std::size_t l = 1; l <= width; ++l) inv_lag[l] = std::pow(static_cast<double>(l) * grid.step(), -beta);

  double best = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    for (std::size_t j = i + 1; j <= last; ++j) {
      double sq = 0.0;
      for (auto comp : components) {
        const double d = comp[j] - comp[i];
        sq += d * d;
      }
      best = std::max(best, std::sqrt(sq) * inv_lag[j - i]);
    }
  }
  return best;
}

double holder_norm(const TimeGrid& grid, std::span<const double> values, double beta, double a, double b) {
  const std::span<const double> one[] = {values};
  return holder_norm(grid, one, beta, a, b);
}

std::vector<double> channel_holder_norms(const FbmPath& path, double beta) {
  std::vector<double> out(path.channel_count());
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = holder_norm(path.grid(), path.channel(c), beta, 0.0, path.grid().horizon());
  return out;
}

void write_csv(const FbmPath& path, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "t";
  for (std::size_t c = 0; c < path.channel_count(); ++c) out << ",channel_" << c;
  out << "\n";
  for (std::size_t k = 0; k < path.grid().nodes(); ++k) {
    out << csv::format(path.grid().time(k));
    for (std::size_t c = 0; c < path.channel_count(); ++c) out << "," << csv::format(path.channel(c)[k]);
    out << "\n";
  }
}

void write_metadata(const FbmPath& path, const std::filesystem::path& file) {
  config::KeyValues kv;
  kv.set("hurst", csv::format(path.hurst()));
  kv.set("steps", std::to_string(path.grid().steps()));
  kv.set("horizon", csv::format(path.grid().horizon()));
  kv.set("seed", std::to_string(path.seed()));
  kv.set("method", std::string(to_string(path.method())));
  kv.set("channels", std::to_string(path.channel_count()));
  kv.set("rng", std::string(kRngName));
  kv.set("rng.channel_key", "seed xor channel");
  std::ofstream out(file.string() + ".meta", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write metadata for " + file.string());
  out << kv.render();
}

FbmPath read_csv(const std::filesystem::path& file) {
  const auto table = csv::read(file);
  if (table.header.size() < 2 || table.header[0] != "t")
    throw std::runtime_error("path csv: expected header t,channel_0,...");
  if (table.rows.size() < 3) throw std::runtime_error("path csv: need at least 3 rows");
  const std::size_t steps = table.rows.size() - 1;
  const TimeGrid grid(table.rows.back()[0], steps);
  for (std::size_t k = 0; k < table.rows.size(); ++k)
    if (std::abs(table.rows[k][0] - grid.time(k)) > 1e-9 * grid.horizon())
      throw std::runtime_error("path csv: grid is not uniform from 0");

  std::vector<std::vector<double>> channels(table.header.size() - 1, std::vector<double>(table.rows.size()));
  for (std::size_t k = 0; k < table.rows.size(); ++k)
    for (std::size_t c = 0; c + 1 < table.header.size(); ++c) channels[c][k] = table.rows[k][c + 1];

  double hurst = std::nan("");
  std::uint64_t seed = 0;
  Method method = Method::cholesky;
  const std::filesystem::path meta = file.string() + ".meta";
  if (std::filesystem::exists(meta)) {
    const auto kv = config::KeyValues::load(meta);
    hurst = kv.get_double("hurst", hurst);
    seed = kv.get_uint64("seed", 0);
    method = parse_method(kv.get_string("method", "cholesky"));
  }
  return FbmPath(grid, hurst, seed, method, std::move(channels));
}

}  // namespace fbmflow::fbm

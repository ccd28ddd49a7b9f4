#include "fbmflow/fractional.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fbmflow/log.hpp"

namespace fbmflow::frac {

SampledFunction::SampledFunction(double a_, double b_, std::vector<double> v) : a(a_), b(b_), values(std::move(v)) {
  if (!(a < b)) throw std::invalid_argument("SampledFunction: need a < b");
  if (values.size() < 2) throw std::invalid_argument("SampledFunction: need at least 2 nodes");
  for (double x : values)
    if (!std::isfinite(x)) throw std::invalid_argument("SampledFunction: non-finite value");
}

SampledFunction SampledFunction::from(const std::function<double(double)>& f, double a, double b,
                                      std::size_t steps) {
  std::vector<double> v(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    v[k] = f(k == steps ? b : a + (b - a) * static_cast<double>(k) / static_cast<double>(steps));
  return SampledFunction(a, b, std::move(v));
}

double SampledFunction::node(std::size_t k) const {
  if (k == steps()) return b;
  return a + (b - a) * static_cast<double>(k) / static_cast<double>(steps());
}

SampledFunction SampledFunction::reversed() const {
  std::vector<double> v(values.rbegin(), values.rend());
  return SampledFunction(a, b, std::move(v));
}

namespace {

std::vector<double> rl_left(const std::vector<double>& f, double order, double h) {
  const std::size_t n = f.size() - 1;
  std::vector<double> p(n + 2), kpow(n + 1);
  for (std::size_t m = 0; m <= n + 1; ++m) p[m] = std::pow(static_cast<double>(m), order + 1.0);
  for (std::size_t m = 0; m <= n; ++m) kpow[m] = std::pow(static_cast<double>(m), order);
  std::vector<double> c(n + 1, 0.0);  // interior weight for lag m
  for (std::size_t m = 1; m <= n; ++m) c[m] = p[m + 1] - 2.0 * p[m] + p[m - 1];

  const double scale = std::pow(h, order) / std::tgamma(order + 2.0);
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    double s = (p[k - 1] - (kd - 1.0 - order) * kpow[k]) * f[0] + f[k];
    for (std::size_t j = 1; j < k; ++j) s += c[k - j] * f[j];
    out[k] = scale * s;
  }
  return out;
}

// Uncorrected product-integration rule for the left Weyl derivative.
std::vector<double> weyl_left_base(const std::vector<double>& f, double order, double h) {
  const std::size_t n = f.size() - 1;
  const double a = order;
  std::vector<double> neg(n + 1, 0.0), pos(n + 1, 0.0);  // m^{-a}, m^{1-a}
  for (std::size_t m = 1; m <= n; ++m) {
    neg[m] = std::pow(static_cast<double>(m), -a);
    pos[m] = std::pow(static_cast<double>(m), 1.0 - a);
  }
  // P_m = int_m^{m+1} u^{-1-a} du,  Q_m = int_m^{m+1} (u - m) u^{-1-a} du.
  std::vector<double> P(n, 0.0), Q(n, 0.0);
  Q[0] = 1.0 / (1.0 - a);
  for (std::size_t m = 1; m < n; ++m) {
    P[m] = (neg[m] - neg[m + 1]) / a;
    Q[m] = (pos[m + 1] - pos[m]) / (1.0 - a) - static_cast<double>(m) * P[m];
  }
  const double ha = std::pow(h, -a);
  const double g = 1.0 / std::tgamma(1.0 - a);
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    double j = 0.0;
    for (std::size_t m = 1; m < k; ++m) j += (f[k] - f[k - m]) * P[m];
    for (std::size_t m = 0; m < k; ++m) j -= (f[k - m - 1] - f[k - m]) * Q[m];
    out[k] = g * (f[k] * ha * neg[k] + a * ha * j);
  }
  return out;
}

// Stencil j (1-based) annihilating affine data: g_j - g_0 - j (g_{q+1} - g_0)/(q+1).
double stencil(const std::vector<double>& g, std::size_t j, std::size_t q) {
  return g[j] - g[0] - static_cast<double>(j) * (g[q + 1] - g[0]) / static_cast<double>(q + 1);
}

// Solves A x = b for small dense systems with partial pivoting; A row-major q x q.
std::vector<double> solve_small(std::vector<double> A, std::vector<double> b) {
  const std::size_t q = b.size();
  for (std::size_t c = 0; c < q; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < q; ++r)
      if (std::abs(A[r * q + c]) > std::abs(A[piv * q + c])) piv = r;
    if (A[piv * q + c] == 0.0) throw std::domain_error("endpoint correction: singular exponent set");
    if (piv != c) {
      for (std::size_t k = 0; k < q; ++k) std::swap(A[c * q + k], A[piv * q + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < q; ++r) {
      const double f = A[r * q + c] / A[c * q + c];
      for (std::size_t k = c; k < q; ++k) A[r * q + k] -= f * A[c * q + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(q);
  for (std::size_t r = q; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < q; ++k) s -= A[r * q + k] * x[k];
    x[r] = s / A[r * q + r];
  }
  return x;
}

std::vector<double> weyl_left(const std::vector<double>& f, double order, double h,
                              const DerivativeOptions& options) {
  auto out = weyl_left_base(f, order, h);
  if (!options.correct_endpoint) return out;

  std::vector<double> exps = options.endpoint_exponents;
  if (exps.empty()) exps.push_back(order);
  const std::size_t q = exps.size();
  const std::size_t n = f.size() - 1;
  if (n < q + 1) throw std::invalid_argument("weyl_derivative: too few nodes for the endpoint correction");
  for (double nu : exps)
    if (!(nu > 0.0) || nu == 1.0) throw std::invalid_argument("weyl_derivative: endpoint exponents must be > 0, != 1");

  // A[l][j] = stencil_j(x^{nu_l}); residual R[l][k] = exact - rule on x^{nu_l}.
  std::vector<double> A(q * q);
  std::vector<std::vector<double>> residual(q);
  for (std::size_t l = 0; l < q; ++l) {
    std::vector<double> g(n + 1);
    for (std::size_t k = 0; k <= n; ++k) g[k] = std::pow(static_cast<double>(k) * h, exps[l]);
    for (std::size_t j = 1; j <= q; ++j) A[l * q + (j - 1)] = stencil(g, j, q);
    const auto rule = weyl_left_base(g, order, h);
    const double c = std::tgamma(exps[l] + 1.0) / std::tgamma(exps[l] + 1.0 - order);
    residual[l].resize(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k)
      residual[l][k] = c * std::pow(static_cast<double>(k) * h, exps[l] - order) - rule[k];
  }
  std::vector<double> sf(q);
  for (std::size_t j = 1; j <= q; ++j) sf[j - 1] = stencil(f, j, q);
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<double> rhs(q);
    for (std::size_t l = 0; l < q; ++l) rhs[l] = residual[l][k];
    const auto w = solve_small(A, rhs);
    for (std::size_t j = 0; j < q; ++j) out[k] += w[j] * sf[j];
  }
  return out;
}

}  // namespace

SampledFunction rl_integral(const SampledFunction& f, double order, Side side) {
  if (!(order > 0.0) || !std::isfinite(order)) throw std::domain_error("rl_integral: order must be > 0");
  if (side == Side::left) return SampledFunction(f.a, f.b, rl_left(f.values, order, f.step()));
  auto r = f.reversed();
  return SampledFunction(f.a, f.b, rl_left(r.values, order, f.step())).reversed();
}

SampledFunction weyl_derivative(const SampledFunction& f, double order, Side side, const DerivativeOptions& options) {
  if (!(order > 0.0 && order < 1.0)) throw std::domain_error("weyl_derivative: order must lie in (0,1)");
  if (options.warn_if_rough) {
    const double lambda = holder_exponent_estimate(f);
    if (lambda <= order)
      warn("weyl_derivative: estimated Hoelder exponent " + std::to_string(lambda) + " <= order " +
           std::to_string(order) + "; the derivative may not exist");
  }
  if (side == Side::left) return SampledFunction(f.a, f.b, weyl_left(f.values, order, f.step(), options));
  auto r = f.reversed();
  return SampledFunction(f.a, f.b, weyl_left(r.values, order, f.step(), options)).reversed();
}

namespace {

void check_same_nodes(const SampledFunction& f, const SampledFunction& g) {
  if (f.values.size() != g.values.size() || f.a != g.a || f.b != g.b)
    throw std::invalid_argument("zahle_integral: f and g must share nodes");
}

}  // namespace

double zahle_integral(const SampledFunction& f, const SampledFunction& g, double order) {
  check_same_nodes(f, g);
  if (!(order > 0.0 && order < 1.0)) throw std::domain_error("zahle_integral: order must lie in (0,1)");
  const double lambda = holder_exponent_estimate(f);
  const double mu = holder_exponent_estimate(g);
  if (lambda + mu <= 1.0)
    throw UndefinedIntegral("zahle_integral: estimated Hoelder exponents " + std::to_string(lambda) + " + " +
                            std::to_string(mu) + " <= 1");
  if (!(order < lambda && 1.0 - order < mu))
    warn("zahle_integral: order " + std::to_string(order) + " outside the admissible range (" +
         std::to_string(1.0 - mu) + ", " + std::to_string(lambda) + ")");

  const std::size_t n = f.steps();
  const double fa = f.values.front();
  const double gb = g.values.back();
  std::vector<double> fc(n + 1), gc(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    fc[k] = f.values[k] - fa;
    gc[k] = g.values[k] - gb;
  }
  DerivativeOptions quiet;
  quiet.warn_if_rough = false;
  const auto df = weyl_derivative(SampledFunction(f.a, f.b, std::move(fc)), order, Side::left, quiet);
  const auto dg = weyl_derivative(SampledFunction(g.a, g.b, std::move(gc)), 1.0 - order, Side::right, quiet);

  double s = 0.5 * (df.values[0] * dg.values[0] + df.values[n] * dg.values[n]);
  for (std::size_t k = 1; k < n; ++k) s += df.values[k] * dg.values[k];
  return -s * f.step() + fa * (g.values.back() - g.values.front());
}

std::vector<double> zahle_integral(std::span<const SampledFunction> f, const SampledFunction& g, double order) {
  std::vector<double> out;
  out.reserve(f.size());
  for (const auto& fi : f) out.push_back(zahle_integral(fi, g, order));
  return out;
}

double riemann_stieltjes_sum(const SampledFunction& f, const SampledFunction& g) {
  check_same_nodes(f, g);
  double s = 0.0;
  for (std::size_t k = 0; k < f.steps(); ++k) s += f.values[k] * (g.values[k + 1] - g.values[k]);
  return s;
}

double w_norm(const SampledFunction& g, double order, WNormKernel kernel) {
  if (!(order > 0.0 && order < 0.5)) throw std::domain_error("w_norm: order must lie in (0, 1/2)");
  const std::size_t n = g.steps();
  const double h = g.step();
  const double a = order;
  const auto& v = g.values;

  // Lag powers (m h)^{-(1-a)} and, for the increment kernel, cell moments
  // P_m = int_m^{m+1} u^{a-2} du, Q_m = int_m^{m+1} (u - m) u^{a-2} du.
  std::vector<double> first(n + 1, 0.0), P(n, 0.0), Q(n, 0.0), window(n + 1, 0.0);
  for (std::size_t m = 1; m <= n; ++m) {
    const double md = static_cast<double>(m);
    first[m] = std::pow(md * h, a - 1.0);
    window[m] = std::pow(md * h, a - 2.0);
  }
  for (std::size_t m = 1; m < n; ++m) {
    const double md = static_cast<double>(m);
    P[m] = (std::pow(md + 1.0, a - 1.0) - std::pow(md, a - 1.0)) / (a - 1.0);
    Q[m] = (std::pow(md + 1.0, a) - std::pow(md, a)) / a - md * P[m];
  }
  const double cell_scale = std::pow(h, a - 1.0);

  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double inner = 0.0;  // running integral from s = x_i to the current t
    for (std::size_t j = i + 1; j <= n; ++j) {
      const std::size_t m = j - 1 - i;
      const double d0 = std::abs(v[j - 1] - v[i]);
      const double d1 = std::abs(v[j] - v[i]);
      if (kernel == WNormKernel::increment) {
        inner += m == 0 ? cell_scale * d1 / a : cell_scale * (d0 * P[m] + (d1 - d0) * Q[m]);
      } else {
        inner += 0.5 * h * (d0 + d1);
      }
      const double tail = kernel == WNormKernel::increment ? inner : inner * window[j - i];
      best = std::max(best, d1 * first[j - i] + tail);
    }
  }
  return best;
}

double holder_exponent_estimate(const SampledFunction& f) {
  const std::size_t n = f.steps();
  std::vector<double> lx, ly;
  bool all_zero = true;
  for (std::size_t lag = 1; lag <= std::max<std::size_t>(1, n / 4); lag *= 2) {
    double s = 0.0;
    for (std::size_t k = 0; k + lag <= n; ++k) s += std::abs(f.values[k + lag] - f.values[k]);
    s /= static_cast<double>(n + 1 - lag);
    if (s > 0.0) {
      all_zero = false;
      lx.push_back(std::log(static_cast<double>(lag)));
      ly.push_back(std::log(s));
    }
  }
  if (all_zero || lx.size() < 2) return 1.0;
  const double cnt = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / cnt;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / cnt;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return std::clamp(sxy / sxx, 0.0, 1.0);
}

}  // namespace fbmflow::frac

#include "fbmflow/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fbmflow::bound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

HolderParams HolderParams::make(double hurst, double epsilon, double delta) {
  require(hurst > 0.5 && hurst < 1.0, "H must lie in (1/2, 1)");
  require(epsilon > 0.0 && delta > 0.0, "epsilon and delta must be positive");
  HolderParams p;
  p.hurst = hurst;
  p.epsilon = epsilon;
  p.delta = delta;
  p.alpha = 1.0 - hurst + delta;
  p.beta = hurst - epsilon;
  require(delta > epsilon, "need delta > epsilon");
  require(p.alpha > 1.0 - hurst && p.alpha < 0.5, "need 1 - H < alpha < 1/2");
  require(p.alpha + p.beta > 1.0, "need alpha + beta > 1");
  require(p.beta > p.alpha, "need beta > alpha");
  return p;
}

HolderParams default_params(double hurst) {
  require(hurst > 0.5 && hurst < 1.0, "H must lie in (1/2, 1)");
  return HolderParams::make(hurst, (hurst - 0.5) / 4.0, (hurst - 0.5) / 2.0);
}

double gamma(double x) { return std::tgamma(x); }

double k1(double alpha, double beta) {
  require(alpha + beta > 1.0, "k1 needs alpha + beta > 1");
  return (2.0 * alpha + beta - 1.0) / ((alpha + beta - 1.0) * gamma(alpha));
}

double c_alpha(double alpha) { return 1.0 / gamma(1.0 - alpha); }

namespace {

std::vector<flow::FieldConstants> checked_constants(const flow::VectorFieldSet& fields, std::size_t n) {
  require(n == fields.dimension(), "dimension does not match the field set");
  require(fields.conforming(), "field set '" + fields.key() + "' is non-conforming (unbounded constants)");
  std::vector<flow::FieldConstants> out;
  for (std::size_t g = 0; g < fields.channel_count(); ++g) out.push_back(fields.constants(g));
  return out;
}

}  // namespace

ConstantChain::ConstantChain(const HolderParams& params, const flow::VectorFieldSet& fields,
                             std::span<const double> holder_norms, std::size_t n, Tuning tuning)
    : ConstantChain(params, checked_constants(fields, n), holder_norms, n, tuning) {}

ConstantChain::ConstantChain(const HolderParams& params, std::span<const flow::FieldConstants> constants,
                             std::span<const double> holder_norms, std::size_t n, Tuning tuning)
    : params_(params), n_(n) {
  require(params.beta > params.alpha, "degenerate exponents: beta <= alpha");
  require(n >= 1, "dimension must be >= 1");
  require(holder_norms.size() == constants.size(), "one Hoelder norm per channel is required");
  for (std::size_t g = 0; g < constants.size(); ++g) {
    const auto& k = constants[g];
    require(std::isfinite(k.sup) && std::isfinite(k.lipschitz) && std::isfinite(k.derivative_lipschitz),
            "field constants must be finite");
    require(std::isfinite(holder_norms[g]) && holder_norms[g] >= 0.0, "Hoelder norms must be finite and >= 0");
    sup_.push_back(k.sup);
    lip_.push_back(k.lipschitz);
    dlip_.push_back(k.derivative_lipschitz);
    norm_.push_back(holder_norms[g]);
  }
  const double a = params.alpha, b = params.beta;
  k1_ = tuning.k1_scale * bound::k1(a, b);
  c_alpha_ = bound::c_alpha(a);
  double sm = 0.0, sm1 = 0.0, s1a = 0.0, sb = 0.0;
  for (std::size_t g = 0; g < sup_.size(); ++g) {
    sm += sup_[g] * norm_[g];
    sm1 += lip_[g] * norm_[g];
    s1a += m1_alpha(g) * norm_[g];
    sb += b_gamma1(g) * norm_[g];
  }
  m_alpha_ = sm / (1.0 - a);
  mtilde1_alpha_ = s1a / (2.0 - 2.0 * a);
  b1_ = sb;
  b2_ = b1_ / (1.0 - a + b);
  kstar_majorant_ = sm == 0.0 ? 0.0 : (sm1 == 0.0 ? kInf : sm / (a * sm1));
}

double ConstantChain::m1_alpha(std::size_t g) const {
  return params_.alpha * lip_.at(g) / (1.0 - 2.0 * params_.alpha);
}

double ConstantChain::b_gamma1(std::size_t g) const {
  const double a = params_.alpha;
  return a * lip_.at(g) / ((params_.beta - a) * gamma(1.0 - a));
}

double ConstantChain::k_delta(double delta) const {
  const double cn = c_alpha_ * static_cast<double>(n_) * k1_;
  const double den = 1.0 - cn * mtilde1_alpha_ * std::pow(delta, params_.beta);
  if (!(den > 0.0)) return kInf;
  return cn * m_alpha_ / den;
}

double ConstantChain::a_gamma1(std::size_t g, double delta) const {
  const double second = dlip_.at(g) == 0.0 ? 0.0 : params_.alpha * dlip_[g] * kstar(delta) * std::pow(delta, params_.beta);
  return (lip_[g] + second) / gamma(1.0 - params_.alpha);
}

double ConstantChain::a1(double delta) const {
  double s = 0.0;
  for (std::size_t g = 0; g < norm_.size(); ++g)
    if (norm_[g] != 0.0) s += a_gamma1(g, delta) * norm_[g];
  return s;
}

double ConstantChain::a2_majorant_gamma(std::size_t g) const {
  const double second = dlip_.at(g) == 0.0 ? 0.0 : params_.alpha * dlip_[g] * kstar_majorant_;
  return (lip_[g] + second) / gamma(1.0 - params_.alpha) / (1.0 - params_.alpha);
}

double ConstantChain::a2_majorant() const {
  double s = 0.0;
  for (std::size_t g = 0; g < norm_.size(); ++g)
    if (norm_[g] != 0.0) s += a2_majorant_gamma(g) * norm_[g];
  return s;
}

double ConstantChain::s_factor(double delta) const {
  const double nk = static_cast<double>(n_) * k1_;
  const double db = std::pow(delta, params_.beta);
  const double inner = nk * a2(delta) * db / (1.0 - nk * b2_ * db);
  return 1.0 / (1.0 - inner);
}

bool ConstantChain::degenerate() const {
  for (std::size_t g = 0; g < norm_.size(); ++g)
    if (norm_[g] != 0.0 && (lip_[g] != 0.0 || dlip_[g] != 0.0)) return false;
  return true;
}

std::string to_string(DeltaBranch b) {
  switch (b) {
    case DeltaBranch::delta0:
      return "delta0";
    case DeltaBranch::bisection:
      return "bisection";
    case DeltaBranch::degenerate:
      return "degenerate";
  }
  return "?";
}

DeltaSolution solve_delta(const ConstantChain& chain, double horizon) {
  DeltaSolution sol;
  const double beta = chain.params().beta;
  const double scale = 3.0 * static_cast<double>(chain.dimension()) * chain.k1();
  const double ck = chain.c_alpha() * chain.mtilde1_alpha();
  if (chain.degenerate()) {
    require(horizon > 0.0, "horizon must be positive");
    sol.delta0 = kInf;
    sol.delta = horizon;
    sol.branch = DeltaBranch::degenerate;
    return sol;
  }
  auto residual = [&](double d) {
    const double lhs = std::pow(d, -beta);
    return (lhs - scale * std::max(ck, chain.a2(d) + chain.b2())) / lhs;
  };
  // F is strictly decreasing in delta; its root is where the second branch binds.
  auto F = [&](double d) { return std::pow(d, -beta) - scale * (chain.a2(d) + chain.b2()); };

  sol.delta0 = ck > 0.0 ? std::pow(scale * ck, -1.0 / beta) : kInf;
  if (std::isfinite(sol.delta0) && F(sol.delta0) >= 0.0) {
    sol.delta = sol.delta0;
    sol.branch = DeltaBranch::delta0;
    sol.residual = std::abs(residual(sol.delta));
    return sol;
  }

  sol.branch = DeltaBranch::bisection;
  std::size_t it = 0;
  double hi = std::isfinite(sol.delta0) ? sol.delta0 : 1.0;
  while (!std::isfinite(sol.delta0) && F(hi) > 0.0 && it < 200) {
    hi *= 2.0;
    ++it;
  }
  double lo = hi / 2.0;
  while (!(F(lo) > 0.0) && it < 200) {
    hi = lo;
    lo /= 2.0;
    ++it;
  }
  double llo = std::log(lo), lhi = std::log(hi);
  double d = lo;
  for (; it < 200; ++it) {
    const double mid = 0.5 * (llo + lhi);
    d = std::exp(mid);
    const double f = F(d);
    if (std::abs(f) / std::pow(d, -beta) < 1e-13 || lhi - llo < 1e-15) break;
    (f > 0.0 ? llo : lhi) = mid;
  }
  sol.iterations = it;
  sol.delta = d;
  sol.residual = std::abs(residual(d));
  if (it >= 200 || sol.residual > 1e-10)
    throw std::logic_error("delta bisection did not converge (residual " + std::to_string(sol.residual) + ")");
  return sol;
}

BoundConstants compute_constants(const HolderParams& params, const flow::VectorFieldSet& fields,
                                 std::span<const double> holder_norms, std::size_t n, double horizon, Tuning tuning) {
  return compute_constants(ConstantChain(params, fields, holder_norms, n, tuning), horizon);
}

BoundConstants compute_constants(const ConstantChain& chain, double horizon) {
  require(horizon > 0.0, "horizon must be positive");
  const auto holder_norms = chain.holder_norms();
  const auto& params = chain.params();
  const std::size_t n = chain.dimension();
  BoundConstants k;
  k.params = params;
  k.dimension = n;
  k.horizon = horizon;
  k.holder_norms.assign(holder_norms.begin(), holder_norms.end());
  k.k1 = chain.k1();
  k.c_alpha = chain.c_alpha();
  k.m_alpha = chain.m_alpha();
  k.mtilde1_alpha = chain.mtilde1_alpha();
  k.b1 = chain.b1();
  k.b2 = chain.b2();
  k.a2_majorant = chain.a2_majorant();
  k.solution = solve_delta(chain, horizon);
  k.delta = k.solution.delta;
  k.k_delta = chain.k_delta(k.delta);
  k.kstar = chain.kstar(k.delta);
  k.a1 = chain.a1(k.delta);
  k.a2 = chain.a2(k.delta);
  k.p = horizon / k.delta;
  if (k.solution.branch == DeltaBranch::degenerate) {
    k.s = 1.0;
    k.c_t = 0.0;
  } else {
    k.s = chain.s_factor(k.delta);
    k.c_t = 1.0 / k.delta;
  }
  const double nk = static_cast<double>(n) * k.k1;
  const double db = std::pow(k.delta, params.beta);
  const double third = 1.0 / 3.0 + 1e-12;
  k.condition_k = k.c_alpha * nk * k.mtilde1_alpha * db <= third;
  k.condition_b = nk * k.b2 * db <= third;
  k.condition_ab = nk * k.a2 * db <= third;
  if (k.solution.branch == DeltaBranch::degenerate) k.condition_k = k.condition_b = k.condition_ab = true;

  double rhs = 0.0;
  for (std::size_t g = 0; g < chain.channels(); ++g) {
    const double m1t = chain.m1_alpha(g) / (2.0 - 2.0 * params.alpha);
    const double b2g = chain.b_gamma1(g) / (1.0 - params.alpha + params.beta);
    const double a2g = holder_norms[g] == 0.0 ? 0.0 : chain.a2_majorant_gamma(g);
    rhs += (k.c_alpha * m1t + a2g + b2g) * holder_norms[g];
  }
  k.moment_rhs = 3.0 * nk * rhs;
  return k;
}

namespace {

std::size_t interval_count(const BoundConstants& k, double horizon) {
  require(horizon > 0.0, "T must be positive");
  if (k.solution.branch == DeltaBranch::degenerate) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon / k.delta)));
}

}  // namespace

GrowthBound tangent_growth_bound(const BoundConstants& k, double horizon, double v0_l1_norm) {
  require(v0_l1_norm >= 0.0, "norm must be non-negative");
  GrowthBound g;
  g.intervals = interval_count(k, horizon);
  const double lv = std::log2(v0_l1_norm);
  g.log2_bound = static_cast<double>(g.intervals) * std::log2(k.s) + lv;
  g.bound = std::exp2(g.log2_bound);
  if (k.s == 1.0) g.bound = v0_l1_norm;
  g.log2_closed_form = k.c_t * horizon + lv;
  return g;
}

GrowthBound hausdorff_growth_bound(const BoundConstants& k, double horizon, std::size_t m, double initial_measure,
                                   std::size_t n) {
  require(m >= 1 && m < n, "need 1 <= m < n");
  require(initial_measure > 0.0, "initial measure must be positive");
  GrowthBound g;
  g.intervals = interval_count(k, horizon);
  const double md = static_cast<double>(m);
  const double lfact = std::lgamma(md + 1.0) / std::log(2.0);
  const double prefactor = lfact + md * 0.5 * std::log2(static_cast<double>(n)) + std::log2(initial_measure);
  g.log2_bound = prefactor + md * static_cast<double>(g.intervals) * std::log2(k.s);
  g.bound = std::exp2(g.log2_bound);
  g.log2_closed_form = prefactor + md * k.c_t * horizon;
  return g;
}

double single_channel_rate(const BoundConstants& k) {
  require(k.holder_norms.size() == 1, "defined for a single channel");
  require(k.holder_norms[0] > 0.0, "needs a positive Hoelder norm");
  return k.c_t / std::pow(k.holder_norms[0], 1.0 / k.params.beta);
}

namespace {

double distance(std::span<const double> states, std::size_t n, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t d = 0; d < n; ++d) {
    const double e = states[j * n + d] - states[i * n + d];
    s += e * e;
  }
  return std::sqrt(s);
}

template <class Visit>
WindowCheck for_each_window(const BoundConstants& k, std::span<const double> states, std::size_t n, double h,
                            Visit visit) {
  require(n > 0 && states.size() % n == 0 && states.size() / n >= 2, "states must hold at least two nodes");
  require(h > 0.0, "grid spacing must be positive");
  WindowCheck out;
  const std::size_t last = states.size() / n - 1;
  const double steps = std::floor(k.delta / h * (1.0 + 1e-12));
  const std::size_t w = steps >= static_cast<double>(last) ? last : static_cast<std::size_t>(steps);
  if (w < 1) return out;
  for (std::size_t s = 0; s < last; s += w) {
    const std::size_t e = std::min(last, s + w);
    ++out.windows;
    visit(s, e, out);
  }
  return out;
}

void record(WindowCheck& out, double lhs, double rhs) {
  ++out.pairs;
  const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? kInf : 0.0);
  out.worst_ratio = std::max(out.worst_ratio, ratio);
  if (lhs > rhs * (1.0 + 1e-12)) ++out.violations;
}

}  // namespace

WindowCheck lemma_flow_check(const BoundConstants& k, std::span<const double> states, std::size_t n, double h) {
  const double a = k.params.alpha, b = k.params.beta;
  const double den = 1.0 / (1.0 - 2.0 * a);
  // K*_{s,t} only depends on t - s through the same formula as K_Delta.
  const double cn = k.c_alpha * static_cast<double>(k.dimension) * k.k1;
  return for_each_window(k, states, n, h, [&](std::size_t s, std::size_t e, WindowCheck& out) {
    for (std::size_t t = s + 1; t <= e; ++t) {
      const double len = static_cast<double>(t - s) * h;
      double lhs = distance(states, n, t - 1, t) * std::pow(h, -a) / (1.0 - a);
      double upper = distance(states, n, t - 1, t) / std::pow(h, 1.0 + a);
      for (std::size_t r = t - 1; r-- > s;) {
        const double lower = distance(states, n, r, t) / std::pow(static_cast<double>(t - r) * h, 1.0 + a);
        lhs += 0.5 * h * (lower + upper);
        upper = lower;
      }
      const double kd = 1.0 - cn * k.mtilde1_alpha * std::pow(len, b);
      const double kstar = kd > 0.0 ? cn * k.m_alpha / kd * den : kInf;
      record(out, lhs, kstar * std::pow(len, b - a));
    }
  });
}

WindowCheck holder_window_check(const BoundConstants& k, std::span<const double> states, std::size_t n, double h) {
  const double a = k.params.alpha, b = k.params.beta;
  const double cn = k.c_alpha * static_cast<double>(k.dimension) * k.k1;
  return for_each_window(k, states, n, h, [&](std::size_t s, std::size_t e, WindowCheck& out) {
    double norm = 0.0;
    for (std::size_t i = s; i < e; ++i)
      for (std::size_t j = i + 1; j <= e; ++j)
        norm = std::max(norm, distance(states, n, i, j) / std::pow(static_cast<double>(j - i) * h, 1.0 - a));
    const double len = static_cast<double>(e - s) * h;
    const double kd = 1.0 - cn * k.mtilde1_alpha * std::pow(len, b);
    const double kst = kd > 0.0 ? cn * k.m_alpha / kd : kInf;
    record(out, norm, kst * std::pow(len, a + b - 1.0));
  });
}

}  // namespace fbmflow::bound

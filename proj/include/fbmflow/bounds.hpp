#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fbmflow/fields.hpp"

namespace fbmflow::bound {

/// Exponents: alpha = 1 - H + delta, beta = H - epsilon.
struct HolderParams {
  double hurst = 0.75;
  double epsilon = 0.0625;
  double delta = 0.125;
  double alpha = 0.375;
  double beta = 0.6875;

  /// Validates 1 - H < alpha < 1/2, delta > epsilon, alpha + beta > 1, beta > alpha.
  static HolderParams make(double hurst, double epsilon, double delta);
};

/// epsilon = (H - 1/2)/4, delta = (H - 1/2)/2.
HolderParams default_params(double hurst);

double gamma(double x);
double k1(double alpha, double beta);
double c_alpha(double alpha);

/// Hook for negative-control self tests: scales k1 wherever the chain uses it.
struct Tuning {
  double k1_scale = 1.0;
};

/// The Delta-independent part of the constant chain, and the Delta-dependent
/// pieces as functions of Delta.
class ConstantChain {
 public:
  ConstantChain(const HolderParams& params, const flow::VectorFieldSet& fields, std::span<const double> holder_norms,
                std::size_t n, Tuning tuning = {});
  /// Same chain from explicit per-channel constants.
  ConstantChain(const HolderParams& params, std::span<const flow::FieldConstants> constants,
                std::span<const double> holder_norms, std::size_t n, Tuning tuning = {});

  const HolderParams& params() const { return params_; }
  std::size_t dimension() const { return n_; }
  std::size_t channels() const { return sup_.size(); }
  std::span<const double> holder_norms() const { return norm_; }

  double k1() const { return k1_; }
  double c_alpha() const { return c_alpha_; }
  double m_alpha() const { return m_alpha_; }
  double mtilde1_alpha() const { return mtilde1_alpha_; }
  double m1_alpha(std::size_t g) const;
  double b1() const { return b1_; }
  double b2() const { return b2_; }
  double b_gamma1(std::size_t g) const;
  /// Delta-free bound on K* Delta^beta: sum M ||B|| / (alpha sum M1 ||B||).
  double kstar_majorant() const { return kstar_majorant_; }

  double k_delta(double delta) const;
  double kstar(double delta) const { return k_delta(delta) / (1.0 - 2.0 * params_.alpha); }
  double a_gamma1(std::size_t g, double delta) const;
  double a1(double delta) const;
  double a2(double delta) const { return a1(delta) / (1.0 - params_.alpha); }
  /// a2 with K* Delta^beta replaced by kstar_majorant().
  double a2_majorant() const;
  double a2_majorant_gamma(std::size_t g) const;
  double s_factor(double delta) const;

  /// True when the drift of every quantity vanishes (all channel constants or
  /// all Hoelder norms zero).
  bool degenerate() const;

 private:
  HolderParams params_;
  std::size_t n_;
  std::vector<double> sup_, lip_, dlip_, norm_;
  double k1_, c_alpha_, m_alpha_, mtilde1_alpha_, b1_, b2_, kstar_majorant_;
};

enum class DeltaBranch { delta0, bisection, degenerate };
std::string to_string(DeltaBranch b);

struct DeltaSolution {
  double delta0 = 0.0;  // +inf when c_alpha M~1_alpha = 0
  double delta = 0.0;
  DeltaBranch branch = DeltaBranch::delta0;
  std::size_t iterations = 0;
  double residual = 0.0;  // relative residual of the defining equation
};

/// Delta^{-beta} = 3 n k1 max[c_alpha M~1_alpha, a_{Delta,2} + b2]. `horizon`
/// is used for the degenerate case only.
DeltaSolution solve_delta(const ConstantChain& chain, double horizon);

struct BoundConstants {
  HolderParams params;
  std::size_t dimension = 0;
  double horizon = 0.0;
  std::vector<double> holder_norms;
  double k1 = 0.0, c_alpha = 0.0;
  double m_alpha = 0.0, mtilde1_alpha = 0.0;
  double a1 = 0.0, a2 = 0.0, a2_majorant = 0.0;
  double b1 = 0.0, b2 = 0.0;
  double k_delta = 0.0, kstar = 0.0;
  DeltaSolution solution;
  double delta = 0.0;
  double p = 0.0;
  double s = 1.0;
  double c_t = 0.0;
  /// The three interval-size conditions at delta.
  bool condition_k = true, condition_b = true, condition_ab = true;
  /// 3 n k1 sum_g (c_alpha M~1_g + a2_g + b2_g) ||B_g||, right side of the
  /// pathwise (C_T)^beta estimate. a2_g and b2_g already carry 1/Gamma(1-alpha),
  /// and a2_g uses the K* majorant.
  double moment_rhs = 0.0;
};

/// Throws std::invalid_argument for non-conforming fields.
BoundConstants compute_constants(const HolderParams& params, const flow::VectorFieldSet& fields,
                                 std::span<const double> holder_norms, std::size_t n, double horizon,
                                 Tuning tuning = {});
BoundConstants compute_constants(const ConstantChain& chain, double horizon);

struct GrowthBound {
  std::size_t intervals = 0;  // ceil(T / Delta)
  double log2_bound = 0.0;
  double bound = 0.0;  // may be +inf when it overflows
  double log2_closed_form = 0.0;  // log2 of 2^{C_T T} times the same prefactor
};

GrowthBound tangent_growth_bound(const BoundConstants& k, double horizon, double v0_l1_norm);
GrowthBound hausdorff_growth_bound(const BoundConstants& k, double horizon, std::size_t m, double initial_measure,
                                   std::size_t n);

/// For a single channel: C_T / ||B||^{1/beta}, which depends on the field and
/// exponents only.
double single_channel_rate(const BoundConstants& k);

struct WindowCheck {
  std::size_t windows = 0;
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max lhs / rhs
};

/// Discretised int_s^t ||x_t - x_r||_2 / (t - r)^{1+alpha} dr <= K*_{t-s} (t - s)^{beta - alpha}
/// for every end node t of every window [s, s + Delta] starting at a grid node
/// multiple of the window length. `states` is row-major (nodes x n) on a
/// uniform grid of spacing h.
WindowCheck lemma_flow_check(const BoundConstants& k, std::span<const double> states, std::size_t n, double h);

/// Grid (1 - alpha)-Hoelder norm of the flow on each window against
/// K_{Delta} (t - s)^{alpha + beta - 1}.
WindowCheck holder_window_check(const BoundConstants& k, std::span<const double> states, std::size_t n, double h);

}  // namespace fbmflow::bound

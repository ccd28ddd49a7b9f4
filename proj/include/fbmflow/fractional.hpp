#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fbmflow::frac {

/// Node values of a function on the uniform grid a = x_0 < ... < x_N = b.
struct SampledFunction {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> values;

  SampledFunction() = default;
  SampledFunction(double a, double b, std::vector<double> values);

  static SampledFunction from(const std::function<double(double)>& f, double a, double b, std::size_t steps);

  std::size_t steps() const { return values.size() - 1; }
  double step() const { return (b - a) / static_cast<double>(steps()); }
  double node(std::size_t k) const;
  SampledFunction reversed() const;
};

enum class Side { left, right };

/// Riemann-Liouville integral of order `order` > 0. The left side is
/// I_{a+}; the right side returns the real magnitude (1/Gamma(a)) int_x^b
/// (y - x)^{a-1} f(y) dy with the e^{-i pi a} phase dropped. Product
/// trapezoidal rule: exact for piecewise-linear f.
SampledFunction rl_integral(const SampledFunction& f, double order, Side side = Side::left);

struct DerivativeOptions {
  /// Exponents nu for which the rule is made exact on (x - a)^nu (right side:
  /// (b - x)^nu) through endpoint correction weights. Empty means {order},
  /// the endpoint behaviour of elements of I^order(L^p).
  std::vector<double> endpoint_exponents;
  bool correct_endpoint = true;
  /// Emit a warning when the estimated Hoelder exponent of f is <= order.
  bool warn_if_rough = true;
};

/// Weyl derivative of order in (0,1) from the difference-quotient form
///   (1/Gamma(1-a)) [ f(x)/(x-a)^a + a int_a^x (f(x) - f(y)) / (x-y)^{1+a} dy ]
/// with the singular integral done by product integration of the piecewise-
/// linear interpolant. The value at the singular endpoint (x = a on the left,
/// x = b on the right) is 0: the operator lives on the open interval.
SampledFunction weyl_derivative(const SampledFunction& f, double order, Side side = Side::left,
                                const DerivativeOptions& options = {});

/// Raised when f, g are too rough for the generalised Stieltjes integral.
class UndefinedIntegral : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Generalised Stieltjes integral int_a^b f dg for f, g on the same nodes:
///   -int D^a_{a+} f_{a+} D^{1-a}_{b-} g_{b-} dx + f(a) (g(b) - g(a))
/// in the real convention, where the two phases multiply to -1. Throws
/// UndefinedIntegral when the estimated Hoelder exponents sum to <= 1.
double zahle_integral(const SampledFunction& f, const SampledFunction& g, double order);

/// Componentwise int f_i dg.
std::vector<double> zahle_integral(std::span<const SampledFunction> f, const SampledFunction& g, double order);

/// Plain Riemann-Stieltjes sum sum_k f(x_k) (g(x_{k+1}) - g(x_k)).
double riemann_stieltjes_sum(const SampledFunction& f, const SampledFunction& g);

enum class WNormKernel {
  increment,  ///< |g(y) - g(s)| / (y - s)^{2-a}
  window,     ///< |g(y) - g(s)| / (t - s)^{2-a}, the variant with the window length in the denominator
};

/// Grid value of ||g||_{1-a,infinity,T}: max over node pairs s < t of
///   |g(t) - g(s)| / (t - s)^{1-a} + int_s^t |g(y) - g(s)| / (y - s)^{2-a} dy.
double w_norm(const SampledFunction& g, double order, WNormKernel kernel = WNormKernel::increment);

/// Least-squares slope of log mean |f(x + l h) - f(x)| against log l over
/// dyadic lags, clipped to [0, 1]. Constant functions give 1.
double holder_exponent_estimate(const SampledFunction& f);

}  // namespace fbmflow::frac

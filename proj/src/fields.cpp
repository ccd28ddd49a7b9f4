#include "fbmflow/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fbmflow/config.hpp"
#include "fbmflow/csv.hpp"

namespace fbmflow::flow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_sizes(const ChannelField& f, std::size_t n) {
  std::visit(overloaded{
                 [n](const SineTerm& t) {
                   if (t.amplitude.size() != n || t.phase.size() != n || t.frequency.size() != n * n)
                     throw std::invalid_argument("sine field: parameter sizes do not match dimension");
                 },
                 [n](const BumpTerm& t) {
                   if (t.amplitude.size() != n || t.center.size() != n)
                     throw std::invalid_argument("bump field: parameter sizes do not match dimension");
                   if (!(t.width > 0.0)) throw std::invalid_argument("bump field: width must be > 0");
                 },
                 [n](const ConstantTerm& t) {
                   if (t.value.size() != n) throw std::invalid_argument("constant field: size does not match dimension");
                 },
                 [](const LinearTerm&) {},
             },
             f);
}

}  // namespace

FieldConstants analytic_constants(const ChannelField& field, std::size_t n) {
  return std::visit(
      overloaded{
          [n](const SineTerm& t) {
            FieldConstants k;
            for (std::size_t i = 0; i < n; ++i) {
              const double amp = std::abs(t.amplitude[i]);
              const double w = norm2(std::span(t.frequency).subspan(i * n, n));
              k.sup = std::max(k.sup, amp);
              k.lipschitz = std::max(k.lipschitz, amp * w);
              k.derivative_lipschitz = std::max(k.derivative_lipschitz, amp * w * w);
            }
            return k;
          },
          [](const BumpTerm& t) {
            // sup |grad phi| = e^{-1/2}/sigma at r = sigma; sup ||Hess phi e_j|| = 1/sigma^2 at r = 0.
            FieldConstants k;
            double amp = 0.0;
            for (double a : t.amplitude) amp = std::max(amp, std::abs(a));
            k.sup = amp;
            k.lipschitz = amp * std::exp(-0.5) / t.width;
            k.derivative_lipschitz = amp / (t.width * t.width);
            return k;
          },
          [](const ConstantTerm& t) {
            FieldConstants k;
            for (double v : t.value) k.sup = std::max(k.sup, std::abs(v));
            return k;
          },
          [](const LinearTerm& t) {
            FieldConstants k;
            k.sup = t.rate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            k.lipschitz = std::abs(t.rate);
            return k;
          },
      },
      field);
}

VectorFieldSet::VectorFieldSet(std::size_t dimension, std::vector<ChannelField> channels, std::string key)
    : dimension_(dimension), channels_(std::move(channels)), key_(std::move(key)) {
  if (dimension_ == 0) throw std::invalid_argument("VectorFieldSet: dimension must be >= 1");
  if (channels_.empty()) throw std::invalid_argument("VectorFieldSet: need at least one channel");
  for (const auto& c : channels_) {
    check_sizes(c, dimension_);
    constants_.push_back(analytic_constants(c, dimension_));
  }
}

bool VectorFieldSet::conforming() const {
  return std::all_of(constants_.begin(), constants_.end(), [](const FieldConstants& k) {
    return std::isfinite(k.sup) && std::isfinite(k.lipschitz) && std::isfinite(k.derivative_lipschitz);
  });
}

bool VectorFieldSet::is_zero() const {
  return std::all_of(constants_.begin(), constants_.end(), [](const FieldConstants& k) {
    return k.sup == 0.0 && k.lipschitz == 0.0 && k.derivative_lipschitz == 0.0;
  });
}

void VectorFieldSet::evaluate(std::size_t c, std::span<const double> x, std::span<double> value,
                              std::span<double> jac) const {
  const std::size_t n = dimension_;
  const bool want_value = !value.empty();
  const bool want_jac = !jac.empty();
  std::visit(overloaded{
                 [&](const SineTerm& t) {
                   for (std::size_t i = 0; i < n; ++i) {
                     const double* w = t.frequency.data() + i * n;
                     double arg = t.phase[i];
                     for (std::size_t j = 0; j < n; ++j) arg += w[j] * x[j];
                     if (want_value) value[i] = t.amplitude[i] * std::sin(arg);
                     if (want_jac) {
                       const double d = t.amplitude[i] * std::cos(arg);
                       for (std::size_t j = 0; j < n; ++j) jac[i * n + j] = d * w[j];
                     }
                   }
                 },
                 [&](const BumpTerm& t) {
                   const double s2 = t.width * t.width;
                   double r2 = 0.0;
                   for (std::size_t j = 0; j < n; ++j) r2 += (x[j] - t.center[j]) * (x[j] - t.center[j]);
                   const double phi = std::exp(-0.5 * r2 / s2);
                   for (std::size_t i = 0; i < n; ++i) {
                     if (want_value) value[i] = t.amplitude[i] * phi;
                     if (want_jac)
                       for (std::size_t j = 0; j < n; ++j)
                         jac[i * n + j] = -t.amplitude[i] * phi * (x[j] - t.center[j]) / s2;
                   }
                 },
                 [&](const ConstantTerm& t) {
                   if (want_value) std::copy(t.value.begin(), t.value.end(), value.begin());
                   if (want_jac) std::fill(jac.begin(), jac.begin() + static_cast<std::ptrdiff_t>(n * n), 0.0);
                 },
                 [&](const LinearTerm& t) {
                   if (want_value)
                     for (std::size_t i = 0; i < n; ++i) value[i] = t.rate * x[i];
                   if (want_jac)
                     for (std::size_t i = 0; i < n; ++i)
                       for (std::size_t j = 0; j < n; ++j) jac[i * n + j] = i == j ? t.rate : 0.0;
                 },
             },
             channels_.at(c));
}

void VectorFieldSet::value(std::size_t c, std::span<const double> x, std::span<double> out) const {
  evaluate(c, x, out, {});
}

void VectorFieldSet::jacobian(std::size_t c, std::span<const double> x, std::span<double> out) const {
  evaluate(c, x, {}, out);
}

FieldSpec parse_field_spec(std::string_view key) {
  FieldSpec spec;
  const std::string s(key);
  const auto colon = s.find(':');
  spec.kind = csv::trim(s.substr(0, colon));
  if (spec.kind.empty()) throw std::invalid_argument("field key: missing kind");
  if (colon == std::string::npos) return spec;
  for (const auto& item : csv::split(s.substr(colon + 1), ',')) {
    const std::string kv = csv::trim(item);
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("field key: expected name=value in '" + kv + "'");
    spec.params[csv::trim(kv.substr(0, eq))] = csv::trim(kv.substr(eq + 1));
  }
  return spec;
}

namespace {

class Params {
 public:
  explicit Params(const FieldSpec& spec) : spec_(spec) {}

  double number(const std::string& name, double fallback) {
    used_.push_back(name);
    auto it = spec_.params.find(name);
    return it == spec_.params.end() ? fallback : config::parse_double(it->second, spec_.kind + "." + name);
  }

  std::vector<double> vector(const std::string& name) {
    used_.push_back(name);
    auto it = spec_.params.find(name);
    if (it == spec_.params.end()) return {};
    std::vector<double> out;
    for (const auto& v : csv::split(it->second, ';')) out.push_back(config::parse_double(v, spec_.kind + "." + name));
    return out;
  }

  std::size_t count(const std::string& name, std::size_t fallback) {
    const double v = number(name, static_cast<double>(fallback));
    if (!(v >= 1.0) || v != std::floor(v)) throw std::invalid_argument(spec_.kind + "." + name + " must be a positive integer");
    return static_cast<std::size_t>(v);
  }

  void finish() const {
    for (const auto& [k, v] : spec_.params)
      if (std::find(used_.begin(), used_.end(), k) == used_.end())
        throw std::invalid_argument("field key: unknown parameter '" + k + "' for kind " + spec_.kind);
  }

 private:
  const FieldSpec& spec_;
  std::vector<std::string> used_;
};

}  // namespace

VectorFieldSet make_field(const FieldSpec& spec) {
  Params p(spec);
  std::string kind = spec.kind;
  if (kind == "bump") kind = "gaussian_bump";
  if (kind == "linear") kind = "linear_test";

  std::vector<ChannelField> channels;
  std::size_t n = 0;
  if (kind == "sine") {
    const double amp = p.number("A", 1.0);
    auto omega = p.vector("omega");
    n = p.count("n", omega.empty() ? 2 : omega.size());
    if (omega.empty()) {
      omega.assign(n, 0.0);
      omega[0] = 1.0;
    }
    if (omega.size() != n) throw std::invalid_argument("sine field: omega must have n entries");
    const double phi = p.number("phi", 0.0);
    const std::size_t nc = p.count("channels", 1);
    if (amp == 0.0) throw std::invalid_argument("sine field: zero amplitude is degenerate");
    for (std::size_t g = 0; g < nc; ++g) {
      SineTerm t;
      t.amplitude.assign(n, amp);
      t.frequency.resize(n * n);
      t.phase.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) t.frequency[i * n + j] = omega[(j + i + g) % n];
        t.phase[i] = phi + static_cast<double>(i) * std::numbers::pi / 2 + static_cast<double>(g) * std::numbers::pi / 4;
      }
      channels.emplace_back(std::move(t));
    }
  } else if (kind == "gaussian_bump") {
    const double amp = p.number("A", 1.0);
    const double sigma = p.number("sigma", 1.0);
    auto center = p.vector("center");
    n = p.count("n", center.empty() ? 2 : center.size());
    if (center.empty()) center.assign(n, 0.0);
    if (center.size() != n) throw std::invalid_argument("bump field: center must have n entries");
    const std::size_t nc = p.count("channels", 1);
    if (amp == 0.0) throw std::invalid_argument("bump field: zero amplitude is degenerate");
    for (std::size_t g = 0; g < nc; ++g) {
      BumpTerm t;
      t.width = sigma;
      t.center = center;
      t.center[g % n] += static_cast<double>(g) * sigma;
      t.amplitude.resize(n);
      for (std::size_t i = 0; i < n; ++i) t.amplitude[i] = (i + g) % 2 == 0 ? amp : -amp;
      channels.emplace_back(std::move(t));
    }
  } else if (kind == "constant" || kind == "zero") {
    const double sigma = kind == "zero" ? 0.0 : p.number("sigma", 1.0);
    const std::size_t dir = kind == "zero" ? 0 : static_cast<std::size_t>(p.number("dir", 0.0));
    n = p.count("n", 1);
    const std::size_t nc = p.count("channels", 1);
    for (std::size_t g = 0; g < nc; ++g) {
      ConstantTerm t;
      t.value.assign(n, 0.0);
      t.value[(dir + g) % n] = sigma;
      channels.emplace_back(std::move(t));
    }
  } else if (kind == "linear_test") {
    const double rate = p.number("lambda", 1.0);
    n = p.count("n", 1);
    const std::size_t nc = p.count("channels", 1);
    for (std::size_t g = 0; g < nc; ++g) channels.emplace_back(LinearTerm{rate});
  } else {
    throw std::invalid_argument("unknown field kind '" + spec.kind + "'");
  }
  p.finish();

  std::string key = kind;
  char sep = ':';
  for (const auto& [k, v] : spec.params) {
    key += sep + k + "=" + v;
    sep = ',';
  }
  return VectorFieldSet(n, std::move(channels), key);
}

VectorFieldSet make_field(std::string_view key) { return make_field(parse_field_spec(key)); }

}  // namespace fbmflow::flow

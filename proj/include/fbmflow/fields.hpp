#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fbmflow::flow {

/// U^i(x) = amplitude[i] * sin(<frequency row i, x> + phase[i]).
struct SineTerm {
  std::vector<double> amplitude;
  std::vector<double> frequency;  // n x n row-major
  std::vector<double> phase;
};

/// U^i(x) = amplitude[i] * exp(-||x - center||^2 / (2 width^2)).
struct BumpTerm {
  std::vector<double> amplitude;
  std::vector<double> center;
  double width = 1.0;
};

/// U(x) = value.
struct ConstantTerm {
  std::vector<double> value;
};

/// U(x) = rate * x. Unbounded, so it violates the sup-norm assumption; kept
/// because it has a closed-form flow.
struct LinearTerm {
  double rate = 1.0;
};

using ChannelField = std::variant<SineTerm, BumpTerm, ConstantTerm, LinearTerm>;

/// Bounds of one channel: |U^i| <= sup, U^i is `lipschitz`-Lipschitz and every
/// entry of the spatial derivative is `derivative_lipschitz`-Lipschitz.
struct FieldConstants {
  double sup = 0.0;
  double lipschitz = 0.0;
  double derivative_lipschitz = 0.0;
};

class VectorFieldSet {
 public:
  VectorFieldSet(std::size_t dimension, std::vector<ChannelField> channels, std::string key = {});

  std::size_t dimension() const { return dimension_; }
  std::size_t channel_count() const { return channels_.size(); }
  const ChannelField& channel(std::size_t c) const { return channels_.at(c); }
  const FieldConstants& constants(std::size_t c) const { return constants_.at(c); }
  const std::string& key() const { return key_; }

  /// True when every channel has finite analytic constants.
  bool conforming() const;
  /// True when every channel is identically zero.
  bool is_zero() const;

  void value(std::size_t c, std::span<const double> x, std::span<double> out) const;
  /// out[i * n + j] = dU^i / dx^j.
  void jacobian(std::size_t c, std::span<const double> x, std::span<double> out) const;
  /// Both at once; sine and bump share their transcendental evaluations.
  void evaluate(std::size_t c, std::span<const double> x, std::span<double> value, std::span<double> jacobian) const;

 private:
  std::size_t dimension_;
  std::vector<ChannelField> channels_;
  std::vector<FieldConstants> constants_;
  std::string key_;
};

FieldConstants analytic_constants(const ChannelField& field, std::size_t dimension);

/// Parsed `kind:key=value,...` field key; vector values use ';'.
struct FieldSpec {
  std::string kind;
  std::map<std::string, std::string> params;
};

FieldSpec parse_field_spec(std::string_view key);

/// Builds a field set from a key. Kinds:
///   sine:A=,omega=w1;..;wn,phi=,n=,channels=
///   gaussian_bump:A=,sigma=,center=c1;..;cn,n=,channels=   (alias bump)
///   constant:sigma=,dir=,n=,channels=
///   zero:n=,channels=
///   linear_test:lambda=,n=,channels=                      (alias linear)
/// Component i of sine channel g uses omega cyclically shifted by i + g and
/// phase phi + i pi/2 + g pi/4; bump channel g alternates the amplitude sign
/// per component and shifts its centre by g * sigma along e_(g mod n).
VectorFieldSet make_field(std::string_view key);
VectorFieldSet make_field(const FieldSpec& spec);

}  // namespace fbmflow::flow

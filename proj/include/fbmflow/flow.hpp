#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fbmflow/fbm.hpp"
#include "fbmflow/fields.hpp"

namespace fbmflow::flow {

/// Raised when a state or tangent component stops being finite.
class FlowDivergence : public std::runtime_error {
 public:
  explicit FlowDivergence(std::size_t step);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// States x_{t_k} = Phi_{t_k}(x0), row-major (nodes x dimension).
struct FlowTrajectory {
  std::vector<double> times;
  std::size_t dimension = 0;
  std::vector<double> x0;
  std::vector<double> states;

  std::size_t nodes() const { return times.size(); }
  std::span<const double> state(std::size_t k) const { return std::span(states).subspan(k * dimension, dimension); }
};

/// Jacobians J_k = DPhi_{t_k}, row-major n x n per node, and optionally the
/// pushforward v_k = J_k v0.
struct TangentTrajectory {
  std::vector<double> times;
  std::size_t dimension = 0;
  std::vector<double> jacobians;
  std::vector<double> v0;
  std::vector<double> vectors;

  std::size_t nodes() const { return times.size(); }
  std::span<const double> jacobian(std::size_t k) const {
    return std::span(jacobians).subspan(k * dimension * dimension, dimension * dimension);
  }
  std::span<const double> vector(std::size_t k) const { return std::span(vectors).subspan(k * dimension, dimension); }
};

/// One left-endpoint Euler step of the state together with m tangent vectors.
/// Buffers are owned so repeated stepping does not allocate.
class Stepper {
 public:
  Stepper(const VectorFieldSet& fields, const fbm::FbmPath& path);

  /// Advances x (n entries) and `vectors` (m consecutive n-vectors) across
  /// [t_k, t_{k+1}] of the path grid. Throws FlowDivergence(k) if anything
  /// becomes non-finite.
  void advance(std::size_t k, std::span<double> x, std::span<double> vectors);

 private:
  const VectorFieldSet& fields_;
  const fbm::FbmPath& path_;
  std::vector<double> value_, jac_, dx_, dv_;
};

/// Solves x_{k+1} = x_k + sum_c U_c(x_k) (B_c(t_{k+1}) - B_c(t_k)) on the nodes
/// first..last of the path grid, starting from x0 at node `first`.
/// States are recorded every `record_every` nodes (and always at `last`).
FlowTrajectory integrate_flow(const VectorFieldSet& fields, const fbm::FbmPath& path, std::span<const double> x0,
                              std::size_t record_every, std::size_t first, std::size_t last);

/// Whole-horizon solve. `refinement` is the number of path steps per recorded
/// node: the path is expected to be the fine path (see fbm::refine_path) and
/// the trajectory is reported on the coarse grid.
FlowTrajectory integrate_flow(const VectorFieldSet& fields, const fbm::FbmPath& path, std::span<const double> x0,
                              std::size_t refinement = 1);

/// Tangent flow along a trajectory recorded at every node of `path`.
TangentTrajectory integrate_tangent(const VectorFieldSet& fields, const fbm::FbmPath& path, const FlowTrajectory& traj,
                                    std::optional<std::span<const double>> v0 = std::nullopt);

struct FlowWithTangent {
  FlowTrajectory flow;
  TangentTrajectory tangent;
};

/// State and Jacobian in one pass, sharing the increments.
FlowWithTangent integrate_with_tangent(const VectorFieldSet& fields, const fbm::FbmPath& path,
                                       std::span<const double> x0, std::size_t refinement = 1,
                                       std::optional<std::span<const double>> v0 = std::nullopt);

}  // namespace fbmflow::flow

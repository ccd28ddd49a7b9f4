#include "fbmflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fbmflow::flow {

FlowDivergence::FlowDivergence(std::size_t step)
    : std::runtime_error("flow diverged at step " + std::to_string(step)), step_(step) {}

namespace {

void check_inputs(const VectorFieldSet& fields, const fbm::FbmPath& path, std::size_t x0_size) {
  if (x0_size != fields.dimension())
    throw std::invalid_argument("initial point has " + std::to_string(x0_size) + " entries, field dimension is " +
                                std::to_string(fields.dimension()));
  if (path.channel_count() != fields.channel_count())
    throw std::invalid_argument("path has " + std::to_string(path.channel_count()) + " channels, field set has " +
                                std::to_string(fields.channel_count()));
}

}  // namespace

Stepper::Stepper(const VectorFieldSet& fields, const fbm::FbmPath& path)
    : fields_(fields), path_(path) {
  const std::size_t n = fields.dimension();
  value_.resize(n);
  jac_.resize(n * n);
  dx_.resize(n);
}

void Stepper::advance(std::size_t k, std::span<double> x, std::span<double> vectors) {
  const std::size_t n = fields_.dimension();
  const std::size_t m = vectors.size() / n;
  const bool tangent = m > 0;
  std::fill(dx_.begin(), dx_.end(), 0.0);
  dv_.assign(vectors.size(), 0.0);
  for (std::size_t c = 0; c < fields_.channel_count(); ++c) {
    const double db = path_.increment(c, k);
    fields_.evaluate(c, x, value_, tangent ? std::span<double>(jac_) : std::span<double>());
    for (std::size_t i = 0; i < n; ++i) dx_[i] += value_[i] * db;
    for (std::size_t v = 0; v < m; ++v) {
      const double* in = vectors.data() + v * n;
      double* out = dv_.data() + v * n;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += jac_[i * n + j] * in[j];
        out[i] += s * db;
      }
    }
  }
  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] += dx_[i];
    finite = finite && std::isfinite(x[i]);
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    vectors[i] += dv_[i];
    finite = finite && std::isfinite(vectors[i]);
  }
  if (!finite) throw FlowDivergence(k);
}

FlowTrajectory integrate_flow(const VectorFieldSet& fields, const fbm::FbmPath& path, std::span<const double> x0,
                              std::size_t record_every, std::size_t first, std::size_t last) {
  check_inputs(fields, path, x0.size());
  const auto& grid = path.grid();
  if (record_every == 0) throw std::invalid_argument("record interval must be >= 1");
  if (first > last || last > grid.steps()) throw std::invalid_argument("node range outside the path grid");
  const std::size_t n = fields.dimension();

  FlowTrajectory traj;
  traj.dimension = n;
  traj.x0.assign(x0.begin(), x0.end());
  std::vector<double> x(x0.begin(), x0.end());
  auto record = [&](std::size_t k) {
    traj.times.push_back(grid.time(k));
    traj.states.insert(traj.states.end(), x.begin(), x.end());
  };
  Stepper stepper(fields, path);
  record(first);
  for (std::size_t k = first; k < last; ++k) {
    stepper.advance(k, x, {});
    if ((k + 1 - first) % record_every == 0 || k + 1 == last) record(k + 1);
  }
  return traj;
}

FlowTrajectory integrate_flow(const VectorFieldSet& fields, const fbm::FbmPath& path, std::span<const double> x0,
                              std::size_t refinement) {
  if (refinement == 0 || path.grid().steps() % refinement != 0)
    throw std::invalid_argument("refinement must divide the path step count");
  return integrate_flow(fields, path, x0, refinement, 0, path.grid().steps());
}

namespace {

FlowWithTangent joint(const VectorFieldSet& fields, const fbm::FbmPath& path, std::span<const double> x0,
                      std::size_t refinement, std::optional<std::span<const double>> v0,
                      const FlowTrajectory* given) {
  const std::size_t n = fields.dimension();
  const auto& grid = path.grid();
  if (v0 && v0->size() != n) throw std::invalid_argument("initial tangent vector has the wrong dimension");

  // Columns of J are the images of e_j; v0 rides along as an extra vector.
  const std::size_t m = n + (v0 ? 1 : 0);
  std::vector<double> vecs(m * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) vecs[j * n + j] = 1.0;
  if (v0) std::copy(v0->begin(), v0->end(), vecs.begin() + static_cast<std::ptrdiff_t>(n * n));

  FlowWithTangent out;
  out.flow.dimension = n;
  out.flow.x0.assign(x0.begin(), x0.end());
  out.tangent.dimension = n;
  if (v0) out.tangent.v0.assign(v0->begin(), v0->end());

  std::vector<double> x(x0.begin(), x0.end());
  auto record = [&](std::size_t k) {
    out.flow.times.push_back(grid.time(k));
    out.flow.states.insert(out.flow.states.end(), x.begin(), x.end());
    out.tangent.times.push_back(grid.time(k));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out.tangent.jacobians.push_back(vecs[j * n + i]);
    if (v0) out.tangent.vectors.insert(out.tangent.vectors.end(), vecs.end() - static_cast<std::ptrdiff_t>(n), vecs.end());
  };

  Stepper stepper(fields, path);
  record(0);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    if (given) {
      // Tangent only: evaluate at the supplied states, keep x in lockstep.
      std::copy(given->state(k).begin(), given->state(k).end(), x.begin());
      stepper.advance(k, x, vecs);
      std::copy(given->state(k + 1).begin(), given->state(k + 1).end(), x.begin());
    } else {
      stepper.advance(k, x, vecs);
    }
    if ((k + 1) % refinement == 0) record(k + 1);
  }
  return out;
}

}  // namespace

TangentTrajectory integrate_tangent(const VectorFieldSet& fields, const fbm::FbmPath& path, const FlowTrajectory& traj,
                                    std::optional<std::span<const double>> v0) {
  check_inputs(fields, path, traj.dimension);
  if (traj.nodes() != path.grid().nodes())
    throw std::invalid_argument("trajectory must be recorded at every node of the path grid");
  return joint(fields, path, traj.x0, 1, v0, &traj).tangent;
}

FlowWithTangent integrate_with_tangent(const VectorFieldSet& fields, const fbm::FbmPath& path,
                                       std::span<const double> x0, std::size_t refinement,
                                       std::optional<std::span<const double>> v0) {
  check_inputs(fields, path, x0.size());
  if (refinement == 0 || path.grid().steps() % refinement != 0)
    throw std::invalid_argument("refinement must divide the path step count");
  return joint(fields, path, x0, refinement, v0, nullptr);
}

}  // namespace fbmflow::flow

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbmflow/flow.hpp"

namespace fbmflow::geometry {

/// Sampled m-dimensional manifold in R^n with orthonormal tangent frames and
/// quadrature weights summing to its measure.
struct ManifoldMesh {
  std::string kind;
  std::size_t intrinsic_dim = 0;
  std::size_t ambient_dim = 0;
  std::vector<double> points;   // P x n
  std::vector<double> frames;   // P x m x n
  std::vector<double> weights;  // P
  double reference_measure = 0.0;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t q) const { return std::span(points).subspan(q * ambient_dim, ambient_dim); }
  std::span<const double> frame(std::size_t q) const {
    return std::span(frames).subspan(q * intrinsic_dim * ambient_dim, intrinsic_dim * ambient_dim);
  }
  double total_weight() const;
};

/// circle:r=,n=   sphere:r=,n=   torus:r1=,r2=   segment:length=,n=
/// The curved manifolds live in the span of the first two (circle) or three
/// (sphere, torus) coordinate axes; the segment lies along e_1 from the origin.
ManifoldMesh make_manifold(std::string_view key, std::size_t point_count);

ManifoldMesh make_circle(double radius, std::size_t n, std::size_t point_count);
ManifoldMesh make_sphere(double radius, std::size_t n, std::size_t point_count);
ManifoldMesh make_torus(double r1, std::size_t point_count, double r2);
ManifoldMesh make_segment(double length, std::size_t n, std::size_t point_count);

/// sqrt|det G|, G_ij = <v_i, v_j>, for m consecutive n-vectors.
double gram_volume(std::span<const double> vectors, std::size_t m, std::size_t n);

/// gram_volume <= m! (max_i ||v_i||_2)^m.
bool gram_hadamard_check(std::span<const double> vectors, std::size_t m, std::size_t n);

/// prod_i ||v_i||_2, the sharper Hadamard bound, for diagnostics.
double hadamard_product_bound(std::span<const double> vectors, std::size_t m, std::size_t n);

/// Thrown when a density evaluation breaks the Gram majorisation.
class GramBoundViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Sum_q w_q gram_volume(J_k(x_q) v_i), one tangent trajectory per mesh point.
double hausdorff_measure(const ManifoldMesh& mesh, std::span<const flow::TangentTrajectory> tangents, std::size_t k);

/// Same quadrature with a supplied Jacobian (row-major n x n) per point.
double hausdorff_measure(const ManifoldMesh& mesh,
                         const std::function<void(std::size_t q, std::span<double> jacobian)>& jacobian_at);

struct MeasureCurve {
  std::vector<double> times;
  std::vector<double> measure;
  std::size_t point_count = 0;
  std::string rule;
};

/// Measure at every recorded node of the tangent trajectories.
MeasureCurve measure_curve(const ManifoldMesh& mesh, std::span<const flow::TangentTrajectory> tangents);

}  // namespace fbmflow::geometry

#include "fbmflow/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fbmflow/config.hpp"
#include "fbmflow/csv.hpp"
#include "fbmflow/fields.hpp"

namespace fbmflow::geometry {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

ManifoldMesh empty_mesh(std::string kind, std::size_t m, std::size_t n) {
  require(m < n, kind + ": intrinsic dimension must be below the ambient dimension");
  ManifoldMesh mesh;
  mesh.kind = std::move(kind);
  mesh.intrinsic_dim = m;
  mesh.ambient_dim = n;
  return mesh;
}

// Appends a point with a frame orthonormalised by Gram-Schmidt.
void push(ManifoldMesh& mesh, std::vector<double> x, std::vector<double> frame, double w) {
  const std::size_t m = mesh.intrinsic_dim, n = mesh.ambient_dim;
  for (std::size_t i = 0; i < m; ++i) {
    double* vi = frame.data() + i * n;
    for (std::size_t j = 0; j < i; ++j) {
      const double* vj = frame.data() + j * n;
      double d = 0.0;
      for (std::size_t c = 0; c < n; ++c) d += vi[c] * vj[c];
      for (std::size_t c = 0; c < n; ++c) vi[c] -= d * vj[c];
    }
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += vi[c] * vi[c];
    s = std::sqrt(s);
    for (std::size_t c = 0; c < n; ++c) vi[c] /= s;
  }
  mesh.points.insert(mesh.points.end(), x.begin(), x.end());
  mesh.frames.insert(mesh.frames.end(), frame.begin(), frame.end());
  mesh.weights.push_back(w);
}

// Near-square factorisation rows x cols >= point_count for the 2-d meshes.
std::pair<std::size_t, std::size_t> layout(std::size_t point_count, double aspect) {
  const auto rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(point_count / aspect))));
  const auto cols = std::max<std::size_t>(1, (point_count + rows - 1) / rows);
  return {rows, cols};
}

}  // namespace

double ManifoldMesh::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

ManifoldMesh make_circle(double r, std::size_t n, std::size_t count) {
  require(r > 0.0 && count >= 1, "circle: need r > 0 and at least one point");
  require(n >= 2, "circle: need n >= 2");
  auto mesh = empty_mesh("circle", 1, n);
  const double w = 2.0 * kPi * r / static_cast<double>(count);
  for (std::size_t q = 0; q < count; ++q) {
    const double th = 2.0 * kPi * (static_cast<double>(q) + 0.5) / static_cast<double>(count);
    std::vector<double> x(n, 0.0), f(n, 0.0);
    x[0] = r * std::cos(th);
    x[1] = r * std::sin(th);
    f[0] = -std::sin(th);
    f[1] = std::cos(th);
    push(mesh, x, f, w);
  }
  mesh.reference_measure = 2.0 * kPi * r;
  return mesh;
}

ManifoldMesh make_sphere(double r, std::size_t n, std::size_t count) {
  require(r > 0.0 && count >= 1, "sphere: need r > 0 and at least one point");
  require(n >= 3, "sphere: need n >= 3");
  auto mesh = empty_mesh("sphere", 2, n);
  const auto [rows, cols] = layout(count, 0.5);
  const double dphi = 2.0 * kPi / static_cast<double>(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const double t0 = kPi * static_cast<double>(i) / static_cast<double>(rows);
    const double t1 = kPi * static_cast<double>(i + 1) / static_cast<double>(rows);
    const double th = 0.5 * (t0 + t1);
    // Exact area of the cell [t0,t1] x [phi, phi + dphi].
    const double w = r * r * dphi * (std::cos(t0) - std::cos(t1));
    for (std::size_t j = 0; j < cols; ++j) {
      const double ph = dphi * (static_cast<double>(j) + 0.5);
      std::vector<double> x(n, 0.0), f(2 * n, 0.0);
      x[0] = r * std::sin(th) * std::cos(ph);
      x[1] = r * std::sin(th) * std::sin(ph);
      x[2] = r * std::cos(th);
      f[0] = std::cos(th) * std::cos(ph);
      f[1] = std::cos(th) * std::sin(ph);
      f[2] = -std::sin(th);
      f[n + 0] = -std::sin(ph);
      f[n + 1] = std::cos(ph);
      push(mesh, x, f, w);
    }
  }
  mesh.reference_measure = 4.0 * kPi * r * r;
  return mesh;
}

ManifoldMesh make_torus(double r1, std::size_t count, double r2) {
  require(r1 > r2 && r2 > 0.0, "torus: need r1 > r2 > 0");
  require(count >= 1, "torus: need at least one point");
  auto mesh = empty_mesh("torus", 2, 3);
  const auto [rows, cols] = layout(count, r2 / r1);
  const double du = 2.0 * kPi / static_cast<double>(cols);
  const double dv = 2.0 * kPi / static_cast<double>(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double v0 = dv * static_cast<double>(i), v1 = v0 + dv, v = v0 + 0.5 * dv;
    // Exact area: r2 du int (r1 + r2 cos v) dv.
    const double w = r2 * du * (r1 * dv + r2 * (std::sin(v1) - std::sin(v0)));
    for (std::size_t j = 0; j < cols; ++j) {
      const double u = du * (static_cast<double>(j) + 0.5);
      const double rho = r1 + r2 * std::cos(v);
      std::vector<double> x{rho * std::cos(u), rho * std::sin(u), r2 * std::sin(v)};
      std::vector<double> f{-std::sin(u), std::cos(u), 0.0, -std::sin(v) * std::cos(u), -std::sin(v) * std::sin(u),
                            std::cos(v)};
      push(mesh, x, f, w);
    }
  }
  mesh.reference_measure = 4.0 * kPi * kPi * r1 * r2;
  return mesh;
}

ManifoldMesh make_segment(double length, std::size_t n, std::size_t count) {
  require(length > 0.0 && count >= 1, "segment: need length > 0 and at least one point");
  require(n >= 2, "segment: need n >= 2");
  auto mesh = empty_mesh("segment", 1, n);
  const double w = length / static_cast<double>(count);
  for (std::size_t q = 0; q < count; ++q) {
    std::vector<double> x(n, 0.0), f(n, 0.0);
    x[0] = w * (static_cast<double>(q) + 0.5);
    f[0] = 1.0;
    push(mesh, x, f, w);
  }
  mesh.reference_measure = length;
  return mesh;
}

ManifoldMesh make_manifold(std::string_view key, std::size_t point_count) {
  const auto spec = flow::parse_field_spec(key);
  std::vector<std::string> used;
  auto num = [&](const std::string& name, double fallback) {
    used.push_back(name);
    auto it = spec.params.find(name);
    return it == spec.params.end() ? fallback : config::parse_double(it->second, spec.kind + "." + name);
  };
  auto dim = [&](std::size_t fallback) {
    const double v = num("n", static_cast<double>(fallback));
    require(v >= 1.0 && v == std::floor(v), spec.kind + ".n must be a positive integer");
    return static_cast<std::size_t>(v);
  };
  ManifoldMesh mesh;
  if (spec.kind == "circle") {
    const double r = num("r", 1.0);
    mesh = make_circle(r, dim(2), point_count);
  } else if (spec.kind == "sphere") {
    const double r = num("r", 1.0);
    mesh = make_sphere(r, dim(3), point_count);
  } else if (spec.kind == "torus") {
    const double r1 = num("r1", 2.0), r2 = num("r2", 1.0);
    require(dim(3) == 3, "torus: only n = 3 is supported");
    mesh = make_torus(r1, point_count, r2);
  } else if (spec.kind == "segment") {
    const double len = num("length", 1.0);
    mesh = make_segment(len, dim(2), point_count);
  } else {
    throw std::invalid_argument("unknown manifold kind '" + spec.kind + "'");
  }
  for (const auto& [k, v] : spec.params)
    require(std::find(used.begin(), used.end(), k) != used.end(),
            "manifold key: unknown parameter '" + k + "' for kind " + spec.kind);
  return mesh;
}

double gram_volume(std::span<const double> vectors, std::size_t m, std::size_t n) {
  require(vectors.size() == m * n, "gram_volume: expected m vectors of length n");
  std::vector<double> g(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) s += vectors[i * n + c] * vectors[j * n + c];
      g[i * m + j] = g[j * m + i] = s;
    }
  // Gaussian elimination with partial pivoting.
  double det = 1.0;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(g[r * m + col]) > std::abs(g[piv * m + col])) piv = r;
    if (g[piv * m + col] == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t c = 0; c < m; ++c) std::swap(g[col * m + c], g[piv * m + c]);
      det = -det;
    }
    det *= g[col * m + col];
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = g[r * m + col] / g[col * m + col];
      for (std::size_t c = col; c < m; ++c) g[r * m + c] -= f * g[col * m + c];
    }
  }
  return std::sqrt(std::abs(det));
}

double hadamard_product_bound(std::span<const double> vectors, std::size_t m, std::size_t n) {
  double p = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += vectors[i * n + c] * vectors[i * n + c];
    p *= std::sqrt(s);
  }
  return p;
}

bool gram_hadamard_check(std::span<const double> vectors, std::size_t m, std::size_t n) {
  double longest = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += vectors[i * n + c] * vectors[i * n + c];
    longest = std::max(longest, std::sqrt(s));
  }
  const double bound = std::tgamma(static_cast<double>(m) + 1.0) * std::pow(longest, static_cast<double>(m));
  return gram_volume(vectors, m, n) <= bound * (1.0 + 1e-12);
}

namespace {

double density(const ManifoldMesh& mesh, std::size_t q, std::span<const double> jac, std::vector<double>& pushed) {
  const std::size_t m = mesh.intrinsic_dim, n = mesh.ambient_dim;
  const auto frame = mesh.frame(q);
  pushed.assign(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) s += jac[r * n + c] * frame[i * n + c];
      pushed[i * n + r] = s;
    }
  if (!gram_hadamard_check(pushed, m, n))
    throw GramBoundViolation("Gram density exceeds m! max|v|^m at mesh point " + std::to_string(q));
  return gram_volume(pushed, m, n);
}

}  // namespace

double hausdorff_measure(const ManifoldMesh& mesh, std::span<const flow::TangentTrajectory> tangents, std::size_t k) {
  require(tangents.size() == mesh.size(), "one tangent trajectory per mesh point is required");
  std::vector<double> pushed;
  double total = 0.0;
  for (std::size_t q = 0; q < mesh.size(); ++q) {
    const auto& t = tangents[q];
    require(t.dimension == mesh.ambient_dim, "tangent dimension does not match the mesh");
    require(t.times == tangents[0].times, "tangent trajectories are on different grids");
    require(k < t.nodes(), "time index outside the trajectory");
    total += mesh.weights[q] * density(mesh, q, t.jacobian(k), pushed);
  }
  return total;
}

double hausdorff_measure(const ManifoldMesh& mesh,
                         const std::function<void(std::size_t, std::span<double>)>& jacobian_at) {
  const std::size_t n = mesh.ambient_dim;
  std::vector<double> jac(n * n), pushed;
  double total = 0.0;
  for (std::size_t q = 0; q < mesh.size(); ++q) {
    jacobian_at(q, jac);
    total += mesh.weights[q] * density(mesh, q, jac, pushed);
  }
  return total;
}

MeasureCurve measure_curve(const ManifoldMesh& mesh, std::span<const flow::TangentTrajectory> tangents) {
  require(!tangents.empty(), "no tangent trajectories");
  MeasureCurve curve;
  curve.times = tangents[0].times;
  curve.point_count = mesh.size();
  curve.rule = "midpoint-" + mesh.kind;
  for (std::size_t k = 0; k < curve.times.size(); ++k) curve.measure.push_back(hausdorff_measure(mesh, tangents, k));
  return curve;
}

}  // namespace fbmflow::geometry

#include "commute/cube_collapse.hpp"

#include <algorithm>
#include <cmath>

#include "commute/errors.hpp"

namespace commute {

void CollapseParams::validate() const {
  if (!(eps > 0.0 && eps <= 1.0 / 6.0))
    throw UsageError("eps must lie in (0, 1/6]");
  if (!(lambda_cap > 0.0) || !std::isfinite(lambda_cap))
    throw UsageError("lambda_cap must be positive");
  if (flow_steps < 16)
    throw UsageError("flow_steps must be at least 16");
  if (!(retry_shrink > 0.0 && retry_shrink < 1.0))
    throw UsageError("retry_shrink must lie in (0, 1)");
  if (max_retries < 0)
    throw UsageError("max_retries must be non-negative");
}

Point IntegerCube::center() const {
  Point m{};
  for (int a = 0; a < n; ++a)
    m[a] = static_cast<double>(nu[a]) + 0.5;
  return m;
}

IntegerCube containing_cube(std::span<const double> x) {
  IntegerCube c;
  c.n = static_cast<int>(x.size());
  for (std::size_t a = 0; a < x.size(); ++a)
    c.nu[a] = static_cast<std::int64_t>(std::floor(x[a]));
  return c;
}

namespace {

// c applied to a point whose largest |coordinate| is exactly 1/2.
Point apply_face_map(const Point& v, int n, double lambda_cap) {
  double extent = 0.0;
  for (int a = 0; a < n; ++a)
    extent = std::max(extent, std::abs(v[a]));
  Point out{};
  for (int a = 0; a < n; ++a) {
    if (std::abs(v[a]) == extent) {
      out[a] = std::copysign(0.5, v[a]);
    } else {
      const double t = std::clamp(v[a] + 0.5, 0.0, 1.0);
      out[a] = smoothstep_a(t, lambda_cap) - 0.5;
    }
  }
  return out;
}

// Radial projection of a non-zero y onto the boundary of [-1/2,1/2]^n,
// followed by c.
Point boundary_image(const Point& y, int n, double lambda_cap) {
  double extent = 0.0;
  for (int a = 0; a < n; ++a)
    extent = std::max(extent, std::abs(y[a]));
  const double scale = 0.5 / extent;
  Point v{};
  for (int a = 0; a < n; ++a)
    v[a] = std::abs(y[a]) == extent ? std::copysign(0.5, y[a]) : y[a] * scale;
  return apply_face_map(v, n, lambda_cap);
}

} // namespace

Point face_map_c(std::span<const double> x, double lambda_cap) {
  const int n = static_cast<int>(x.size());
  double extent = 0.0;
  for (double c : x)
    extent = std::max(extent, std::abs(c));
  if (std::abs(extent - 0.5) > 1e-12)
    throw UsageError("face_map_c: point is not on the boundary of [-1/2,1/2]^n");
  Point v = to_point(x);
  // Snap the extremal coordinates so the tolerance band maps like the face.
  for (int a = 0; a < n; ++a) {
    if (std::abs(std::abs(v[a]) - 0.5) <= 1e-12)
      v[a] = std::copysign(0.5, v[a]);
  }
  return apply_face_map(v, n, lambda_cap);
}

Point radial_to_cube_f(std::span<const double> u, double lambda_cap) {
  double norm2 = 0.0;
  for (double c : u)
    norm2 += c * c;
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
    throw UsageError("radial_to_cube_f: input must be a unit vector");
  return boundary_image(to_point(u), static_cast<int>(u.size()), lambda_cap);
}

Point cube_collapse_psi(std::span<const double> x, double eps, double lambda_cap) {
  const int n = static_cast<int>(x.size());
  const IntegerCube cube = containing_cube(x);
  const Point m = cube.center();
  Point y{};
  double r2 = 0.0;
  for (int a = 0; a < n; ++a) {
    y[a] = x[a] - m[a];
    r2 += y[a] * y[a];
  }
  const Point id = to_point(x);
  if (r2 == 0.0)
    return id;
  const double lam = smooth_step(std::sqrt(r2), eps, 2.0 * eps, lambda_cap);
  if (lam == 0.0)
    return id;
  const Point f = boundary_image(y, n, lambda_cap);
  Point out{};
  for (int a = 0; a < n; ++a) {
    const double target = m[a] + f[a];
    out[a] = lam == 1.0 ? target : (1.0 - lam) * id[a] + lam * target;
  }
  return out;
}

} // namespace commute

#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "commute/smoothing.hpp"

namespace commute {

/// Fixed-capacity point in R^n, n <= 3; components past n are zero.
using Point = std::array<double, 3>;

inline Point to_point(std::span<const double> x) {
  Point p{};
  for (std::size_t a = 0; a < x.size() && a < 3; ++a)
    p[a] = x[a];
  return p;
}

struct CollapseParams {
  double eps = 1.0 / 6.0;              ///< centre-ball radius, in (0, 1/6]
  double lambda_cap = kDefaultLambdaCap; ///< mollifier sharpness
  int flow_steps = 64;                 ///< minimum RK4 steps for the time-1 flow
  double retry_shrink = 0.5;           ///< eps back-off factor on a failed check
  int max_retries = 8;

  /// Throws UsageError when a field is out of range.
  void validate() const;
};

/// Unit cube C_nu = prod [nu_i, nu_i + 1] with centre m_nu = nu + 1/2.
struct IntegerCube {
  std::array<std::int64_t, 3> nu{};
  int n = 2;

  Point center() const;
  bool operator==(const IntegerCube&) const = default;
  auto operator<=>(const IntegerCube&) const = default;
};

/// Cube containing x, faces resolved by floor.
IntegerCube containing_cube(std::span<const double> x);

/// c: boundary of [-1/2,1/2]^n onto itself. Each coordinate u is replaced by
/// a(u + 1/2) - 1/2; the extremal coordinate(s) stay at +-1/2. Throws
/// UsageError if x is not on the boundary (tolerance 1e-12).
Point face_map_c(std::span<const double> x, double lambda_cap = kDefaultLambdaCap);

/// f = c o (radial projection restricted to the cube boundary)^{-1}: scales
/// the unit vector u onto the boundary of [-1/2,1/2]^n and applies c.
/// Throws UsageError unless |u|_2 = 1 within 1e-12.
Point radial_to_cube_f(std::span<const double> u, double lambda_cap = kDefaultLambdaCap);

/// Cube collapse psi: identity on every B(m_nu, eps), maps every integer cube
/// into itself and C_nu minus B(m_nu, 2 eps) onto the boundary of C_nu.
Point cube_collapse_psi(std::span<const double> x, double eps, double lambda_cap = kDefaultLambdaCap);

inline Point cube_collapse_psi(std::span<const double> x, const CollapseParams& params) {
  return cube_collapse_psi(x, params.eps, params.lambda_cap);
}

} // namespace commute

#pragma once

#include <span>
#include <vector>

#include "commute/cube_collapse.hpp"
#include "commute/voxel_set.hpp"

namespace commute {

/// Sharpness of the mollifier profiles inside the flow fields. Kept low so
/// the time-1 flows stay non-stiff for explicit RK4.
inline constexpr double kFlowSharpness = 1.0;

/// Below this clearance (unit-cube lengths) a cube is reported as full.
inline constexpr double kMinFreeDistance = 1e-3;

/// Vector field of one cube meeting K: equal to the constant shift m - p on
/// the capsule of radius `inner` around the segment [p, m], decaying smoothly
/// to zero at radius `outer`, zero elsewhere. Its time-1 flow translates
/// B(p, inner) onto B(m, inner).
struct ClearingField {
  IntegerCube cube;
  Point p{};             ///< free-ball centre p_C
  double eps_c = 0.0;    ///< clearance / 3 from the free-ball search
  double inner = 0.0;    ///< 2 eps
  double outer = 0.0;    ///< 3 eps

  Point shift() const;
  double segment_distance(const Point& x) const;
  /// Scalar profile beta in [0,1]; the field is shift() * beta.
  double profile(const Point& x) const;
  Point velocity(const Point& x) const;
  /// Upper bound on the Lipschitz constant of velocity().
  double lipschitz() const;
  /// RK4 step count that keeps step * lipschitz <= 1/4.
  int steps(int min_steps) const;

  /// Throws ConstructionError unless B(p, outer) and B(m, outer) lie in the
  /// closed cube and inner < outer.
  void validate() const;
};

/// Radial contraction toward the corner nu of a cube that K fills:
/// X(x) = 2 sqrt(n) sigma(|x - nu|) (nu - x) / |x - nu| with sigma = 0 on
/// [0, 1/10], 1 on [1/9, sqrt(n) + 1] and 0 beyond sqrt(n) + 2.
struct SpecialField {
  IntegerCube cube;

  double sigma(double r) const;
  Point velocity(const Point& x) const;
  double lipschitz() const;
  int steps(int min_steps) const;
};

/// Classical RK4 integration of x' = field.velocity(x) over [0, 1].
template <class Field> Point rk4_time_one(const Field& field, Point x, int n, int steps) {
  const double h = 1.0 / steps;
  Point stage{};
  for (int s = 0; s < steps; ++s) {
    const Point k1 = field.velocity(x);
    for (int a = 0; a < n; ++a)
      stage[a] = x[a] + 0.5 * h * k1[a];
    const Point k2 = field.velocity(stage);
    for (int a = 0; a < n; ++a)
      stage[a] = x[a] + 0.5 * h * k2[a];
    const Point k3 = field.velocity(stage);
    for (int a = 0; a < n; ++a)
      stage[a] = x[a] + h * k3[a];
    const Point k4 = field.velocity(stage);
    for (int a = 0; a < n; ++a)
      x[a] += h / 6.0 * (k1[a] + 2.0 * (k2[a] + k3[a]) + k4[a]);
  }
  return x;
}

struct FreeBall {
  bool full_cube = false;
  Point p{};
  double clearance = 0.0; ///< distance from p to K and to the cube boundary
  double eps_c = 0.0;     ///< clearance / 3
};

/// Largest K-free ball inside `cube`: a distance transform on a lattice of
/// candidate centres picks p, then the clearance is recomputed exactly
/// against the voxel boxes. Reports a full cube when no candidate is free
/// or the clearance is below kMinFreeDistance.
FreeBall find_free_ball(const VoxelSet& k, const IntegerCube& cube);

/// Same, restricted to the given voxel ids (those meeting the cube).
FreeBall find_free_ball(const VoxelSet& k, const IntegerCube& cube, std::span<const std::size_t> voxel_ids);

/// Time-1 map of the combined clearing field (or of the special radial field
/// when `special` is non-empty). `fields` must be sorted by cube. The result
/// of a clearing flow is clamped to the starting cube, which the exact flow
/// never leaves.
Point clearing_flow_phi(std::span<const double> x, std::span<const ClearingField> fields,
                        std::span<const SpecialField> special, int min_steps);

/// Squared Euclidean distance transform (Felzenszwalb-Huttenlocher) of a
/// row-major grid; `cost` holds 0 at sources and a large value elsewhere.
void distance_transform(std::vector<double>& cost, std::span<const int> shape);

} // namespace commute

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "commute/clearing_flow.hpp"
#include "commute/cube_collapse.hpp"
#include "commute/voxel_set.hpp"

namespace commute {

enum class CollapseMode { Identity, Generic, Special };

const char* to_string(CollapseMode mode);

/// phi(x) = (psi(Phi(gamma x + o)) - o) / gamma. The lattice offset o is 0
/// unless a cube was saturated, in which case the construction retried on
/// the half-shifted lattice.
struct CollapseMap {
  int n = 2;
  CollapseMode mode = CollapseMode::Identity;
  double gamma = 1.0;
  double measure = 0.0;
  Point lattice_offset{};
  CollapseParams params;               ///< eps is the final, verified radius
  std::vector<ClearingField> clearing; ///< sorted by cube
  std::vector<SpecialField> special_cubes;
  int retries_used = 0;

  /// x in original coordinates to scaled coordinates and back.
  Point to_scaled(std::span<const double> x) const;
  Point from_scaled(const Point& z) const;

  Point evaluate(std::span<const double> x) const;
};

/// Builds phi for K. Empty K gives the identity. Throws ConstructionError
/// when the clearing postcondition still fails after params.max_retries
/// eps back-offs on both lattice offsets.
CollapseMap build_collapse_map(const VoxelSet& k, const CollapseParams& params = {});

namespace serial {
std::vector<double> evaluate_collapse(const CollapseMap& map, std::span<const double> points);
}
namespace parallel {
std::vector<double> evaluate_collapse(const CollapseMap& map, std::span<const double> points);
}

inline Point evaluate_collapse(const CollapseMap& map, std::span<const double> x) { return map.evaluate(x); }
/// Batch evaluation of n-interleaved points.
inline std::vector<double> evaluate_collapse_batch(const CollapseMap& map, std::span<const double> points) {
  return parallel::evaluate_collapse(map, points);
}

struct DisplacementReport {
  std::vector<double> per_coordinate_sup;
  double bound = 0.0; ///< measure(K)^{1/n}
  /// max over samples of min_i dist(gamma phi_i + o_i, Z); empty in identity mode.
  std::optional<double> skeleton_max_distance;
  std::uint64_t samples = 0;

  double max_displacement() const;
  /// Every coordinate within bound * (1 + 1e-6) and the skeleton distance
  /// (when defined) at most 1e-9.
  bool certified() const;
};

/// Samples every voxel of K at its corners, its centre and
/// `samples_per_voxel` uniform interior points (per-voxel seeded streams).
/// Throws UsageError when samples_per_voxel < 8.
DisplacementReport displacement_report(const CollapseMap& map, const VoxelSet& k, int samples_per_voxel = 8,
                                       std::uint64_t seed = 0);

/// min_i dist(t_i, Z).
double skeleton_distance(const Point& t, int n);

inline constexpr double kDisplacementSlack = 1e-6;
inline constexpr double kSkeletonTolerance = 1e-9;

} // namespace commute

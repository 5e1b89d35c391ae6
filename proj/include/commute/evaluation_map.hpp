#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "commute/bracket.hpp"
#include "commute/torus_grid.hpp"
#include "commute/voxel_set.hpp"

namespace commute {

/// Point cloud alpha(M) in R^n: one point per node of the (super)sampled
/// torus grid, in the same row-major order.
struct EvaluationSample {
  TorusDomain domain;
  int supersample_factor = 1;
  std::vector<int> sample_resolution;
  std::vector<double> points;        ///< size() * n coordinates
  std::vector<double> abs_jacobian;  ///< |bracket| per point; empty if unknown
  /// Per image axis i: bound on the change of coordinate i between two
  /// neighbouring sample nodes (spacing times max partial derivative).
  std::vector<double> max_step;

  int dim() const { return domain.n; }
  std::size_t size() const { return points.size() / static_cast<std::size_t>(domain.n); }
  std::span<const double> point(std::size_t k) const {
    return std::span<const double>(points).subspan(k * static_cast<std::size_t>(domain.n),
                                                   static_cast<std::size_t>(domain.n));
  }
  /// Torus volume represented by one sample.
  double sample_cell_volume() const;
  std::size_t sample_stride(int axis) const;
};

/// alpha = (F_1,...,F_n) at every node of the grid refined by
/// `supersample_factor` (multilinear interpolation between grid nodes).
/// Throws UsageError on a domain mismatch or a factor < 1.
EvaluationSample evaluate_map(std::span<const GridField> fields, int supersample_factor = 1);

namespace serial {
VoxelSet voxelize_image(const EvaluationSample& sample, double voxel_size, int dilation);
}
namespace parallel {
VoxelSet voxelize_image(const EvaluationSample& sample, double voxel_size, int dilation);
}

/// Voxels (lattice anchored at the origin) containing a sample point, then
/// Chebyshev-dilated by `dilation` voxels. Throws UsageError for an empty
/// sample, a non-positive voxel size or a negative dilation.
inline VoxelSet voxelize_image(const EvaluationSample& sample, double voxel_size, int dilation = 1) {
  return parallel::voxelize_image(sample, voxel_size, dilation);
}

enum class CellFlag : std::uint8_t {
  Ok,             ///< component count agrees with the Jacobian-weighted estimate
  NonIntegral,    ///< estimate differs from the count by more than 0.25
  DegenerateFiber ///< points land here but every preimage has zero Jacobian
};

struct MultiplicityCell {
  VoxelSet::Index index{};
  int count = 0;        ///< connected preimage components with non-zero Jacobian mass
  double estimate = 0;  ///< sum |J| * sample volume / cell volume (mean of n_alpha)
  std::int64_t points = 0;
  CellFlag flag = CellFlag::Ok;
};

/// Estimate of the multiplicity function n_alpha on a (possibly
/// anisotropic) cell lattice anchored at the origin.
struct MultiplicityGrid {
  int n = 2;
  std::vector<double> cell_size;
  std::vector<MultiplicityCell> cells; ///< sorted by index

  double cell_volume() const;
  /// sum count * cell volume, the left side of the area formula.
  double integral() const;
  std::size_t flagged(CellFlag flag) const;
  const MultiplicityCell* find(const VoxelSet::Index& idx) const;
};

/// Counts, per cell, the connected components (Chebyshev adjacency on the
/// periodic sample grid) of the points that land in it. Components whose
/// Jacobian mass vanishes are dropped and the cell is flagged as a
/// degenerate fiber. Throws UsageError when a cell side is below
/// 2 * max_step on its axis (the sampling would split or miss components).
MultiplicityGrid multiplicity(const EvaluationSample& sample, double voxel_size);
MultiplicityGrid multiplicity(const EvaluationSample& sample, std::span<const double> cell_size);

struct AreaFormulaResult {
  double multiplicity_integral = 0.0; ///< integral of n_alpha over R^n
  double bracket_l1 = 0.0;            ///< |{F_1,...,F_n}|_{L^1}
  double residual = 0.0;              ///< |difference| / max(1, bracket_l1)
  double flagged_fraction = 0.0;
};

/// Both sides of the area formula for alpha = (F_1,...,F_n).
AreaFormulaResult area_formula_check(std::span<const GridField> fields, const EvaluationSample& sample,
                                     double voxel_size);
AreaFormulaResult area_formula_check(std::span<const GridField> fields, const EvaluationSample& sample,
                                     std::span<const double> cell_size);

struct DegreeCheck {
  bool ok = false;
  double measure = 0.0;
  double epsilon = 0.0;
  double slack = 1.5;
  std::string note;
};

/// Checks |K| <= slack * epsilon (the degree-zero consequence 2|K| <= L^1).
/// With epsilon = 0 and a non-empty image the check fails with the note
/// "dilation floor": a voxelized image never has measure zero.
DegreeCheck degree_bound_check(const VoxelSet& voxels, const BracketReport& report, double slack = 1.5);

} // namespace commute

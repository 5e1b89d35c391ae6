#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace commute {

/// Compact subset of R^n given as a finite union of closed axis-aligned
/// voxels [origin + s*idx, origin + s*(idx+1)]. Indices are kept sorted
/// lexicographically and unique; unused trailing components are zero.
class VoxelSet {
public:
  using Index = std::array<std::int32_t, 3>;

  VoxelSet() = default;
  /// Throws UsageError for n outside {2,3}, a non-positive voxel size or an
  /// origin of the wrong length. Duplicate indices are merged.
  VoxelSet(int n, double voxel_size, std::vector<double> origin, std::vector<Index> indices);

  int dim() const { return n_; }
  double voxel_size() const { return voxel_size_; }
  std::span<const double> origin() const { return origin_; }
  const std::vector<Index>& indices() const { return indices_; }
  std::size_t count() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }

  /// count * voxel_size^n.
  double measure() const;
  bool contains(const Index& idx) const;

  void voxel_box(std::size_t k, std::span<double> lo, std::span<double> hi) const;
  /// Euclidean distance from x to the closed box of voxel k (0 inside).
  double distance_to_voxel(std::size_t k, std::span<const double> x) const;

  /// Image under x -> gamma * x (same indices, scaled size and origin).
  VoxelSet scaled(double gamma) const;
  /// Chebyshev dilation by `radius` voxels.
  VoxelSet dilated(int radius) const;
  /// Union with another set on the same lattice.
  VoxelSet merged(const VoxelSet& other) const;

  bool operator==(const VoxelSet&) const = default;

private:
  int n_ = 2;
  double voxel_size_ = 1.0;
  std::vector<double> origin_{0.0, 0.0};
  std::vector<Index> indices_;
};

} // namespace commute

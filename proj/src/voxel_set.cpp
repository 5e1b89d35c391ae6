#include "commute/voxel_set.hpp"

#include <algorithm>
#include <cmath>

#include "commute/errors.hpp"

namespace commute {

VoxelSet::VoxelSet(int n, double voxel_size, std::vector<double> origin, std::vector<Index> indices)
    : n_(n), voxel_size_(voxel_size), origin_(std::move(origin)), indices_(std::move(indices)) {
  if (n_ != 2 && n_ != 3)
    throw UsageError("voxel set dimension must be 2 or 3");
  if (!std::isfinite(voxel_size_) || voxel_size_ <= 0.0)
    throw UsageError("voxel size must be finite and positive");
  if (origin_.size() != static_cast<std::size_t>(n_))
    throw UsageError("voxel origin needs one coordinate per axis");
  for (auto& idx : indices_) {
    for (int a = n_; a < 3; ++a)
      idx[a] = 0;
  }
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

double VoxelSet::measure() const {
  double cell = 1.0;
  for (int a = 0; a < n_; ++a)
    cell *= voxel_size_;
  return static_cast<double>(indices_.size()) * cell;
}

bool VoxelSet::contains(const Index& idx) const {
  Index key = idx;
  for (int a = n_; a < 3; ++a)
    key[a] = 0;
  return std::binary_search(indices_.begin(), indices_.end(), key);
}

void VoxelSet::voxel_box(std::size_t k, std::span<double> lo, std::span<double> hi) const {
  for (int a = 0; a < n_; ++a) {
    lo[a] = origin_[a] + voxel_size_ * indices_[k][a];
    hi[a] = origin_[a] + voxel_size_ * (indices_[k][a] + 1);
  }
}

double VoxelSet::distance_to_voxel(std::size_t k, std::span<const double> x) const {
  double d2 = 0.0;
  for (int a = 0; a < n_; ++a) {
    const double lo = origin_[a] + voxel_size_ * indices_[k][a];
    const double hi = origin_[a] + voxel_size_ * (indices_[k][a] + 1);
    const double gap = x[a] < lo ? lo - x[a] : (x[a] > hi ? x[a] - hi : 0.0);
    d2 += gap * gap;
  }
  return std::sqrt(d2);
}

VoxelSet VoxelSet::scaled(double gamma) const {
  std::vector<double> origin(origin_);
  for (double& o : origin)
    o *= gamma;
  return VoxelSet(n_, voxel_size_ * gamma, std::move(origin), indices_);
}

VoxelSet VoxelSet::dilated(int radius) const {
  if (radius < 0)
    throw UsageError("dilation radius must be non-negative");
  if (radius == 0 || indices_.empty())
    return *this;
  const int side = 2 * radius + 1;
  int block = 1;
  for (int a = 0; a < n_; ++a)
    block *= side;
  std::vector<Index> grown;
  grown.reserve(indices_.size() * static_cast<std::size_t>(block));
  for (const Index& idx : indices_) {
    for (int o = 0; o < block; ++o) {
      Index next = idx;
      int rest = o;
      for (int a = 0; a < n_; ++a) {
        next[a] += rest % side - radius;
        rest /= side;
      }
      grown.push_back(next);
    }
  }
  return VoxelSet(n_, voxel_size_, origin_, std::move(grown));
}

VoxelSet VoxelSet::merged(const VoxelSet& other) const {
  if (other.n_ != n_ || other.voxel_size_ != voxel_size_ || other.origin_ != origin_)
    throw UsageError("cannot merge voxel sets on different lattices");
  std::vector<Index> all(indices_);
  all.insert(all.end(), other.indices_.begin(), other.indices_.end());
  return VoxelSet(n_, voxel_size_, origin_, std::move(all));
}

} // namespace commute

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "commute/torus_grid.hpp"
#include "commute/voxel_set.hpp"

namespace commute::testing {

inline std::vector<GridField> fields_on(const TorusDomain& d, std::initializer_list<std::string> exprs) {
  std::vector<GridField> out;
  for (const std::string& e : exprs)
    out.push_back(sample_field(d, e));
  return out;
}

/// Random voxel set on a lattice of `side` voxels per axis inside [0,1]^n
/// whose measure is close to `measure` (at least one voxel).
inline VoxelSet random_voxels(int n, double measure, std::uint64_t seed, int side = 32) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(0, side - 1);
  const double size = 1.0 / side;
  const auto wanted = std::max<long>(1, std::lround(measure / std::pow(size, n)));
  std::vector<VoxelSet::Index> idx;
  while (static_cast<long>(idx.size()) < wanted) {
    VoxelSet::Index v{coord(rng), coord(rng), n == 3 ? coord(rng) : 0};
    if (std::find(idx.begin(), idx.end(), v) == idx.end())
      idx.push_back(v);
  }
  return VoxelSet(n, size, std::vector<double>(static_cast<std::size_t>(n), 0.0), idx);
}

inline std::string temp_path(const std::string& name) { return "commute_test_" + name; }

} // namespace commute::testing

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "commute/bracket.hpp"
#include "commute/collapse_map.hpp"
#include "commute/evaluation_map.hpp"
#include "commute/torus_grid.hpp"

namespace commute {

struct ApproximationSettings {
  double voxel_size = 1.0 / 512;
  int dilation = 1;
  CollapseParams params;
};

struct ApproximationReport {
  BracketReport bracket_before;
  double measure_k = 0.0;
  double bound = 0.0;       ///< epsilon^{1/n}, the theorem bound
  double lemma_bound = 0.0; ///< measure_k^{1/n}, what the construction certifies
  std::vector<double> per_coordinate_displacement;
  double bracket_after_l1 = 0.0;
  double bracket_after_c0 = 0.0;
  /// Distance of the alpha' values to the scaled skeleton, original units.
  double skeleton_max_distance = 0.0;
  DegreeCheck degree;
  CollapseMode mode = CollapseMode::Identity;
  double gamma = 1.0;
  double final_eps = 0.0;
  int retries_used = 0;
  std::size_t voxel_count = 0;
  // Grid and voxel parameters the run used.
  TorusDomain domain;
  ApproximationSettings settings;
  std::vector<std::string> notes;

  double max_displacement() const;
  /// Displacement within lemma_bound * (1 + 1e-6) and skeleton distance
  /// within 1e-9.
  bool certified() const;
};

struct Approximation {
  std::vector<GridField> fields;
  ApproximationReport report;
  VoxelSet image; ///< K, empty on the identity path
  CollapseMap map;
};

/// F'_i(node) = p_i(phi(alpha(node))) where phi collapses the voxelized
/// image of alpha. A bracket with zero L^1 norm takes the identity path.
/// Throws UsageError on a domain mismatch and ConstructionError when the
/// collapse map cannot be built.
Approximation commuting_approximation(std::span<const GridField> fields, const ApproximationSettings& settings);

struct ThicknessReport {
  double measure = 0.0;
  double thickness_upper = 0.0;
  DisplacementReport certificate;
  CollapseMode mode = CollapseMode::Identity;

  /// thickness_upper^n <= measure * (1 + 1e-3).
  bool certified(int n) const;
};

/// Upper bound on the thickness of K from the constructed collapse map.
/// Throws UsageError for a set of measure zero.
ThicknessReport thickness_upper_bound(const VoxelSet& k, const CollapseParams& params = {}, int samples_per_voxel = 8,
                                      std::uint64_t seed = 0);

struct SequenceEntry {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  double epsilon = 0.0;
  double sqrt_epsilon = 0.0;
  double displacement = 0.0;            ///< max over both coordinates
  double cumulative_displacement = 0.0; ///< running sum of displacement
  std::optional<ApproximationReport> report;
  std::vector<GridField> fields; ///< (F'_k, G'_k) when ok
};

/// commuting_approximation on each pair (n = 2). A failing pair is recorded
/// with its error and the sequence continues.
std::vector<SequenceEntry> commuting_sequence(std::span<const std::array<GridField, 2>> pairs,
                                              const ApproximationSettings& settings);

} // namespace commute

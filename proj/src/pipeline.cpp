#include "commute/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "commute/errors.hpp"
#include "commute/parallel.hpp"

namespace commute {

double ApproximationReport::max_displacement() const {
  double m = 0.0;
  for (double d : per_coordinate_displacement)
    m = std::max(m, d);
  return m;
}

bool ApproximationReport::certified() const {
  return max_displacement() <= lemma_bound * (1.0 + kDisplacementSlack) &&
         skeleton_max_distance <= kSkeletonTolerance;
}

namespace {

double field_range(const GridField& f) {
  const auto [lo, hi] = std::minmax_element(f.values().begin(), f.values().end());
  return *hi - *lo;
}

} // namespace

Approximation commuting_approximation(std::span<const GridField> fields, const ApproximationSettings& settings) {
  require_shared_domain(fields);
  settings.params.validate();
  if (!(settings.voxel_size > 0.0) || settings.dilation < 0)
    throw UsageError("voxel size must be positive and dilation non-negative");
  const TorusDomain& domain = fields.front().domain();
  const int n = domain.n;

  Approximation out;
  ApproximationReport& r = out.report;
  r.domain = domain;
  r.settings = settings;
  r.bracket_before = bracket_report(bracket(fields));
  r.bound = std::pow(r.bracket_before.epsilon, 1.0 / n);
  r.per_coordinate_displacement.assign(static_cast<std::size_t>(n), 0.0);

  if (r.bracket_before.l1_norm == 0.0) {
    // Already commuting: phi = id, nothing to measure.
    out.fields.assign(fields.begin(), fields.end());
    out.map.n = n;
    out.image = VoxelSet(n, settings.voxel_size, std::vector<double>(static_cast<std::size_t>(n), 0.0), {});
    r.final_eps = settings.params.eps;
    r.degree = DegreeCheck{true, 0.0, 0.0, 1.5, "identity path, image not measured"};
    r.notes.push_back("identity map, certificate trivially inherited");
    return out;
  }

  const EvaluationSample sample = evaluate_map(fields, 1);
  out.image = voxelize_image(sample, settings.voxel_size, settings.dilation);
  const VoxelSet& k = out.image;
  r.measure_k = k.measure();
  r.voxel_count = k.count();
  r.lemma_bound = std::pow(r.measure_k, 1.0 / n);
  r.degree = degree_bound_check(k, r.bracket_before);

  out.map = build_collapse_map(k, settings.params);
  const CollapseMap& map = out.map;
  r.mode = map.mode;
  r.gamma = map.gamma;
  r.final_eps = map.params.eps;
  r.retries_used = map.retries_used;

  const std::vector<double> moved = evaluate_collapse_batch(map, sample.points);
  const std::size_t nodes = domain.node_count();
  std::vector<std::vector<double>> values(static_cast<std::size_t>(n), std::vector<double>(nodes));
  std::array<double, 3> sup{0.0, 0.0, 0.0};
  double skeleton = 0.0;
  for (std::size_t k_node = 0; k_node < nodes; ++k_node) {
    Point phi{};
    for (int i = 0; i < n; ++i) {
      const std::size_t at = k_node * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
      phi[i] = moved[at];
      values[i][k_node] = moved[at];
      sup[i] = std::max(sup[i], std::abs(sample.points[at] - moved[at]));
    }
    if (map.mode != CollapseMode::Identity) {
      const Point t = map.to_scaled(std::span<const double>(phi.data(), static_cast<std::size_t>(n)));
      skeleton = std::max(skeleton, skeleton_distance(t, n) / map.gamma);
    }
  }
  for (int i = 0; i < n; ++i) {
    r.per_coordinate_displacement[i] = sup[i];
    out.fields.emplace_back(domain, std::move(values[i]));
  }
  r.skeleton_max_distance = skeleton;

  const GridField after = bracket(out.fields);
  r.bracket_after_l1 = l1_norm(after);
  r.bracket_after_c0 = c0_norm(after);

  double widest = 0.0;
  for (const GridField& f : fields)
    widest = std::max(widest, field_range(f));
  if (r.bound >= widest)
    r.notes.push_back("bound vacuous but construction still collapses image");
  if (!r.degree.ok)
    r.notes.push_back(r.degree.note.empty() ? "measured image exceeds the degree-zero bound" : r.degree.note);
  return out;
}

bool ThicknessReport::certified(int n) const {
  return std::pow(thickness_upper, n) <= measure * (1.0 + 1e-3) && certificate.certified();
}

ThicknessReport thickness_upper_bound(const VoxelSet& k, const CollapseParams& params, int samples_per_voxel,
                                      std::uint64_t seed) {
  if (k.empty())
    throw UsageError("use identity; thickness 0");
  const CollapseMap map = build_collapse_map(k, params);
  ThicknessReport t;
  t.measure = k.measure();
  t.mode = map.mode;
  t.certificate = displacement_report(map, k, samples_per_voxel, seed);
  t.thickness_upper = t.certificate.max_displacement();
  return t;
}

std::vector<SequenceEntry> commuting_sequence(std::span<const std::array<GridField, 2>> pairs,
                                              const ApproximationSettings& settings) {
  std::vector<SequenceEntry> entries;
  double running = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    SequenceEntry e;
    e.index = i;
    try {
      if (pairs[i][0].domain().n != 2)
        throw UsageError("sequence pairs must live on a 2-torus");
      Approximation a = commuting_approximation(pairs[i], settings);
      e.ok = true;
      e.epsilon = a.report.bracket_before.epsilon;
      e.sqrt_epsilon = std::sqrt(e.epsilon);
      e.displacement = a.report.max_displacement();
      e.fields = std::move(a.fields);
      e.report = std::move(a.report);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    running += e.displacement;
    e.cumulative_displacement = running;
    entries.push_back(std::move(e));
  }
  return entries;
}

} // namespace commute

#include "commute/collapse_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "commute/errors.hpp"
#include "commute/parallel.hpp"

namespace commute {

const char* to_string(CollapseMode mode) {
  switch (mode) {
  case CollapseMode::Identity:
    return "identity";
  case CollapseMode::Generic:
    return "generic";
  case CollapseMode::Special:
    return "special";
  }
  return "unknown";
}

Point CollapseMap::to_scaled(std::span<const double> x) const {
  Point y{};
  for (int a = 0; a < n; ++a)
    y[a] = gamma * x[a] + lattice_offset[a];
  return y;
}

Point CollapseMap::from_scaled(const Point& z) const {
  Point x{};
  for (int a = 0; a < n; ++a)
    x[a] = (z[a] - lattice_offset[a]) / gamma;
  return x;
}

Point CollapseMap::evaluate(std::span<const double> x) const {
  if (mode == CollapseMode::Identity)
    return to_point(x);
  const Point y = to_scaled(x);
  const auto ys = std::span<const double>(y.data(), static_cast<std::size_t>(n));
  const Point moved = clearing_flow_phi(ys, clearing, special_cubes, params.flow_steps);
  const Point z = cube_collapse_psi(std::span<const double>(moved.data(), static_cast<std::size_t>(n)), params);
  return from_scaled(z);
}

double skeleton_distance(const Point& t, int n) {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a)
    d = std::min(d, std::abs(t[a] - std::round(t[a])));
  return d;
}

namespace {

// gamma * K + offset.
VoxelSet place(const VoxelSet& k, double gamma, double offset) {
  const VoxelSet s = k.scaled(gamma);
  std::vector<double> origin(s.origin().begin(), s.origin().end());
  for (double& o : origin)
    o += offset;
  return VoxelSet(k.dim(), s.voxel_size(), std::move(origin), s.indices());
}

// Corners, centre and the 2^n sub-cube centres of voxel id.
std::vector<Point> check_points(const VoxelSet& k, std::size_t id) {
  const int n = k.dim();
  Point lo{}, hi{};
  k.voxel_box(id, lo, hi);
  std::vector<Point> pts;
  const int corners = 1 << n;
  for (int b = 0; b < corners; ++b) {
    Point c{}, sub{};
    for (int a = 0; a < n; ++a) {
      const bool up = (b >> a) & 1;
      c[a] = up ? hi[a] : lo[a];
      sub[a] = lo[a] + (up ? 0.75 : 0.25) * (hi[a] - lo[a]);
    }
    pts.push_back(c);
    pts.push_back(sub);
  }
  Point mid{};
  for (int a = 0; a < n; ++a)
    mid[a] = 0.5 * (lo[a] + hi[a]);
  pts.push_back(mid);
  return pts;
}

std::optional<IntegerCube> single_cube(const VoxelSet& k) {
  const int n = k.dim();
  IntegerCube cube;
  cube.n = n;
  for (int a = 0; a < n; ++a) {
    std::int32_t lo_i = std::numeric_limits<std::int32_t>::max();
    std::int32_t hi_i = std::numeric_limits<std::int32_t>::min();
    for (const auto& idx : k.indices()) {
      lo_i = std::min(lo_i, idx[a]);
      hi_i = std::max(hi_i, idx[a]);
    }
    const double lo = k.origin()[a] + k.voxel_size() * lo_i;
    const double hi = k.origin()[a] + k.voxel_size() * (static_cast<double>(hi_i) + 1.0);
    const double nu = std::floor(lo + 1e-9);
    if (hi > nu + 1.0 + 1e-9)
      return std::nullopt;
    cube.nu[a] = static_cast<std::int64_t>(nu);
  }
  return cube;
}

// First voxel (lowest id) whose check points violate the clearing
// postcondition, or k.count() when none does.
std::size_t first_violation(const CollapseMap& map, const VoxelSet& scaled_k) {
  const double radius = 2.0 * map.params.eps * (1.0 - 1e-6);
  const auto count = static_cast<std::int64_t>(scaled_k.count());
  std::size_t worst = scaled_k.count();
  const int n = map.n;
#pragma omp parallel for schedule(dynamic, 64) reduction(min : worst)
  for (std::int64_t id = 0; id < count; ++id) {
    for (const Point& x : check_points(scaled_k, static_cast<std::size_t>(id))) {
      const Point y = clearing_flow_phi(std::span<const double>(x.data(), static_cast<std::size_t>(n)), map.clearing,
                                        map.special_cubes, map.params.flow_steps);
      const Point m = containing_cube(std::span<const double>(y.data(), static_cast<std::size_t>(n))).center();
      double r2 = 0.0;
      for (int a = 0; a < n; ++a)
        r2 += (y[a] - m[a]) * (y[a] - m[a]);
      if (std::sqrt(r2) < radius) {
        worst = std::min(worst, static_cast<std::size_t>(id));
        break;
      }
    }
  }
  return worst;
}

std::string describe_cube(const VoxelSet& k, std::size_t id) {
  Point lo{}, hi{};
  k.voxel_box(id, lo, hi);
  const IntegerCube c = containing_cube(std::span<const double>(lo.data(), static_cast<std::size_t>(k.dim())));
  std::ostringstream out;
  out << "cube nu=(";
  for (int a = 0; a < k.dim(); ++a)
    out << (a ? "," : "") << c.nu[a];
  out << ")";
  return out.str();
}

void rebuild_fields(CollapseMap& map) {
  for (ClearingField& f : map.clearing) {
    f.inner = 2.0 * map.params.eps;
    f.outer = 3.0 * map.params.eps;
    f.validate();
  }
}

// Shrinks eps until the clearing postcondition holds on every check point.
void verify_with_retries(CollapseMap& map, const VoxelSet& scaled_k) {
  for (int attempt = 0;; ++attempt) {
    rebuild_fields(map);
    const std::size_t bad = first_violation(map, scaled_k);
    if (bad == scaled_k.count()) {
      map.retries_used = attempt;
      return;
    }
    if (attempt == map.params.max_retries)
      throw ConstructionError("clearing postcondition still violated after " + std::to_string(attempt) +
                              " retries at " + describe_cube(scaled_k, bad));
    map.params.eps *= map.params.retry_shrink;
  }
}

// Clearing fields for the cubes whose interior meets scaled_k; nullopt when
// one of them has no usable free ball.
std::optional<std::vector<ClearingField>> clearing_fields(const VoxelSet& scaled_k) {
  const int n = scaled_k.dim();
  std::map<IntegerCube, std::vector<std::size_t>> members;
  Point lo{}, hi{};
  for (std::size_t id = 0; id < scaled_k.count(); ++id) {
    scaled_k.voxel_box(id, lo, hi);
    std::array<std::int64_t, 3> first{0, 0, 0};
    std::array<std::int64_t, 3> last{0, 0, 0};
    for (int a = 0; a < n; ++a) {
      first[a] = static_cast<std::int64_t>(std::floor(lo[a]));
      last[a] = static_cast<std::int64_t>(std::ceil(hi[a])) - 1;
      last[a] = std::max(last[a], first[a]);
    }
    for (std::int64_t i = first[0]; i <= last[0]; ++i) {
      for (std::int64_t j = first[1]; j <= last[1]; ++j) {
        for (std::int64_t l = first[2]; l <= last[2]; ++l) {
          IntegerCube c;
          c.n = n;
          c.nu = {i, j, l};
          members[c].push_back(id);
        }
      }
    }
  }

  std::vector<IntegerCube> cubes;
  std::vector<const std::vector<std::size_t>*> ids;
  for (const auto& [cube, list] : members) {
    cubes.push_back(cube);
    ids.push_back(&list);
  }
  std::vector<FreeBall> balls(cubes.size());
  const auto count = static_cast<std::int64_t>(cubes.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < count; ++c)
    balls[c] = find_free_ball(scaled_k, cubes[c], *ids[c]);

  std::vector<ClearingField> fields;
  for (std::size_t c = 0; c < cubes.size(); ++c) {
    if (balls[c].full_cube)
      return std::nullopt;
    ClearingField f;
    f.cube = cubes[c];
    f.p = balls[c].p;
    f.eps_c = balls[c].eps_c;
    fields.push_back(f);
  }
  return fields;
}

} // namespace

CollapseMap build_collapse_map(const VoxelSet& k, const CollapseParams& params) {
  params.validate();
  CollapseMap map;
  map.n = k.dim();
  map.params = params;
  map.measure = k.measure();
  if (k.empty())
    return map;

  map.gamma = std::pow(map.measure, -1.0 / map.n);
  for (double offset : {0.0, 0.5}) {
    const VoxelSet scaled_k = place(k, map.gamma, offset);
    CollapseMap trial = map;
    trial.lattice_offset = {};
    for (int a = 0; a < map.n; ++a)
      trial.lattice_offset[a] = offset;
    trial.params.eps = std::min(1.0 / 6.0, params.eps);

    if (const auto cube = single_cube(scaled_k)) {
      trial.mode = CollapseMode::Special;
      trial.special_cubes.push_back(SpecialField{*cube});
      verify_with_retries(trial, scaled_k);
      return trial;
    }
    auto fields = clearing_fields(scaled_k);
    if (!fields)
      continue;
    trial.mode = CollapseMode::Generic;
    for (const ClearingField& f : *fields)
      trial.params.eps = std::min(trial.params.eps, f.eps_c);
    trial.clearing = std::move(*fields);
    verify_with_retries(trial, scaled_k);
    return trial;
  }
  throw ConstructionError("every lattice offset leaves a cube without a free ball");
}

namespace serial {
std::vector<double> evaluate_collapse(const CollapseMap& map, std::span<const double> points) {
  const auto n = static_cast<std::size_t>(map.n);
  if (points.size() % n != 0)
    throw UsageError("point buffer length is not a multiple of n");
  std::vector<double> out(points.size());
  for (std::size_t k = 0; k < points.size() / n; ++k) {
    const Point z = map.evaluate(points.subspan(k * n, n));
    std::copy_n(z.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(k * n));
  }
  return out;
}
} // namespace serial

namespace parallel {
std::vector<double> evaluate_collapse(const CollapseMap& map, std::span<const double> points) {
  const auto n = static_cast<std::size_t>(map.n);
  if (points.size() % n != 0)
    throw UsageError("point buffer length is not a multiple of n");
  std::vector<double> out(points.size());
  const auto count = static_cast<std::int64_t>(points.size() / n);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t k = 0; k < count; ++k) {
    const auto base = static_cast<std::size_t>(k) * n;
    const Point z = map.evaluate(points.subspan(base, n));
    std::copy_n(z.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(base));
  }
  return out;
}
} // namespace parallel

double DisplacementReport::max_displacement() const {
  double m = 0.0;
  for (double d : per_coordinate_sup)
    m = std::max(m, d);
  return m;
}

bool DisplacementReport::certified() const {
  if (max_displacement() > bound * (1.0 + kDisplacementSlack))
    return false;
  return !skeleton_max_distance || *skeleton_max_distance <= kSkeletonTolerance;
}

DisplacementReport displacement_report(const CollapseMap& map, const VoxelSet& k, int samples_per_voxel,
                                       std::uint64_t seed) {
  if (samples_per_voxel < 8)
    throw UsageError("samples_per_voxel must be at least 8");
  if (k.dim() != map.n)
    throw UsageError("voxel set and map dimensions differ");
  const int n = map.n;
  DisplacementReport report;
  report.per_coordinate_sup.assign(static_cast<std::size_t>(n), 0.0);
  report.bound = k.empty() ? 0.0 : std::pow(k.measure(), 1.0 / n);
  const bool generic = map.mode != CollapseMode::Identity;
  if (generic)
    report.skeleton_max_distance = 0.0;

  const auto count = static_cast<std::int64_t>(k.count());
  const std::uint64_t per_voxel = (1u << n) + 1u + static_cast<std::uint64_t>(samples_per_voxel);
  report.samples = per_voxel * static_cast<std::uint64_t>(count);

#pragma omp parallel
  {
    std::array<double, 3> sup{0.0, 0.0, 0.0};
    double skeleton = 0.0;
    std::vector<Point> pts;
#pragma omp for schedule(dynamic, 16) nowait
    for (std::int64_t id = 0; id < count; ++id) {
      Point lo{}, hi{};
      k.voxel_box(static_cast<std::size_t>(id), lo, hi);
      pts.clear();
      for (int b = 0; b < (1 << n); ++b) {
        Point c{};
        for (int a = 0; a < n; ++a)
          c[a] = ((b >> a) & 1) ? hi[a] : lo[a];
        pts.push_back(c);
      }
      Point mid{};
      for (int a = 0; a < n; ++a)
        mid[a] = 0.5 * (lo[a] + hi[a]);
      pts.push_back(mid);
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(static_cast<std::uint64_t>(id) >> 32)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (int s = 0; s < samples_per_voxel; ++s) {
        Point q{};
        for (int a = 0; a < n; ++a)
          q[a] = lo[a] + unit(rng) * (hi[a] - lo[a]);
        pts.push_back(q);
      }
      for (const Point& x : pts) {
        const Point phi = map.evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(n)));
        for (int a = 0; a < n; ++a)
          sup[a] = std::max(sup[a], std::abs(x[a] - phi[a]));
        if (generic)
          skeleton = std::max(skeleton, skeleton_distance(map.to_scaled(std::span<const double>(phi.data(), static_cast<std::size_t>(n))), n));
      }
    }
#pragma omp critical(displacement_merge)
    {
      for (int a = 0; a < n; ++a)
        report.per_coordinate_sup[a] = std::max(report.per_coordinate_sup[a], sup[a]);
      if (generic)
        report.skeleton_max_distance = std::max(*report.skeleton_max_distance, skeleton);
    }
  }
  return report;
}

} // namespace commute

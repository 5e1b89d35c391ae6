#include "commute/evaluation_map.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "commute/errors.hpp"
#include "commute/parallel.hpp"

namespace commute {

double EvaluationSample::sample_cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < domain.n; ++a)
    v *= domain.period[a] / sample_resolution[a];
  return v;
}

std::size_t EvaluationSample::sample_stride(int axis) const {
  std::size_t s = 1;
  for (int a = domain.n - 1; a > axis; --a)
    s *= static_cast<std::size_t>(sample_resolution[a]);
  return s;
}

EvaluationSample evaluate_map(std::span<const GridField> fields, int supersample_factor) {
  require_shared_domain(fields);
  if (supersample_factor < 1)
    throw UsageError("supersample factor must be >= 1");
  const TorusDomain& d = fields.front().domain();
  const int n = d.n;
  const std::size_t nodes = d.node_count();

  EvaluationSample s;
  s.domain = d;
  s.supersample_factor = supersample_factor;
  for (int a = 0; a < n; ++a)
    s.sample_resolution.push_back(d.resolution[a] * supersample_factor);

  const GridField jac = bracket(fields);

  // Largest |dF_i/dx_j| over the grid, per (i, j).
  std::vector<double> grad_max(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double g = 0.0;
      const auto count = static_cast<std::ptrdiff_t>(nodes);
#pragma omp parallel for reduction(max : g) schedule(static)
      for (std::ptrdiff_t k = 0; k < count; ++k)
        g = std::max(g, std::abs(partial_derivative(fields[static_cast<std::size_t>(i)], j,
                                                    static_cast<std::size_t>(k))));
      grad_max[static_cast<std::size_t>(i * n + j)] = g;
    }
  }
  s.max_step.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double h = d.period[j] / s.sample_resolution[j];
      s.max_step[i] = std::max(s.max_step[i], h * grad_max[static_cast<std::size_t>(i * n + j)]);
    }
  }

  std::size_t total = 1;
  for (int r : s.sample_resolution)
    total *= static_cast<std::size_t>(r);
  s.points.resize(total * static_cast<std::size_t>(n));
  s.abs_jacobian.resize(total);

  const int corners = 1 << n;
  const auto count = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < count; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    std::array<std::size_t, 3> base{};
    std::array<double, 3> frac{};
    std::size_t rest = k;
    for (int a = n - 1; a >= 0; --a) {
      const auto r = static_cast<std::size_t>(s.sample_resolution[a]);
      const std::size_t idx = rest % r;
      rest /= r;
      base[a] = idx / static_cast<std::size_t>(supersample_factor);
      frac[a] = static_cast<double>(idx % static_cast<std::size_t>(supersample_factor)) / supersample_factor;
    }
    std::array<double, 3> acc{};
    double acc_jac = 0.0;
    for (int c = 0; c < corners; ++c) {
      double w = 1.0;
      std::size_t node = 0;
      for (int a = 0; a < n; ++a) {
        const bool upper = (c >> a) & 1;
        if (upper && frac[a] == 0.0) {
          w = 0.0;
          break;
        }
        w *= upper ? frac[a] : 1.0 - frac[a];
        const auto r = static_cast<std::size_t>(d.resolution[a]);
        node = node * r + (base[a] + (upper ? 1 : 0)) % r;
      }
      if (w == 0.0)
        continue;
      for (int i = 0; i < n; ++i)
        acc[i] += w * fields[static_cast<std::size_t>(i)][node];
      acc_jac += w * std::abs(jac[node]);
    }
    for (int i = 0; i < n; ++i)
      s.points[k * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = acc[i];
    s.abs_jacobian[k] = acc_jac;
  }
  return s;
}

// ---------------------------------------------------------------------------
// voxelize_image

namespace {

VoxelSet::Index cell_of(std::span<const double> p, std::span<const double> size) {
  VoxelSet::Index idx{0, 0, 0};
  for (std::size_t a = 0; a < p.size(); ++a)
    idx[a] = static_cast<std::int32_t>(std::floor(p[a] / size[a]));
  return idx;
}

void check_voxelize_args(const EvaluationSample& sample, double voxel_size, int dilation) {
  if (sample.size() == 0)
    throw UsageError("cannot voxelize an empty sample");
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size))
    throw UsageError("voxel size must be positive");
  if (dilation < 0)
    throw UsageError("dilation must be non-negative");
}

} // namespace

VoxelSet serial::voxelize_image(const EvaluationSample& sample, double voxel_size, int dilation) {
  check_voxelize_args(sample, voxel_size, dilation);
  const int n = sample.dim();
  const std::vector<double> size(static_cast<std::size_t>(n), voxel_size);
  std::vector<VoxelSet::Index> hit;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const auto idx = cell_of(sample.point(k), size);
    if (hit.empty() || hit.back() != idx)
      hit.push_back(idx);
  }
  VoxelSet occupied(n, voxel_size, std::vector<double>(static_cast<std::size_t>(n), 0.0), std::move(hit));
  return occupied.dilated(dilation);
}

VoxelSet parallel::voxelize_image(const EvaluationSample& sample, double voxel_size, int dilation) {
  check_voxelize_args(sample, voxel_size, dilation);
  const int n = sample.dim();
  const std::vector<double> size(static_cast<std::size_t>(n), voxel_size);
  // Fixed partition into chunks, each reduced to its sorted unique cells,
  // then merged in chunk order; the result does not depend on thread count.
  constexpr std::size_t kChunk = 1 << 16;
  const std::size_t chunks = (sample.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<VoxelSet::Index>> partial(chunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    auto& local = partial[static_cast<std::size_t>(c)];
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(sample.size(), lo + kChunk);
    for (std::size_t k = lo; k < hi; ++k) {
      const auto idx = cell_of(sample.point(k), size);
      if (local.empty() || local.back() != idx)
        local.push_back(idx);
    }
    std::sort(local.begin(), local.end());
    local.erase(std::unique(local.begin(), local.end()), local.end());
  }
  std::vector<VoxelSet::Index> all;
  for (auto& p : partial)
    all.insert(all.end(), p.begin(), p.end());
  VoxelSet occupied(n, voxel_size, std::vector<double>(static_cast<std::size_t>(n), 0.0), std::move(all));
  return occupied.dilated(dilation);
}

// ---------------------------------------------------------------------------
// multiplicity

double MultiplicityGrid::cell_volume() const {
  double v = 1.0;
  for (double s : cell_size)
    v *= s;
  return v;
}

double MultiplicityGrid::integral() const {
  double total = 0.0;
  for (const auto& c : cells)
    total += c.count;
  return total * cell_volume();
}

std::size_t MultiplicityGrid::flagged(CellFlag flag) const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [flag](const MultiplicityCell& c) { return c.flag == flag; }));
}

const MultiplicityCell* MultiplicityGrid::find(const VoxelSet::Index& idx) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), idx,
                             [](const MultiplicityCell& c, const VoxelSet::Index& key) { return c.index < key; });
  return it != cells.end() && it->index == idx ? &*it : nullptr;
}

namespace {

// Components with less Jacobian mass than this (in units of one cell) are
// treated as measure-zero fibres.
constexpr double kMassFloor = 1e-6;

class DisjointSets {
public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b)
      return;
    if (a < b)
      parent_[b] = a;
    else
      parent_[a] = b;
  }

private:
  std::vector<std::uint32_t> parent_;
};

// Offsets o in {-1,0,1}^n whose first non-zero entry is +1.
std::vector<std::array<int, 3>> forward_neighbours(int n) {
  std::vector<std::array<int, 3>> out;
  int total = 1;
  for (int a = 0; a < n; ++a)
    total *= 3;
  for (int code = 0; code < total; ++code) {
    std::array<int, 3> o{0, 0, 0};
    int rest = code;
    for (int a = 0; a < n; ++a) {
      o[a] = rest % 3 - 1;
      rest /= 3;
    }
    for (int a = 0; a < n; ++a) {
      if (o[a] != 0) {
        if (o[a] == 1)
          out.push_back(o);
        break;
      }
    }
  }
  return out;
}

} // namespace

MultiplicityGrid multiplicity(const EvaluationSample& sample, double voxel_size) {
  const std::vector<double> size(static_cast<std::size_t>(sample.dim()), voxel_size);
  return multiplicity(sample, std::span<const double>(size));
}

MultiplicityGrid multiplicity(const EvaluationSample& sample, std::span<const double> cell_size) {
  const int n = sample.dim();
  if (cell_size.size() != static_cast<std::size_t>(n))
    throw UsageError("multiplicity needs one cell size per axis");
  for (double s : cell_size) {
    if (!(s > 0.0) || !std::isfinite(s))
      throw UsageError("cell size must be positive");
  }
  if (sample.size() == 0)
    throw UsageError("cannot estimate multiplicity of an empty sample");
  if (sample.size() >= std::numeric_limits<std::uint32_t>::max())
    throw UsageError("sample too large for multiplicity estimation");
  for (std::size_t i = 0; i < sample.max_step.size(); ++i) {
    if (cell_size[i] < 2.0 * sample.max_step[i])
      throw UsageError("undersampled: cell size " + std::to_string(cell_size[i]) + " on axis " +
                       std::to_string(i) + " is below 2 x sample step " + std::to_string(sample.max_step[i]) +
                       "; raise the supersample factor or the voxel size");
  }

  const std::size_t count = sample.size();
  std::vector<VoxelSet::Index> key(count);
  const auto scount = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < scount; ++k)
    key[static_cast<std::size_t>(k)] = cell_of(sample.point(static_cast<std::size_t>(k)), cell_size);

  DisjointSets sets(count);
  const auto offsets = forward_neighbours(n);
  std::array<std::size_t, 3> coord{};
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t rest = k;
    for (int a = n - 1; a >= 0; --a) {
      coord[a] = rest % static_cast<std::size_t>(sample.sample_resolution[a]);
      rest /= static_cast<std::size_t>(sample.sample_resolution[a]);
    }
    for (const auto& o : offsets) {
      std::size_t nb = 0;
      for (int a = 0; a < n; ++a) {
        const auto r = static_cast<std::size_t>(sample.sample_resolution[a]);
        nb = nb * r + (coord[a] + r + static_cast<std::size_t>(o[a] + 1) - 1) % r;
      }
      if (key[nb] == key[k])
        sets.unite(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(nb));
    }
  }

  std::vector<std::uint32_t> root(count);
  for (std::size_t k = 0; k < count; ++k)
    root[k] = sets.find(static_cast<std::uint32_t>(k));

  std::vector<std::uint32_t> order(count);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (key[a] != key[b])
      return key[a] < key[b];
    if (root[a] != root[b])
      return root[a] < root[b];
    return a < b;
  });

  MultiplicityGrid grid;
  grid.n = n;
  grid.cell_size.assign(cell_size.begin(), cell_size.end());
  const double weight = sample.sample_cell_volume() / grid.cell_volume();
  const bool have_jacobian = sample.abs_jacobian.size() == count;

  std::size_t i = 0;
  while (i < count) {
    MultiplicityCell cell;
    cell.index = key[order[i]];
    while (i < count && key[order[i]] == cell.index) {
      const std::uint32_t comp = root[order[i]];
      double mass = 0.0;
      while (i < count && key[order[i]] == cell.index && root[order[i]] == comp) {
        mass += have_jacobian ? sample.abs_jacobian[order[i]] * weight : 1.0;
        ++cell.points;
        ++i;
      }
      if (!have_jacobian || mass > kMassFloor)
        ++cell.count;
      cell.estimate += mass;
    }
    if (!have_jacobian) {
      cell.estimate = cell.count;
    } else if (cell.count == 0) {
      cell.flag = CellFlag::DegenerateFiber;
    } else if (std::abs(cell.estimate - cell.count) > 0.25) {
      cell.flag = CellFlag::NonIntegral;
    }
    grid.cells.push_back(cell);
  }
  return grid;
}

AreaFormulaResult area_formula_check(std::span<const GridField> fields, const EvaluationSample& sample,
                                     double voxel_size) {
  const std::vector<double> size(static_cast<std::size_t>(sample.dim()), voxel_size);
  return area_formula_check(fields, sample, std::span<const double>(size));
}

AreaFormulaResult area_formula_check(std::span<const GridField> fields, const EvaluationSample& sample,
                                     std::span<const double> cell_size) {
  AreaFormulaResult r;
  const MultiplicityGrid grid = multiplicity(sample, cell_size);
  r.multiplicity_integral = grid.integral();
  r.bracket_l1 = l1_norm(bracket(fields));
  r.residual = std::abs(r.multiplicity_integral - r.bracket_l1) / std::max(1.0, r.bracket_l1);
  const std::size_t flagged = grid.flagged(CellFlag::NonIntegral) + grid.flagged(CellFlag::DegenerateFiber);
  r.flagged_fraction = grid.cells.empty() ? 0.0 : static_cast<double>(flagged) / grid.cells.size();
  return r;
}

DegreeCheck degree_bound_check(const VoxelSet& voxels, const BracketReport& report, double slack) {
  DegreeCheck c;
  c.measure = voxels.measure();
  c.epsilon = report.epsilon;
  c.slack = slack;
  if (report.epsilon == 0.0) {
    c.ok = voxels.empty();
    if (!c.ok)
      c.note = "dilation floor: a non-empty voxelized image cannot have measure zero";
    return c;
  }
  c.ok = c.measure <= report.epsilon * slack;
  return c;
}

} // namespace commute

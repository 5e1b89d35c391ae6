#include "commute/clearing_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "commute/errors.hpp"
#include "commute/smoothing.hpp"

namespace commute {

namespace {

// max_u |d/du sigmoid_rho(u, kFlowSharpness)|, sampled once, with margin.
double max_profile_slope() {
  static const double slope = [] {
    double best = 0.0;
    constexpr int kSamples = 20000;
    constexpr double h = 1e-6;
    for (int i = 1; i < kSamples; ++i) {
      const double u = static_cast<double>(i) / kSamples;
      const double d = (sigmoid_rho(u + h, kFlowSharpness) - sigmoid_rho(u - h, kFlowSharpness)) / (2 * h);
      best = std::max(best, std::abs(d));
    }
    return best * 1.05;
  }();
  return slope;
}

double norm(const Point& v, int n) {
  double s = 0.0;
  for (int a = 0; a < n; ++a)
    s += v[a] * v[a];
  return std::sqrt(s);
}

double boundary_distance(const Point& x, const IntegerCube& cube) {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < cube.n; ++a) {
    const double lo = static_cast<double>(cube.nu[a]);
    d = std::min({d, x[a] - lo, lo + 1.0 - x[a]});
  }
  return d;
}

int steps_for(double lipschitz, int min_steps) {
  const double wanted = std::ceil(4.0 * lipschitz);
  return std::max(min_steps, static_cast<int>(std::min(wanted, 1e7)));
}

} // namespace

// ---------------------------------------------------------------------------
// ClearingField

Point ClearingField::shift() const {
  const Point m = cube.center();
  Point w{};
  for (int a = 0; a < cube.n; ++a)
    w[a] = m[a] - p[a];
  return w;
}

double ClearingField::segment_distance(const Point& x) const {
  const int n = cube.n;
  const Point w = shift();
  double ww = 0.0;
  double xw = 0.0;
  for (int a = 0; a < n; ++a) {
    ww += w[a] * w[a];
    xw += (x[a] - p[a]) * w[a];
  }
  const double t = ww > 0.0 ? std::clamp(xw / ww, 0.0, 1.0) : 0.0;
  double d2 = 0.0;
  for (int a = 0; a < n; ++a) {
    const double diff = x[a] - (p[a] + t * w[a]);
    d2 += diff * diff;
  }
  return std::sqrt(d2);
}

double ClearingField::profile(const Point& x) const {
  const double d = segment_distance(x);
  if (d <= inner)
    return 1.0;
  if (d >= outer)
    return 0.0;
  return 1.0 - smooth_step(d, inner, outer, kFlowSharpness);
}

Point ClearingField::velocity(const Point& x) const {
  const double beta = profile(x);
  Point v = shift();
  for (int a = 0; a < cube.n; ++a)
    v[a] *= beta;
  return v;
}

double ClearingField::lipschitz() const { return norm(shift(), cube.n) * max_profile_slope() / (outer - inner); }

int ClearingField::steps(int min_steps) const { return steps_for(lipschitz(), min_steps); }

void ClearingField::validate() const {
  if (!(inner > 0.0 && outer > inner))
    throw ConstructionError("clearing field needs 0 < inner < outer");
  const Point m = cube.center();
  if (boundary_distance(p, cube) < outer || boundary_distance(m, cube) < outer)
    throw ConstructionError("clearing capsule leaves its cube");
}

// ---------------------------------------------------------------------------
// SpecialField

double SpecialField::sigma(double r) const {
  const double root_n = std::sqrt(static_cast<double>(cube.n));
  return smooth_step(r, 0.1, 1.0 / 9.0, kFlowSharpness) *
         (1.0 - smooth_step(r, root_n + 1.0, root_n + 2.0, kFlowSharpness));
}

Point SpecialField::velocity(const Point& x) const {
  const int n = cube.n;
  Point d{};
  for (int a = 0; a < n; ++a)
    d[a] = static_cast<double>(cube.nu[a]) - x[a];
  const double r = norm(d, n);
  Point v{};
  if (r == 0.0)
    return v;
  const double speed = 2.0 * std::sqrt(static_cast<double>(n)) * sigma(r);
  for (int a = 0; a < n; ++a)
    v[a] = speed * d[a] / r;
  return v;
}

double SpecialField::lipschitz() const {
  const double speed = 2.0 * std::sqrt(static_cast<double>(cube.n));
  // radial slope of sigma on [1/10, 1/9] plus the angular term speed / r, r >= 1/10
  return speed * max_profile_slope() / (1.0 / 9.0 - 0.1) + speed / 0.1;
}

int SpecialField::steps(int min_steps) const { return steps_for(lipschitz(), min_steps); }

// ---------------------------------------------------------------------------
// Flows

Point clearing_flow_phi(std::span<const double> x, std::span<const ClearingField> fields,
                        std::span<const SpecialField> special, int min_steps) {
  const int n = static_cast<int>(x.size());
  Point y = to_point(x);
  for (const SpecialField& s : special) {
    Point d{};
    for (int a = 0; a < n; ++a)
      d[a] = y[a] - static_cast<double>(s.cube.nu[a]);
    if (s.sigma(norm(d, n)) > 0.0)
      y = rk4_time_one(s, y, n, s.steps(min_steps));
  }
  if (fields.empty())
    return y;
  const IntegerCube cube = containing_cube(std::span<const double>(y.data(), static_cast<std::size_t>(n)));
  auto it = std::lower_bound(fields.begin(), fields.end(), cube,
                             [](const ClearingField& f, const IntegerCube& c) { return f.cube < c; });
  if (it == fields.end() || !(it->cube == cube))
    return y;
  const ClearingField& f = *it;
  if (f.profile(y) == 0.0)
    return y;
  Point out = rk4_time_one(f, y, n, f.steps(min_steps));
  for (int a = 0; a < n; ++a) {
    const double lo = static_cast<double>(cube.nu[a]);
    out[a] = std::clamp(out[a], lo, lo + 1.0);
  }
  return out;
}

void distance_transform(std::vector<double>& cost, std::span<const int> shape) {
  const int n = static_cast<int>(shape.size());
  std::vector<std::size_t> stride(static_cast<std::size_t>(n), 1);
  for (int a = n - 2; a >= 0; --a)
    stride[a] = stride[a + 1] * static_cast<std::size_t>(shape[a + 1]);

  int longest = 0;
  for (int s : shape)
    longest = std::max(longest, s);
  std::vector<double> f(static_cast<std::size_t>(longest));
  std::vector<double> out(f.size());
  std::vector<int> v(f.size());
  std::vector<double> z(f.size() + 1);

  for (int axis = 0; axis < n; ++axis) {
    const int len = shape[axis];
    const std::size_t step = stride[axis];
    const std::size_t lines = cost.size() / static_cast<std::size_t>(len);
    for (std::size_t line = 0; line < lines; ++line) {
      // Base index of this line: drop the axis coordinate from `line`.
      const std::size_t outer_part = line / step;
      const std::size_t inner_part = line % step;
      const std::size_t base = outer_part * step * static_cast<std::size_t>(len) + inner_part;
      for (int q = 0; q < len; ++q)
        f[q] = cost[base + static_cast<std::size_t>(q) * step];

      int k = 0;
      v[0] = 0;
      z[0] = -std::numeric_limits<double>::infinity();
      z[1] = std::numeric_limits<double>::infinity();
      for (int q = 1; q < len; ++q) {
        double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
          --k;
          s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
      }
      k = 0;
      for (int q = 0; q < len; ++q) {
        while (z[k + 1] < q)
          ++k;
        const double dq = q - v[k];
        out[q] = dq * dq + f[v[k]];
      }
      for (int q = 0; q < len; ++q)
        cost[base + static_cast<std::size_t>(q) * step] = out[q];
    }
  }
}

// ---------------------------------------------------------------------------
// Free-ball search

namespace {

bool box_meets_cube(const VoxelSet& k, std::size_t id, const IntegerCube& cube) {
  Point lo{}, hi{};
  k.voxel_box(id, lo, hi);
  for (int a = 0; a < cube.n; ++a) {
    const double c = static_cast<double>(cube.nu[a]);
    if (hi[a] < c || lo[a] > c + 1.0)
      return false;
  }
  return true;
}

double exact_clearance(const VoxelSet& k, std::span<const std::size_t> ids, const IntegerCube& cube,
                       const Point& q) {
  double d = boundary_distance(q, cube);
  const std::span<const double> qs(q.data(), static_cast<std::size_t>(cube.n));
  for (std::size_t id : ids)
    d = std::min(d, k.distance_to_voxel(id, qs));
  return std::max(d, 0.0);
}

} // namespace

FreeBall find_free_ball(const VoxelSet& k, const IntegerCube& cube) {
  std::vector<std::size_t> ids;
  for (std::size_t id = 0; id < k.count(); ++id) {
    if (box_meets_cube(k, id, cube))
      ids.push_back(id);
  }
  return find_free_ball(k, cube, ids);
}

FreeBall find_free_ball(const VoxelSet& k, const IntegerCube& cube, std::span<const std::size_t> voxel_ids) {
  const int n = cube.n;
  const int cap = n == 2 ? 256 : 48;
  const int g = std::clamp(static_cast<int>(std::ceil(4.0 / k.voxel_size())), 16, cap);

  std::vector<int> shape(static_cast<std::size_t>(n), g);
  std::size_t cells = 1;
  for (int a = 0; a < n; ++a)
    cells *= static_cast<std::size_t>(g);
  constexpr double kFar = 1e20;
  std::vector<double> cost(cells, kFar);

  bool any_source = false;
  Point lo{}, hi{};
  for (std::size_t id : voxel_ids) {
    k.voxel_box(id, lo, hi);
    std::array<int, 3> first{0, 0, 0};
    std::array<int, 3> last{0, 0, 0};
    bool inside = true;
    for (int a = 0; a < n; ++a) {
      const double c = static_cast<double>(cube.nu[a]);
      first[a] = std::max(0, static_cast<int>(std::floor((lo[a] - c) * g - 1e-9)));
      last[a] = std::min(g - 1, static_cast<int>(std::ceil((hi[a] - c) * g + 1e-9)) - 1);
      if (first[a] > last[a])
        inside = false;
    }
    if (!inside)
      continue;
    any_source = true;
    for (int i = first[0]; i <= last[0]; ++i) {
      for (int j = first[1]; j <= (n > 1 ? last[1] : 0); ++j) {
        for (int l = first[2]; l <= (n > 2 ? last[2] : 0); ++l) {
          std::size_t flat = static_cast<std::size_t>(i);
          if (n > 1)
            flat = flat * static_cast<std::size_t>(g) + static_cast<std::size_t>(j);
          if (n > 2)
            flat = flat * static_cast<std::size_t>(g) + static_cast<std::size_t>(l);
          cost[flat] = 0.0;
        }
      }
    }
  }

  const Point m = cube.center();
  FreeBall ball;
  ball.p = m;
  ball.clearance = exact_clearance(k, voxel_ids, cube, m);

  if (any_source) {
    distance_transform(cost, shape);
    const double half_diag = std::sqrt(static_cast<double>(n)) / (2.0 * g);
    double best_est = -1.0;
    double best_center_dist = 0.0;
    Point best{};
    Point q{};
    for (std::size_t flat = 0; flat < cells; ++flat) {
      if (cost[flat] == 0.0)
        continue;
      std::size_t rest = flat;
      for (int a = n - 1; a >= 0; --a) {
        q[a] = static_cast<double>(cube.nu[a]) + (static_cast<double>(rest % static_cast<std::size_t>(g)) + 0.5) / g;
        rest /= static_cast<std::size_t>(g);
      }
      const double to_k = cost[flat] >= kFar ? 1.0 : std::sqrt(cost[flat]) / g - half_diag;
      const double est = std::min(to_k, boundary_distance(q, cube));
      double center_dist = 0.0;
      for (int a = 0; a < n; ++a)
        center_dist += (q[a] - m[a]) * (q[a] - m[a]);
      if (est > best_est || (est == best_est && center_dist < best_center_dist)) {
        best_est = est;
        best_center_dist = center_dist;
        best = q;
      }
    }
    if (best_est >= 0.0) {
      const double clearance = exact_clearance(k, voxel_ids, cube, best);
      if (clearance > ball.clearance + 1e-12) {
        ball.p = best;
        ball.clearance = clearance;
      }
    }
  }

  // Round down so that 3 * eps_c never exceeds the clearance.
  ball.eps_c = ball.clearance / 3.0;
  while (ball.eps_c > 0.0 && 3.0 * ball.eps_c > ball.clearance)
    ball.eps_c = std::nextafter(ball.eps_c, 0.0);
  ball.full_cube = ball.clearance < kMinFreeDistance;
  return ball;
}

} // namespace commute

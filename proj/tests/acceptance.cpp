// Acceptance run: one PASS/FAIL line per criterion, measured values alongside.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "commute/bracket.hpp"
#include "commute/clearing_flow.hpp"
#include "commute/collapse_map.hpp"
#include "commute/cube_collapse.hpp"
#include "commute/evaluation_map.hpp"
#include "commute/pipeline.hpp"
#include "commute/report_json.hpp"
#include "commute/smoothing.hpp"

using namespace commute;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += " [fail: " + what + "]";
    }
  }
  void note(const char* fmt, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, fmt, v);
    detail += buf;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<GridField> pair_on(int res, const std::string& f, const std::string& g) {
  const TorusDomain d = TorusDomain::uniform(2, res);
  return {sample_field(d, f), sample_field(d, g)};
}

std::span<const double> view(const Point& p, int n) { return {p.data(), static_cast<std::size_t>(n)}; }

double dist(const Point& a, const Point& b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Seeded random voxel sets: n alternates, measure log-uniform in [0.001, 0.5].
struct RandomSet {
  VoxelSet k;
  double target = 0.0;
};

RandomSet random_set(int seed) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 7919u + 11u);
  const int n = 2 + seed % 2;
  const int side = n == 2 ? 64 : 32;
  std::uniform_real_distribution<double> logm(std::log(0.001), std::log(0.5));
  const double target = std::exp(logm(rng));
  const double vol = std::pow(1.0 / side, n);
  const auto wanted = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(target / vol)));
  std::uniform_int_distribution<int> coord(0, side - 1);
  std::set<VoxelSet::Index> picked;
  while (picked.size() < wanted)
    picked.insert({coord(rng), coord(rng), n == 3 ? coord(rng) : 0});
  return {VoxelSet(n, 1.0 / side, std::vector<double>(static_cast<std::size_t>(n), 0.0),
                   std::vector<VoxelSet::Index>(picked.begin(), picked.end())),
          target};
}

constexpr int kRandomSets = 50;

Verdict criterion1() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto f = pair_on(512, "sin(2πx)", "sin(2πy)");
  const BracketReport r = bracket_report(bracket(f));
  const double t = seconds_since(t0);
  v.note("l1=%.6f", r.l1_norm);
  v.note(" c0=%.6f", r.c0_norm);
  v.note(" time=%.2fs", t);
  v.require(r.l1_norm >= 15.84 && r.l1_norm <= 16.16, "l1 in [15.84,16.16]");
  v.require(r.c0_norm >= 39.0 && r.c0_norm <= 39.6, "c0 in [39.0,39.6]");
  v.require(t < 5.0, "runtime < 5 s");
  return v;
}

Verdict criterion2() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto f = pair_on(512, "sin(2πx)", "sin(2πy)");
  const AreaFormulaResult r = area_formula_check(f, evaluate_map(f, 4), 1.0 / 128);
  const double t = seconds_since(t0);
  const double rel = std::abs(r.multiplicity_integral - r.bracket_l1) / r.bracket_l1;
  v.note("integral=%.6f", r.multiplicity_integral);
  v.note(" l1=%.6f", r.bracket_l1);
  v.note(" rel=%.2e", rel);
  v.note(" time=%.2fs", t);
  v.require(rel <= 0.02, "relative residual <= 0.02");
  v.require(t < 30.0, "runtime < 30 s");
  return v;
}

Verdict criterion3() {
  Verdict v;
  for (const char* f1 : {"sin(2πx)", "0.001*sin(2πx)"}) {
    const auto f = pair_on(512, f1, "sin(2πy)");
    const double l1 = l1_norm(bracket(f));
    const VoxelSet k = voxelize_image(evaluate_map(f, 4), 1.0 / 512, 0);
    v.note(" 2|K|=%.6f", 2 * k.measure());
    v.note(" l1=%.6f", l1);
    v.require(2 * k.measure() <= 1.05 * l1, std::string("2|K| <= 1.05 l1 for ") + f1);
  }
  return v;
}

Verdict criterion4() {
  Verdict v;
  const auto t0 = Clock::now();
  v.require(smoothstep_a(0.0) == 0.0 && smoothstep_a(1.0) == 1.0, "a(0)=0, a(1)=1");
  double flat = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double t = 0.4 + 0.2 * i / 2000.0;
    flat = std::max(flat, std::abs(smoothstep_a(t, 30.0) - t));
  }
  v.note("max|a-t|=%.1e", flat);
  v.require(flat <= 1e-12, "|a(t)-t| <= 1e-12 on [0.4,0.6]");
  const double h = 1e-6;
  double slope = 0.0;
  for (double t : {1e-3, 1 - 1e-3})
    slope = std::max(slope, std::abs((smoothstep_a(t + h) - smoothstep_a(t - h)) / (2 * h)));
  v.note(" a'=%.1e", slope);
  v.require(slope <= 1e-8, "end derivative <= 1e-8");

  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double landing = 0.0;
  bool invariant = true;
  bool identity = true;
  long landed = 0;
  for (int n : {2, 3}) {
    for (double eps : {1.0 / 6, 0.05}) {
      long count = 0;
      while (count < 10000) {
        Point x{};
        for (int a = 0; a < n; ++a)
          x[a] = u(rng);
        const IntegerCube c = containing_cube(view(x, n));
        const Point y = cube_collapse_psi(view(x, n), eps);
        for (int a = 0; a < n; ++a) {
          const double lo = static_cast<double>(c.nu[a]);
          invariant = invariant && y[a] >= lo && y[a] <= lo + 1.0;
        }
        const double r = dist(x, c.center(), n);
        if (r <= eps)
          for (int a = 0; a < n; ++a)
            identity = identity && y[a] == x[a];
        if (r >= 2 * eps) {
          double gap = 1.0;
          for (int a = 0; a < n; ++a) {
            const double lo = static_cast<double>(c.nu[a]);
            gap = std::min({gap, std::abs(y[a] - lo), std::abs(lo + 1.0 - y[a])});
          }
          landing = std::max(landing, gap);
          ++count;
          ++landed;
        }
      }
    }
  }
  v.note(" landing=%.1e", landing);
  v.note(" landed=%.0f", static_cast<double>(landed));
  v.require(invariant, "psi keeps each closed cube");
  v.require(identity, "psi is the identity on the eps ball");
  v.require(landing <= 1e-12, "boundary landing <= 1e-12");

  std::uniform_real_distribution<double> w(0.0, 1.0);
  double face = 0.0;
  for (int n : {2, 3}) {
    for (int i = 0; i < 5000; ++i) {
      Point x{};
      for (int a = 0; a < n; ++a)
        x[a] = w(rng);
      x[i % n] = 1.0;
      Point lo = x, hi = x;
      lo[i % n] -= 1e-9;
      hi[i % n] += 1e-9;
      face = std::max(face, dist(cube_collapse_psi(view(lo, n), 1.0 / 6), cube_collapse_psi(view(hi, n), 1.0 / 6), n));
    }
  }
  v.note(" face=%.1e", face);
  v.require(face <= 1e-6, "face consistency <= 1e-6");
  const double t = seconds_since(t0);
  v.note(" time=%.2fs", t);
  v.require(t < 10.0, "runtime < 10 s");
  return v;
}

// Dense K samples: every voxel corner, its centre and `extra` random points.
void for_each_sample(const VoxelSet& k, int extra, std::uint64_t seed, const std::function<void(const Point&)>& f) {
  const int n = k.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t id = 0; id < k.count(); ++id) {
    Point lo{}, hi{};
    k.voxel_box(id, {lo.data(), static_cast<std::size_t>(n)}, {hi.data(), static_cast<std::size_t>(n)});
    for (int mask = 0; mask < (1 << n); ++mask) {
      Point x{};
      for (int a = 0; a < n; ++a)
        x[a] = (mask >> a) & 1 ? hi[a] : lo[a];
      f(x);
    }
    Point c{};
    for (int a = 0; a < n; ++a)
      c[a] = 0.5 * (lo[a] + hi[a]);
    f(c);
    for (int s = 0; s < extra; ++s) {
      Point x{};
      for (int a = 0; a < n; ++a)
        x[a] = lo[a] + u(rng) * (hi[a] - lo[a]);
      f(x);
    }
  }
}

Verdict criterion5() {
  Verdict v;
  const auto t0 = Clock::now();
  int worst_retries = 0;
  int fields_checked = 0;
  double translate = 0.0;
  double margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int s = 0; s < kRandomSets; ++s) {
    const RandomSet rs = random_set(s);
    const int n = rs.k.dim();
    CollapseMap map;
    try {
      map = build_collapse_map(rs.k);
    } catch (const std::exception& e) {
      v.require(false, std::string("construction: ") + e.what());
      continue;
    }
    worst_retries = std::max(worst_retries, map.retries_used);
    const double eps = map.params.eps;

    if (!map.clearing.empty()) {
      const ClearingField& f = map.clearing[static_cast<std::size_t>(s) % map.clearing.size()];
      const Point m = f.cube.center();
      int done = 0;
      while (done < 100) {
        Point d{};
        double r = 0.0;
        for (int a = 0; a < n; ++a) {
          d[a] = u(rng);
          r += d[a] * d[a];
        }
        if (r > 1.0)
          continue;
        Point x{};
        for (int a = 0; a < n; ++a)
          x[a] = f.p[a] + 1.98 * eps * d[a];
        const Point y = clearing_flow_phi(view(x, n), map.clearing, map.special_cubes, map.params.flow_steps);
        for (int a = 0; a < n; ++a)
          translate = std::max(translate, std::abs(y[a] - (m[a] + 1.98 * eps * d[a])));
        ++done;
      }
      ++fields_checked;
    }

    if (map.mode == CollapseMode::Identity)
      continue;
    for_each_sample(rs.k, 4, static_cast<std::uint64_t>(s), [&](const Point& x) {
      const Point z = map.to_scaled(view(x, n));
      const Point y = clearing_flow_phi(view(z, n), map.clearing, map.special_cubes, map.params.flow_steps);
      const double r = dist(y, containing_cube(view(y, n)).center(), n);
      margin = std::min(margin, r / (2 * eps));
    });
  }
  const double t = seconds_since(t0);
  v.note("translate=%.1e", translate);
  v.note(" fields=%.0f", fields_checked);
  v.note(" min r/2eps=%.6f", margin);
  v.note(" max retries=%.0f", worst_retries);
  v.note(" time=%.2fs", t);
  v.require(fields_checked > 0 && translate <= 1e-9, "ball transport within 1e-9");
  v.require(margin >= 1 - 1e-6, "cleared points outside B(m, 2 eps (1-1e-6))");
  v.require(worst_retries <= 8, "retries <= 8");
  v.require(t < 60.0, "runtime < 60 s");
  return v;
}

// Runs the certificate over every random set and returns the JSON text.
std::string certificate_run(Verdict& v) {
  Json all = Json::array();
  double worst_ratio = 0.0;
  double worst_skeleton = 0.0;
  for (int s = 0; s < kRandomSets; ++s) {
    const RandomSet rs = random_set(s);
    const int n = rs.k.dim();
    try {
      const CollapseMap map = build_collapse_map(rs.k);
      const DisplacementReport d = displacement_report(map, rs.k, 16, static_cast<std::uint64_t>(s));
      const double bound = std::pow(rs.k.measure(), 1.0 / n);
      worst_ratio = std::max(worst_ratio, d.max_displacement() / bound);
      worst_skeleton = std::max(worst_skeleton, d.skeleton_max_distance.value_or(0.0));
      v.require(d.max_displacement() <= bound * (1 + 1e-6), "displacement bound, set " + std::to_string(s));
      v.require(d.skeleton_max_distance.value_or(0.0) <= 1e-9, "skeleton, set " + std::to_string(s));
      all.push_back({{"set", s}, {"n", n}, {"measure", rs.k.measure()}, {"map", to_json(map)}, {"report", to_json(d)}});
    } catch (const std::exception& e) {
      v.require(false, std::string("construction: ") + e.what());
    }
  }
  v.note(" max disp/bound=%.4f", worst_ratio);
  v.note(" max skeleton=%.1e", worst_skeleton);
  return all.dump(2);
}

std::string criterion6_json;

Verdict criterion6() {
  Verdict v;
  const auto t0 = Clock::now();
  criterion6_json = certificate_run(v);
  const double t = seconds_since(t0);
  v.note(" time=%.2fs", t);
  v.require(t < 120.0, "runtime < 2 min");
  return v;
}

Verdict criterion7() {
  Verdict v;
  const auto t0 = Clock::now();
  std::vector<double> ratios;
  for (int res : {128, 256, 512}) {
    const auto f = pair_on(res, "0.001*sin(2πx)", "sin(2πy)");
    ApproximationSettings s;
    s.voxel_size = 1.0 / res;
    s.dilation = 1;
    const ApproximationReport r = commuting_approximation(f, s).report;
    const double ratio = r.bracket_after_l1 / r.bracket_before.l1_norm;
    ratios.push_back(ratio);
    v.note(" res=%.0f", res);
    v.note(" |K|=%.5f", r.measure_k);
    v.note(" disp=%.5f", r.max_displacement());
    v.note(" ratio=%.2e", ratio);
    v.require(r.max_displacement() <= std::sqrt(r.measure_k), "disp <= sqrt|K|");
    v.require(r.max_displacement() <= std::sqrt(0.008) * 1.8, "disp <= 1.8 sqrt(0.008)");
    if (res == 512)
      v.require(ratio <= 0.05, "ratio <= 0.05 at 512");
  }
  // An exactly commuting output at every resolution counts as decreasing.
  for (std::size_t i = 1; i < ratios.size(); ++i)
    v.require(ratios[i] < ratios[i - 1] || (ratios[i] == 0.0 && ratios[i - 1] == 0.0), "ratio decreasing");
  const double t = seconds_since(t0);
  v.note(" time=%.2fs", t);
  v.require(t < 120.0, "runtime < 2 min");
  return v;
}

Verdict criterion8() {
  Verdict v;
  const TorusDomain d = TorusDomain::uniform(2, 128);
  std::vector<std::array<GridField, 2>> pairs;
  for (int k = 1; k <= 5; ++k)
    pairs.push_back({sample_field(d, "sin(2πx)/" + std::to_string(k)), sample_field(d, "sin(2πy)")});
  ApproximationSettings s;
  s.voxel_size = 1.0 / 128;
  const auto out = commuting_sequence(pairs, s);
  std::vector<double> scaled;
  for (const SequenceEntry& e : out) {
    v.require(e.ok && e.report, "entry " + std::to_string(e.index) + " ok");
    if (!e.ok || !e.report)
      continue;
    const double k = static_cast<double>(e.index + 1);
    scaled.push_back(e.report->bound * std::sqrt(k));
    v.note(" sqrt(eps)=%.4f", e.report->bound);
    v.require(e.report->certified(), "entry certified");
  }
  if (!scaled.empty()) {
    const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
    double mean = 0.0;
    for (double x : scaled)
      mean += x / static_cast<double>(scaled.size());
    const double spread = std::max(*hi / mean - 1.0, 1.0 - *lo / mean);
    v.note(" spread=%.2e", spread);
    v.require(spread <= 0.25, "sqrt(eps_k) sqrt(k) constant within 25%");
  }
  return v;
}

Verdict criterion9() {
  Verdict v;
  Verdict again;
  const std::string second = certificate_run(again);
  v.note("bytes=%.0f", static_cast<double>(second.size()));
  v.require(!criterion6_json.empty() && second == criterion6_json, "byte-identical JSON");
  return v;
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, Verdict (*)()>> criteria{
      {"bracket quadrature", criterion1},  {"area formula", criterion2},
      {"degree-zero inequality", criterion3}, {"smoothstep and cube collapse", criterion4},
      {"clearing flow", criterion5},       {"collapse certificate", criterion6},
      {"end to end approximation", criterion7}, {"commuting sequence", criterion8},
      {"determinism", criterion9},
  };
  int failed = 0;
  int id = 0;
  for (const auto& [name, run] : criteria) {
    ++id;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

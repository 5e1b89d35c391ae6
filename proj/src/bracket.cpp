#include "commute/bracket.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "commute/errors.hpp"
#include "commute/parallel.hpp"
#include "commute/reduce.hpp"

namespace commute {

void require_shared_domain(std::span<const GridField> fields) {
  if (fields.empty())
    throw UsageError("need at least one field");
  const TorusDomain& d = fields.front().domain();
  if (fields.size() != static_cast<std::size_t>(d.n))
    throw UsageError("bracket needs exactly n = " + std::to_string(d.n) + " fields, got " +
                     std::to_string(fields.size()));
  for (const GridField& f : fields) {
    if (!(f.domain() == d))
      throw UsageError("fields live on different torus domains");
  }
}

double partial_derivative(const GridField& field, int axis, std::size_t k) {
  const TorusDomain& d = field.domain();
  const std::size_t stride = d.stride(axis);
  const auto res = static_cast<std::size_t>(d.resolution[axis]);
  const std::size_t i = (k / stride) % res;
  const std::size_t base = k - i * stride;
  auto at = [&](std::size_t offset) { return field[base + ((i + offset) % res) * stride]; };
  const double plus1 = at(1);
  const double minus1 = at(res - 1);
  const double plus2 = at(2);
  const double minus2 = at(res - 2);
  constexpr double c1 = 2.0 / 3.0;
  constexpr double c2 = 1.0 / 12.0;
  return (c1 * (plus1 - minus1) - c2 * (plus2 - minus2)) / d.spacing(axis);
}

namespace {

double sorted_sum3(double a, double b, double c) {
  if (a > b)
    std::swap(a, b);
  if (b > c)
    std::swap(b, c);
  if (a > b)
    std::swap(a, b);
  return (a + b) + c;
}

double bracket_at(std::span<const GridField> fields, std::size_t k) {
  const int n = fields.front().domain().n;
  std::array<double, 9> jac{};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      jac[static_cast<std::size_t>(i * n + j)] = partial_derivative(fields[static_cast<std::size_t>(i)], j, k);
  }
  return determinant(std::span<const double>(jac.data(), static_cast<std::size_t>(n * n)), n);
}

} // namespace

double determinant(std::span<const double> m, int n) {
  if (n == 2)
    return m[0] * m[3] - m[2] * m[1];
  // a(r, c) with factors taken column by column.
  auto a = [&](int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; };
  auto term = [&](int r0, int r1, int r2) { return (a(r0, 0) * a(r1, 1)) * a(r2, 2); };
  const double positive = sorted_sum3(term(0, 1, 2), term(1, 2, 0), term(2, 0, 1));
  const double negative = sorted_sum3(term(1, 0, 2), term(0, 2, 1), term(2, 1, 0));
  return positive - negative;
}

GridField serial::bracket(std::span<const GridField> fields) {
  require_shared_domain(fields);
  const TorusDomain& d = fields.front().domain();
  std::vector<double> out(d.node_count());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = bracket_at(fields, k);
  return GridField(d, std::move(out));
}

GridField parallel::bracket(std::span<const GridField> fields) {
  require_shared_domain(fields);
  const TorusDomain& d = fields.front().domain();
  std::vector<double> out(d.node_count());
  const auto count = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k)
    out[static_cast<std::size_t>(k)] = bracket_at(fields, static_cast<std::size_t>(k));
  return GridField(d, std::move(out));
}

double serial::c0_norm(const GridField& field) {
  double m = 0.0;
  for (double v : field.values())
    m = std::max(m, std::abs(v));
  return m;
}

double parallel::c0_norm(const GridField& field) {
  const auto values = field.values();
  const auto count = static_cast<std::ptrdiff_t>(values.size());
  double m = 0.0;
#pragma omp parallel for reduction(max : m) schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k)
    m = std::max(m, std::abs(values[static_cast<std::size_t>(k)]));
  return m;
}

double serial::l1_norm(const GridField& field) {
  std::vector<double> magnitude(field.size());
  for (std::size_t k = 0; k < magnitude.size(); ++k)
    magnitude[k] = std::abs(field[k]);
  return serial::pairwise_sum(magnitude) * field.domain().cell_volume();
}

double parallel::l1_norm(const GridField& field) {
  std::vector<double> magnitude(field.size());
  const auto count = static_cast<std::ptrdiff_t>(magnitude.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k)
    magnitude[static_cast<std::size_t>(k)] = std::abs(field[static_cast<std::size_t>(k)]);
  return parallel::pairwise_sum(magnitude) * field.domain().cell_volume();
}

BracketReport bracket_report(const GridField& bracket_field) {
  BracketReport r;
  r.c0_norm = c0_norm(bracket_field);
  r.l1_norm = l1_norm(bracket_field);
  r.epsilon = r.l1_norm / 2.0;
  return r;
}

} // namespace commute

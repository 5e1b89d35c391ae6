#pragma once

#include <span>
#include <vector>

#include "commute/torus_grid.hpp"

namespace commute {

/// Norms of the volume bracket and the derived epsilon = l1 / 2.
struct BracketReport {
  double c0_norm = 0.0;
  double l1_norm = 0.0;
  double epsilon = 0.0;
};

/// Fourth-order centred periodic difference of `field` along `axis` at node k.
double partial_derivative(const GridField& field, int axis, std::size_t k);

/// Determinant of an n x n matrix (n = 2, 3) stored row-major.
///
/// Every Leibniz term multiplies its factors in column order and the positive
/// and negative terms are each summed in sorted order. Swapping two rows then
/// swaps the two sums exactly, so the result is negated bit-for-bit.
double determinant(std::span<const double> m, int n);

namespace serial {
GridField bracket(std::span<const GridField> fields);
double c0_norm(const GridField& field);
double l1_norm(const GridField& field);
} // namespace serial

namespace parallel {
GridField bracket(std::span<const GridField> fields);
double c0_norm(const GridField& field);
double l1_norm(const GridField& field);
} // namespace parallel

/// Pointwise det(dF_i/dx_j) of n fields on one n-torus. Throws UsageError on
/// a domain mismatch or when the field count differs from n.
inline GridField bracket(std::span<const GridField> fields) { return parallel::bracket(fields); }

/// Grid sup of |value|; a lower bound for the continuum sup.
inline double c0_norm(const GridField& field) { return parallel::c0_norm(field); }

/// Riemann sum of |value| * cell volume with fixed-shape pairwise summation.
inline double l1_norm(const GridField& field) { return parallel::l1_norm(field); }

BracketReport bracket_report(const GridField& bracket_field);

/// Throws UsageError unless all fields share one domain and count == n.
void require_shared_domain(std::span<const GridField> fields);

} // namespace commute

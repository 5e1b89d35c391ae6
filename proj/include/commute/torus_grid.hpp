#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace commute {

/// Flat n-torus R^n / (period_0 Z x ... x period_{n-1} Z) sampled on a
/// uniform grid. Node (i_0,...,i_{n-1}) sits at x_k = i_k * period_k / res_k;
/// storage is row-major with axis 0 slowest.
struct TorusDomain {
  int n = 2;
  std::vector<int> resolution;
  std::vector<double> period;

  static TorusDomain uniform(int n, int resolution, double period = 1.0);

  /// Throws UsageError unless n in {2,3}, every resolution is a power of two
  /// >= 16 and every period is finite and positive.
  void validate() const;

  std::size_t node_count() const;
  double spacing(int axis) const { return period[axis] / resolution[axis]; }
  double cell_volume() const;
  double volume() const;

  std::size_t stride(int axis) const;
  /// Coordinates of a flat node index.
  void node_position(std::size_t index, std::span<double> x) const;

  bool operator==(const TorusDomain&) const = default;
};

/// Real-valued function on a TorusDomain, one value per node.
class GridField {
public:
  GridField() = default;
  GridField(TorusDomain domain, std::vector<double> values);

  const TorusDomain& domain() const { return domain_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::size_t size() const { return values_.size(); }

private:
  TorusDomain domain_;
  std::vector<double> values_;
};

/// Parsed member of the built-in expression catalog: trigonometric
/// polynomials in x, y, z built from constants, pi, + - * / and sin/cos.
/// Juxtaposition multiplies ("2πx"), and "const c" is accepted as a literal.
class Expression {
public:
  static Expression parse(std::string_view text);

  double evaluate(std::span<const double> x) const;
  const std::string& text() const { return text_; }
  /// Highest variable index referenced plus one (0 for constants).
  int arity() const { return arity_; }

  struct Node;

private:
  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;
  int arity_ = 0;

  double eval_node(int id, std::span<const double> x) const;
  friend class ExpressionParser;
};

/// Samples a catalog expression ("sin(2πx)·sin(2πy)", "const 3", ...) or loads
/// "file:<path>" (an FGRID whose domain must equal `domain`).
/// Throws UsageError for unknown descriptors, expressions that reference more
/// variables than the domain has, or expressions that are not periodic on
/// the torus.
GridField sample_field(const TorusDomain& domain, std::string_view descriptor);

} // namespace commute

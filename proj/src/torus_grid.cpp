#include "commute/torus_grid.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

#include "commute/errors.hpp"
#include "commute/io.hpp"

namespace commute {

// ---------------------------------------------------------------------------
// TorusDomain

TorusDomain TorusDomain::uniform(int n, int resolution, double period) {
  TorusDomain d;
  d.n = n;
  d.resolution.assign(static_cast<std::size_t>(std::max(n, 0)), resolution);
  d.period.assign(static_cast<std::size_t>(std::max(n, 0)), period);
  d.validate();
  return d;
}

void TorusDomain::validate() const {
  if (n != 2 && n != 3)
    throw UsageError("torus dimension must be 2 or 3, got " + std::to_string(n));
  if (resolution.size() != static_cast<std::size_t>(n) || period.size() != static_cast<std::size_t>(n))
    throw UsageError("torus domain needs one resolution and one period per axis");
  for (int r : resolution) {
    if (r < 16 || !std::has_single_bit(static_cast<unsigned>(r)))
      throw UsageError("resolution must be a power of two >= 16, got " + std::to_string(r));
  }
  for (double p : period) {
    if (!std::isfinite(p) || p <= 0.0)
      throw UsageError("torus period must be finite and positive");
  }
}

std::size_t TorusDomain::node_count() const {
  std::size_t count = 1;
  for (int r : resolution)
    count *= static_cast<std::size_t>(r);
  return count;
}

double TorusDomain::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < n; ++a)
    v *= spacing(a);
  return v;
}

double TorusDomain::volume() const {
  double v = 1.0;
  for (double p : period)
    v *= p;
  return v;
}

std::size_t TorusDomain::stride(int axis) const {
  std::size_t s = 1;
  for (int a = n - 1; a > axis; --a)
    s *= static_cast<std::size_t>(resolution[a]);
  return s;
}

void TorusDomain::node_position(std::size_t index, std::span<double> x) const {
  for (int a = n - 1; a >= 0; --a) {
    const auto r = static_cast<std::size_t>(resolution[a]);
    x[a] = static_cast<double>(index % r) * spacing(a);
    index /= r;
  }
}

// ---------------------------------------------------------------------------
// GridField

GridField::GridField(TorusDomain domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  domain_.validate();
  if (values_.size() != domain_.node_count())
    throw UsageError("grid field has " + std::to_string(values_.size()) + " values, domain needs " +
                     std::to_string(domain_.node_count()));
  for (double v : values_) {
    if (!std::isfinite(v))
      throw UsageError("grid field values must be finite");
  }
}

// ---------------------------------------------------------------------------
// Expression

struct Expression::Node {
  enum class Kind { Constant, Variable, Negate, Add, Subtract, Multiply, Divide, Power, Sin, Cos };
  Kind kind;
  double value = 0.0;
  int var = 0;
  int lhs = -1;
  int rhs = -1;
};

namespace {

// Maps the few non-ASCII symbols people type into formulas onto ASCII.
std::string normalize(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto c = static_cast<unsigned char>(in[i]);
    auto next_is = [&](std::string_view seq) { return in.substr(i, seq.size()) == seq; };
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (next_is("\xCF\x80")) { // π
      out += " pi ";
      i += 1;
    } else if (next_is("\xC2\xB7") || next_is("\xC3\x97")) { // · ×
      out += '*';
      i += 1;
    } else if (next_is("\xE2\x88\x92")) { // −
      out += '-';
      i += 2;
    } else if (next_is("\xE2\x8B\x85")) { // ⋅
      out += '*';
      i += 2;
    } else {
      throw UsageError("unsupported character in expression: " + std::string(in));
    }
  }
  return out;
}

} // namespace

class ExpressionParser {
public:
  ExpressionParser(Expression& expr, std::string source) : e_(expr), src_(std::move(source)) {}

  int parse() {
    const int root = parse_sum();
    skip_space();
    if (pos_ != src_.size())
      fail("unexpected trailing input");
    return root;
  }

private:
  using Kind = Expression::Node::Kind;
  Expression& e_;
  std::string src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw UsageError("unknown field descriptor '" + e_.text_ + "': " + what);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add(Expression::Node node) {
    e_.nodes_.push_back(node);
    return static_cast<int>(e_.nodes_.size()) - 1;
  }

  int binary(Kind k, int lhs, int rhs) { return add({k, 0.0, 0, lhs, rhs}); }

  bool starts_primary() {
    const char c = peek();
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '(' ||
           std::isalpha(static_cast<unsigned char>(c));
  }

  int parse_sum() {
    int lhs = parse_product();
    for (;;) {
      if (accept('+'))
        lhs = binary(Kind::Add, lhs, parse_product());
      else if (accept('-'))
        lhs = binary(Kind::Subtract, lhs, parse_product());
      else
        return lhs;
    }
  }

  int parse_product() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = binary(Kind::Multiply, lhs, parse_unary());
      else if (accept('/'))
        lhs = binary(Kind::Divide, lhs, parse_unary());
      else if (starts_primary())
        lhs = binary(Kind::Multiply, lhs, parse_power());
      else
        return lhs;
    }
  }

  int parse_unary() {
    if (accept('-'))
      return add({Kind::Negate, 0.0, 0, parse_unary(), -1});
    if (accept('+'))
      return parse_unary();
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (!accept('^'))
      return base;
    skip_space();
    std::size_t used = 0;
    int exponent = 0;
    try {
      exponent = std::stoi(src_.substr(pos_), &used);
    } catch (const std::exception&) {
      fail("exponent must be a non-negative integer literal");
    }
    if (exponent < 0)
      fail("exponent must be a non-negative integer literal");
    pos_ += used;
    const int exp_node = add({Kind::Constant, static_cast<double>(exponent)});
    return binary(Kind::Power, base, exp_node);
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    return src_.substr(start, pos_ - start);
  }

  int parse_primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      const int inner = parse_sum();
      if (!accept(')'))
        fail("missing ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(src_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return add({Kind::Constant, v});
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::string id = identifier();
      if (id == "pi")
        return add({Kind::Constant, std::numbers::pi});
      if (id == "x" || id == "y" || id == "z") {
        const int var = id[0] == 'x' ? 0 : id[0] == 'y' ? 1 : 2;
        e_.arity_ = std::max(e_.arity_, var + 1);
        return add({Kind::Variable, 0.0, var});
      }
      if (id == "const")
        return parse_unary();
      if (id == "sin" || id == "cos") {
        if (!accept('('))
          fail(id + " needs a parenthesised argument");
        const int arg = parse_sum();
        if (!accept(')'))
          fail("missing ')'");
        return add({id == "sin" ? Kind::Sin : Kind::Cos, 0.0, 0, arg, -1});
      }
      fail("unknown identifier '" + id + "'");
    }
    fail(c == '\0' ? "unexpected end of input" : std::string("unexpected '") + c + "'");
  }
};

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.text_ = std::string(text);
  ExpressionParser parser(e, normalize(text));
  e.root_ = parser.parse();
  return e;
}

double Expression::evaluate(std::span<const double> x) const { return eval_node(root_, x); }

double Expression::eval_node(int id, std::span<const double> x) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  using K = Node::Kind;
  switch (node.kind) {
  case K::Constant:
    return node.value;
  case K::Variable:
    return x[static_cast<std::size_t>(node.var)];
  case K::Negate:
    return -eval_node(node.lhs, x);
  case K::Add:
    return eval_node(node.lhs, x) + eval_node(node.rhs, x);
  case K::Subtract:
    return eval_node(node.lhs, x) - eval_node(node.rhs, x);
  case K::Multiply:
    return eval_node(node.lhs, x) * eval_node(node.rhs, x);
  case K::Divide:
    return eval_node(node.lhs, x) / eval_node(node.rhs, x);
  case K::Power: {
    const double base = eval_node(node.lhs, x);
    const int e = static_cast<int>(nodes_[static_cast<std::size_t>(node.rhs)].value);
    double r = 1.0;
    for (int i = 0; i < e; ++i)
      r *= base;
    return r;
  }
  case K::Sin:
    return std::sin(eval_node(node.lhs, x));
  case K::Cos:
    return std::cos(eval_node(node.lhs, x));
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// sample_field

namespace {

// A catalog expression is accepted only if shifting any coordinate by its
// period leaves the value unchanged at a set of fixed probe points.
void require_periodic(const Expression& expr, const TorusDomain& domain) {
  std::mt19937_64 rng(0x5eedf1e1dULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(domain.n));
  std::vector<double> shifted(x.size());
  for (int probe = 0; probe < 32; ++probe) {
    for (int a = 0; a < domain.n; ++a)
      x[a] = unit(rng) * domain.period[a];
    const double base = expr.evaluate(x);
    if (!std::isfinite(base))
      throw UsageError("expression '" + expr.text() + "' is not finite on the torus");
    for (int a = 0; a < domain.n; ++a) {
      shifted = x;
      shifted[a] += domain.period[a];
      const double moved = expr.evaluate(shifted);
      if (std::abs(moved - base) > 1e-9 * (1.0 + std::abs(base)))
        throw UsageError("expression '" + expr.text() + "' is not periodic along axis " + std::to_string(a));
    }
  }
}

} // namespace

GridField sample_field(const TorusDomain& domain, std::string_view descriptor) {
  domain.validate();
  constexpr std::string_view file_prefix = "file:";
  if (descriptor.starts_with(file_prefix)) {
    GridField loaded = read_fgrid(std::string(descriptor.substr(file_prefix.size())));
    if (!(loaded.domain() == domain))
      throw UsageError("field file '" + std::string(descriptor.substr(file_prefix.size())) +
                       "' does not match the requested domain");
    return loaded;
  }

  const Expression expr = Expression::parse(descriptor);
  if (expr.arity() > domain.n)
    throw UsageError("expression '" + expr.text() + "' uses more coordinates than the torus has");
  require_periodic(expr, domain);

  std::vector<double> values(domain.node_count());
  const auto count = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel
  {
    std::vector<double> x(static_cast<std::size_t>(domain.n));
#pragma omp for schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      domain.node_position(static_cast<std::size_t>(k), x);
      values[static_cast<std::size_t>(k)] = expr.evaluate(x);
    }
  }
  return GridField(domain, std::move(values));
}

} // namespace commute

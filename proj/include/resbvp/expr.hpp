#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace resbvp {

/// Immutable expression tree for a nonlinearity g(t, x).
///
/// Grammar (whitespace insensitive), lowest precedence first:
///
///     comparison := sum [ ('<' | '<=' | '>' | '>=' | '==' | '!=') sum ]
///     sum        := product { ('+' | '-') product }
///     product    := unary { ('*' | '/') unary }
///     unary      := '-' unary | power
///     power      := primary [ '^' unary ]          (right associative)
///     primary    := number | 't' | 'x' | call | '(' comparison ')'
///     call       := name '(' args ')'
///
/// Functions: abs exp ln sin cos tanh atan sqrt sign (one argument),
/// min max (two), if(cond, a, b) (only the selected branch is evaluated).
/// Comparisons yield 1 or 0; `if` treats any nonzero condition as true.
class Expr {
 public:
  enum class Op {
    Number, VarT, VarX, Neg,
    Add, Sub, Mul, Div, Pow,
    Lt, Le, Gt, Ge, Eq, Ne,
    Call, If,
  };
  enum class Fn { Abs, Exp, Ln, Sin, Cos, Tanh, Atan, Sqrt, Sign, Min, Max };

  struct Node;
  using NodePtr = std::shared_ptr<const Node>;
  struct Node {
    Op op = Op::Number;
    double value = 0.0;
    Fn fn = Fn::Abs;
    std::vector<NodePtr> args;
  };

  /// The constant zero.
  Expr();

  static Expr parse(std::string_view text);

  static Expr number(double value);
  static Expr var_t();
  static Expr var_x();
  static Expr negate(Expr a);
  static Expr binary(Op op, Expr a, Expr b);
  static Expr call(Fn fn, std::vector<Expr> args);
  static Expr if_then_else(Expr cond, Expr a, Expr b);

  /// Evaluates the tree. Throws DomainError on ln/sqrt/division/pow domain
  /// violations and on non-finite intermediate results.
  double operator()(double t, double x) const;

  /// Fully parenthesised source text that reparses to the same tree.
  std::string str() const;

  std::size_t node_count() const;
  bool depends_on_t() const;
  bool is_constant_zero() const;

  const Node& root() const { return *root_; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(NodePtr root) : root_(std::move(root)) {}
  NodePtr root_;
};

double eval(const Expr& e, double t, double x);

/// Scalar function of (t, x) used by the sampling estimators.
using SampledFn = std::function<double(int, double)>;

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
  /// Sampling-based estimate, not a certified enclosure.
  bool estimate = true;
};

/// Estimated inf/sup of f over t_set x [x_lo, x_hi]: Chebyshev-Lobatto samples
/// per t (endpoints included) followed by a golden-section polish around the
/// best sample for each extremum.
Bounds bound_on_box(const SampledFn& f, std::span<const int> t_set, double x_lo,
                    double x_hi, int samples = 512);
Bounds bound_on_box(const Expr& e, std::span<const int> t_set, double x_lo,
                    double x_hi, int samples = 512);

/// Estimated Lipschitz constant of x -> f(t, x) on [x_lo, x_hi], maximised over
/// t_set: slopes between neighbouring samples plus central differences.
double lipschitz_estimate(const SampledFn& f, std::span<const int> t_set, double x_lo,
                          double x_hi, int samples = 512);
double lipschitz_estimate(const Expr& e, std::span<const int> t_set, double x_lo,
                          double x_hi, int samples = 512);

/// Chebyshev-Lobatto points on [lo, hi], ascending, endpoints included.
std::vector<double> chebyshev_points(double lo, double hi, int count);

}  // namespace resbvp

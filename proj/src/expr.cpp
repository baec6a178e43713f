#include "resbvp/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

#include "resbvp/error.hpp"

namespace resbvp {

namespace {

using Node = Expr::Node;
using NodePtr = Expr::NodePtr;
using Op = Expr::Op;
using Fn = Expr::Fn;

struct FnInfo {
  std::string_view name;
  Fn fn;
  int arity;
};

constexpr std::array<FnInfo, 11> kFunctions{{
    {"abs", Fn::Abs, 1},   {"exp", Fn::Exp, 1},   {"ln", Fn::Ln, 1},
    {"sin", Fn::Sin, 1},   {"cos", Fn::Cos, 1},   {"tanh", Fn::Tanh, 1},
    {"atan", Fn::Atan, 1}, {"sqrt", Fn::Sqrt, 1}, {"sign", Fn::Sign, 1},
    {"min", Fn::Min, 2},   {"max", Fn::Max, 2},
}};

std::string_view fn_name(Fn fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.name;
  }
  return "?";
}

int fn_arity(Fn fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.arity;
  }
  return 1;
}

std::string_view op_symbol(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "^";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    default: return "?";
  }
}

NodePtr make_node(Op op, std::vector<NodePtr> args = {}, double value = 0.0,
                  Fn fn = Fn::Abs) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->value = value;
  node->fn = fn;
  node->args = std::move(args);
  return node;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    auto node = comparison();
    skip_ws();
    if (pos_ != text_.size()) fail("operator or end of input");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'"
                                            : std::string("end of input");
    throw ParseError(pos_, expected,
                     "syntax error at offset " + std::to_string(pos_) + ": expected " +
                         expected + ", found " + found);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!accept(token)) fail("'" + std::string(token) + "'");
  }

  NodePtr comparison() {
    auto lhs = sum();
    skip_ws();
    // Two-character operators first so "<=" is not read as "<".
    static constexpr std::array<std::pair<std::string_view, Op>, 6> ops{{
        {"<=", Op::Le}, {">=", Op::Ge}, {"==", Op::Eq},
        {"!=", Op::Ne}, {"<", Op::Lt},  {">", Op::Gt},
    }};
    for (const auto& [symbol, op] : ops) {
      if (accept(symbol)) {
        auto rhs = sum();
        return make_node(op, {lhs, rhs});
      }
    }
    return lhs;
  }

  NodePtr sum() {
    auto lhs = product();
    for (;;) {
      if (accept("+")) {
        lhs = make_node(Op::Add, {lhs, product()});
      } else if (accept("-")) {
        lhs = make_node(Op::Sub, {lhs, product()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr product() {
    auto lhs = unary();
    for (;;) {
      if (accept("*")) {
        lhs = make_node(Op::Mul, {lhs, unary()});
      } else if (accept("/")) {
        lhs = make_node(Op::Div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept("-")) return make_node(Op::Neg, {unary()});
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept("^")) return make_node(Op::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("number, identifier, '(' or '-'");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept("(")) {
      auto inner = comparison();
      expect(")");
      return inner;
    }
    fail("number, identifier, '(' or '-'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value,
                                     std::chars_format::general);
    if (ec != std::errc{}) fail("number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    if (!std::isfinite(value)) {
      pos_ = start;
      fail("finite number");
    }
    return make_node(Op::Number, {}, value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "t") return make_node(Op::VarT);
    if (name == "x") return make_node(Op::VarX);
    if (name == "if") {
      expect("(");
      auto cond = comparison();
      expect(",");
      auto a = comparison();
      expect(",");
      auto b = comparison();
      expect(")");
      return make_node(Op::If, {cond, a, b});
    }
    for (const auto& f : kFunctions) {
      if (f.name != name) continue;
      expect("(");
      std::vector<NodePtr> args;
      args.push_back(comparison());
      while (static_cast<int>(args.size()) < f.arity) {
        expect(",");
        args.push_back(comparison());
      }
      expect(")");
      return make_node(Op::Call, std::move(args), 0.0, f.fn);
    }
    pos_ = start;
    throw ParseError(start, "t, x or a known function",
                     "unknown identifier '" + std::string(name) + "' at offset " +
                         std::to_string(start));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printing

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void print(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Number: {
      if (n.value < 0) {
        out += "(-" + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      return;
    }
    case Op::VarT: out += "t"; return;
    case Op::VarX: out += "x"; return;
    case Op::Neg:
      out += "(-";
      print(*n.args[0], out);
      out += ")";
      return;
    case Op::Call:
      out += fn_name(n.fn);
      out += "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print(*n.args[i], out);
      }
      out += ")";
      return;
    case Op::If:
      out += "if(";
      print(*n.args[0], out);
      out += ", ";
      print(*n.args[1], out);
      out += ", ";
      print(*n.args[2], out);
      out += ")";
      return;
    default:
      out += "(";
      print(*n.args[0], out);
      out += op_symbol(n.op);
      print(*n.args[1], out);
      out += ")";
      return;
  }
}

std::string print(const Node& n) {
  std::string out;
  print(n, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

[[noreturn]] void domain_error(const Node& n, const std::string& why) {
  const std::string sub = print(n);
  throw DomainError(sub, "domain error in '" + sub + "': " + why);
}

double checked(const Node& n, double v) {
  if (!std::isfinite(v)) domain_error(n, "non-finite result");
  return v;
}

double evaluate(const Node& n, double t, double x) {
  switch (n.op) {
    case Op::Number: return n.value;
    case Op::VarT: return t;
    case Op::VarX: return x;
    case Op::Neg: return -evaluate(*n.args[0], t, x);
    case Op::If:
      return evaluate(*n.args[0], t, x) != 0.0 ? evaluate(*n.args[1], t, x)
                                               : evaluate(*n.args[2], t, x);
    case Op::Call: {
      const double a = evaluate(*n.args[0], t, x);
      switch (n.fn) {
        case Fn::Abs: return std::abs(a);
        case Fn::Exp: return checked(n, std::exp(a));
        case Fn::Ln:
          if (a <= 0.0) domain_error(n, "logarithm of nonpositive argument");
          return std::log(a);
        case Fn::Sin: return std::sin(a);
        case Fn::Cos: return std::cos(a);
        case Fn::Tanh: return std::tanh(a);
        case Fn::Atan: return std::atan(a);
        case Fn::Sqrt:
          if (a < 0.0) domain_error(n, "square root of negative argument");
          return std::sqrt(a);
        case Fn::Sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
        case Fn::Min: return std::min(a, evaluate(*n.args[1], t, x));
        case Fn::Max: return std::max(a, evaluate(*n.args[1], t, x));
      }
      return 0.0;
    }
    default: break;
  }
  const double a = evaluate(*n.args[0], t, x);
  const double b = evaluate(*n.args[1], t, x);
  switch (n.op) {
    case Op::Add: return checked(n, a + b);
    case Op::Sub: return checked(n, a - b);
    case Op::Mul: return checked(n, a * b);
    case Op::Div:
      if (b == 0.0) domain_error(n, "division by zero");
      return checked(n, a / b);
    case Op::Pow:
      if (a < 0.0 && std::trunc(b) != b) {
        domain_error(n, "negative base with non-integer exponent");
      }
      if (a == 0.0 && b < 0.0) domain_error(n, "zero base with negative exponent");
      return checked(n, std::pow(a, b));
    case Op::Lt: return a < b ? 1.0 : 0.0;
    case Op::Le: return a <= b ? 1.0 : 0.0;
    case Op::Gt: return a > b ? 1.0 : 0.0;
    case Op::Ge: return a >= b ? 1.0 : 0.0;
    case Op::Eq: return a == b ? 1.0 : 0.0;
    case Op::Ne: return a != b ? 1.0 : 0.0;
    default: return 0.0;
  }
}

bool same(const Node& a, const Node& b) {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  if (a.op == Op::Number && a.value != b.value) return false;
  if (a.op == Op::Call && a.fn != b.fn) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

std::size_t count(const Node& n) {
  std::size_t total = 1;
  for (const auto& c : n.args) total += count(*c);
  return total;
}

bool uses_t(const Node& n) {
  if (n.op == Op::VarT) return true;
  return std::any_of(n.args.begin(), n.args.end(), [](const NodePtr& c) { return uses_t(*c); });
}

}  // namespace

Expr::Expr() : root_(make_node(Op::Number)) {}

Expr Expr::parse(std::string_view text) { return Expr(Parser(text).parse()); }

Expr Expr::number(double value) { return Expr(make_node(Op::Number, {}, value)); }
Expr Expr::var_t() { return Expr(make_node(Op::VarT)); }
Expr Expr::var_x() { return Expr(make_node(Op::VarX)); }
Expr Expr::negate(Expr a) { return Expr(make_node(Op::Neg, {a.root_})); }

Expr Expr::binary(Op op, Expr a, Expr b) {
  switch (op) {
    case Op::Number: case Op::VarT: case Op::VarX: case Op::Neg: case Op::Call: case Op::If:
      throw Error(ErrorKind::Input, "Expr::binary: not a binary operator");
    default: break;
  }
  return Expr(make_node(op, {a.root_, b.root_}));
}

Expr Expr::call(Fn fn, std::vector<Expr> args) {
  if (static_cast<int>(args.size()) != fn_arity(fn)) {
    throw Error(ErrorKind::Input, "Expr::call: wrong number of arguments for " +
                                      std::string(fn_name(fn)));
  }
  std::vector<NodePtr> nodes;
  for (auto& a : args) nodes.push_back(a.root_);
  return Expr(make_node(Op::Call, std::move(nodes), 0.0, fn));
}

Expr Expr::if_then_else(Expr cond, Expr a, Expr b) {
  return Expr(make_node(Op::If, {cond.root_, a.root_, b.root_}));
}

double Expr::operator()(double t, double x) const { return evaluate(*root_, t, x); }

std::string Expr::str() const { return print(*root_); }

std::size_t Expr::node_count() const { return count(*root_); }

bool Expr::depends_on_t() const { return uses_t(*root_); }

bool Expr::is_constant_zero() const {
  return root_->op == Op::Number && root_->value == 0.0;
}

bool operator==(const Expr& a, const Expr& b) { return same(*a.root_, *b.root_); }

double eval(const Expr& e, double t, double x) { return e(t, x); }

// ---------------------------------------------------------------------------
// Sampling estimators

std::vector<double> chebyshev_points(double lo, double hi, int count) {
  if (count < 2 || lo == hi) return {lo, hi};
  std::vector<double> pts(static_cast<std::size_t>(count));
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (int k = 0; k < count; ++k) {
    // Ascending order: cos runs from -1 to 1.
    const double theta = std::numbers::pi * static_cast<double>(count - 1 - k) / (count - 1);
    pts[static_cast<std::size_t>(k)] = mid + half * std::cos(theta);
  }
  pts.front() = lo;
  pts.back() = hi;
  return pts;
}

namespace {

void check_box(double x_lo, double x_hi, int samples) {
  if (!(x_lo <= x_hi)) throw Error(ErrorKind::Input, "bound_on_box: x_lo > x_hi");
  if (samples < 2) throw Error(ErrorKind::Input, "bound_on_box: need at least 2 samples");
}

// Golden-section search for the extremum of sign * f on [a, b]; every
// evaluation is folded into `seen`.
void golden_polish(const std::function<double(double)>& f, double a, double b, double sign,
                   Bounds& seen) {
  constexpr double kInvPhi = 0.6180339887498949;
  auto record = [&](double v) {
    seen.lo = std::min(seen.lo, v);
    seen.hi = std::max(seen.hi, v);
    return sign * v;
  };
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = record(f(c));
  double fd = record(f(d));
  for (int it = 0; it < 80 && (b - a) > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = record(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = record(f(d));
    }
  }
}

}  // namespace

Bounds bound_on_box(const SampledFn& f, std::span<const int> t_set, double x_lo, double x_hi,
                    int samples) {
  check_box(x_lo, x_hi, samples);
  Bounds out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             true};
  if (t_set.empty()) return Bounds{0.0, 0.0, true};
  const auto pts = chebyshev_points(x_lo, x_hi, samples);
  std::vector<double> vals(pts.size());
  for (int t : t_set) {
    for (std::size_t k = 0; k < pts.size(); ++k) vals[k] = f(t, pts[k]);
    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    out.lo = std::min(out.lo, *mn);
    out.hi = std::max(out.hi, *mx);
    if (pts.size() < 3 || x_lo == x_hi) continue;
    auto fx = [&](double x) { return f(t, x); };
    for (auto it : {mn, mx}) {
      const auto k = static_cast<std::size_t>(it - vals.begin());
      const double a = pts[k == 0 ? 0 : k - 1];
      const double b = pts[std::min(k + 1, pts.size() - 1)];
      golden_polish(fx, a, b, it == mx ? 1.0 : -1.0, out);
    }
  }
  return out;
}

Bounds bound_on_box(const Expr& e, std::span<const int> t_set, double x_lo, double x_hi,
                    int samples) {
  return bound_on_box([&e](int t, double x) { return e(t, x); }, t_set, x_lo, x_hi, samples);
}

double lipschitz_estimate(const SampledFn& f, std::span<const int> t_set, double x_lo,
                          double x_hi, int samples) {
  check_box(x_lo, x_hi, samples);
  if (x_lo == x_hi) return 0.0;
  const auto pts = chebyshev_points(x_lo, x_hi, samples);
  double best = 0.0;
  for (int t : t_set) {
    double prev = f(t, pts[0]);
    for (std::size_t k = 1; k < pts.size(); ++k) {
      const double cur = f(t, pts[k]);
      const double dx = pts[k] - pts[k - 1];
      if (dx > 0) best = std::max(best, std::abs(cur - prev) / dx);
      prev = cur;
    }
    for (double x : pts) {
      const double h = 1e-6 * (1.0 + std::abs(x));
      const double a = std::max(x_lo, x - h);
      const double b = std::min(x_hi, x + h);
      if (b > a) best = std::max(best, std::abs(f(t, b) - f(t, a)) / (b - a));
    }
  }
  return best;
}

double lipschitz_estimate(const Expr& e, std::span<const int> t_set, double x_lo, double x_hi,
                          int samples) {
  return lipschitz_estimate([&e](int t, double x) { return e(t, x); }, t_set, x_lo, x_hi,
                            samples);
}

}  // namespace resbvp

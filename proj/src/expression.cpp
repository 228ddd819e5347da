#include "dhl/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace dhl::expr {

struct Expression::Node {
  enum class Op {
    constant, var_x, var_u, neg, add, sub, mul, div, pow,
    fn_sqrt, fn_abs, fn_exp, fn_sin, fn_cos, fn_max, fn_min,
  };
  Op op = Op::constant;
  double value = 0.0;
  int a = -1;
  int b = -1;
  int var = 0;               // 0-based x index for var_x
  std::uint32_t offset = 0;  // source byte offset
};

namespace {

using Node = Expression::Node;
using Op = Node::Op;

constexpr std::size_t kMaxSource = 64 * 1024;
constexpr int kMaxVars = 8;
constexpr int kMaxDepth = 512;

struct FnInfo {
  const char* name;
  Op op;
  int arity;
};

constexpr FnInfo kFunctions[] = {
    {"sqrt", Op::fn_sqrt, 1}, {"abs", Op::fn_abs, 1}, {"exp", Op::fn_exp, 1},
    {"sin", Op::fn_sin, 1},   {"cos", Op::fn_cos, 1}, {"max", Op::fn_max, 2},
    {"min", Op::fn_min, 2},   {"pow", Op::pow, 2},
};

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  std::vector<Node> nodes;
  Expression::ParseError err;
  bool failed = false;

  int fail_at(std::size_t where, std::string message) {
    if (!failed) {
      failed = true;
      err.offset = where;
      err.message = std::move(message);
    }
    return -1;
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool peek_is(char c) {
    skip_ws();
    return pos < text.size() && text[pos] == c;
  }

  bool consume(char c) {
    if (peek_is(c)) {
      ++pos;
      return true;
    }
    return false;
  }

  int mk(Node n) {
    nodes.push_back(n);
    return static_cast<int>(nodes.size()) - 1;
  }

  int parse_expr(int depth) {
    if (depth > kMaxDepth) return fail_at(pos, "expression too deeply nested");
    int a = parse_term(depth + 1);
    if (a < 0) return -1;
    for (;;) {
      skip_ws();
      if (pos >= text.size()) return a;
      const char c = text[pos];
      if (c != '+' && c != '-') return a;
      const std::size_t at = pos;
      ++pos;
      const int b = parse_term(depth + 1);
      if (b < 0) return -1;
      a = mk({c == '+' ? Op::add : Op::sub, 0.0, a, b, 0, static_cast<std::uint32_t>(at)});
    }
  }

  int parse_term(int depth) {
    if (depth > kMaxDepth) return fail_at(pos, "expression too deeply nested");
    int a = parse_unary(depth + 1);
    if (a < 0) return -1;
    for (;;) {
      skip_ws();
      if (pos >= text.size()) return a;
      const char c = text[pos];
      if (c != '*' && c != '/') return a;
      const std::size_t at = pos;
      ++pos;
      const int b = parse_unary(depth + 1);
      if (b < 0) return -1;
      a = mk({c == '*' ? Op::mul : Op::div, 0.0, a, b, 0, static_cast<std::uint32_t>(at)});
    }
  }

  int parse_unary(int depth) {
    if (depth > kMaxDepth) return fail_at(pos, "expression too deeply nested");
    skip_ws();
    if (pos < text.size() && text[pos] == '+') {
      ++pos;
      return parse_unary(depth + 1);
    }
    if (pos < text.size() && text[pos] == '-') {
      const std::size_t at = pos;
      ++pos;
      const int a = parse_unary(depth + 1);
      if (a < 0) return -1;
      return mk({Op::neg, 0.0, a, -1, 0, static_cast<std::uint32_t>(at)});
    }
    return parse_power(depth + 1);
  }

  int parse_power(int depth) {
    int a = parse_atom(depth + 1);
    if (a < 0) return -1;
    while (peek_is('^')) {
      const std::size_t at = pos;
      ++pos;
      // allow a signed right operand; '^' itself stays left-associative
      skip_ws();
      int negs = 0;
      while (pos < text.size() && text[pos] == '-') {
        ++negs;
        ++pos;
        skip_ws();
      }
      int b = parse_atom(depth + 1);
      if (b < 0) return -1;
      for (int i = 0; i < negs; ++i)
        b = mk({Op::neg, 0.0, b, -1, 0, static_cast<std::uint32_t>(at)});
      a = mk({Op::pow, 0.0, a, b, 0, static_cast<std::uint32_t>(at)});
    }
    return a;
  }

  int parse_atom(int depth) {
    if (depth > kMaxDepth) return fail_at(pos, "expression too deeply nested");
    skip_ws();
    if (pos >= text.size()) return fail_at(pos, "expected operand");
    const char c = text[pos];
    if (c == '(') {
      ++pos;
      const int a = parse_expr(depth + 1);
      if (a < 0) return -1;
      if (!consume(')')) return fail_at(pos, "expected ')'");
      return a;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text.data() + pos;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) return fail_at(pos, "malformed number");
      const std::size_t at = pos;
      pos += static_cast<std::size_t>(end - begin);
      return mk({Op::constant, v, -1, -1, 0, static_cast<std::uint32_t>(at)});
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t at = pos;
      std::size_t e = pos;
      while (e < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[e])) || text[e] == '_'))
        ++e;
      const std::string_view name = text.substr(pos, e - pos);
      pos = e;
      if (name == "u")
        return mk({Op::var_u, 0.0, -1, -1, 0, static_cast<std::uint32_t>(at)});
      if (name.size() >= 2 && name[0] == 'x') {
        int idx = 0;
        bool digits = true;
        for (std::size_t i = 1; i < name.size(); ++i) {
          if (!std::isdigit(static_cast<unsigned char>(name[i]))) {
            digits = false;
            break;
          }
          idx = idx * 10 + (name[i] - '0');
        }
        if (digits && idx >= 1 && idx <= kMaxVars)
          return mk({Op::var_x, 0.0, -1, -1, idx - 1, static_cast<std::uint32_t>(at)});
      }
      for (const FnInfo& fn : kFunctions) {
        if (name != fn.name) continue;
        if (!consume('(')) return fail_at(pos, "expected '(' after function name");
        const int a = parse_expr(depth + 1);
        if (a < 0) return -1;
        int b = -1;
        if (fn.arity == 2) {
          if (!consume(',')) return fail_at(pos, "expected ','");
          b = parse_expr(depth + 1);
          if (b < 0) return -1;
        }
        if (!consume(')')) return fail_at(pos, "expected ')'");
        return mk({fn.op, 0.0, a, b, 0, static_cast<std::uint32_t>(at)});
      }
      return fail_at(at, "unknown identifier '" + std::string(name) + "'");
    }
    return fail_at(pos, "unexpected character");
  }
};

int precedence(Op op) {
  switch (op) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    default: return 5;
  }
}

[[noreturn]] void eval_fail(const Node& node, const std::string& what) {
  fail(ErrorKind::domain,
       "evaluation error at offset " + std::to_string(node.offset) + ": " + what);
}

}  // namespace

std::optional<Expression> Expression::try_parse(std::string_view text, ParseError* err) {
  Parser p;
  p.text = text;
  if (text.size() > kMaxSource) {
    if (err) *err = {"expression source exceeds 64 KiB", 0};
    return std::nullopt;
  }
  const int root = p.parse_expr(0);
  if (root >= 0) {
    p.skip_ws();
    if (p.pos != text.size()) p.fail_at(p.pos, "unexpected trailing input");
  }
  if (p.failed) {
    if (err) *err = p.err;
    return std::nullopt;
  }
  Expression e;
  e.nodes_ = std::make_shared<const std::vector<Node>>(std::move(p.nodes));
  e.root_ = root;
  return e;
}

Expression Expression::parse(std::string_view text) {
  ParseError err;
  auto e = try_parse(text, &err);
  if (!e)
    fail(ErrorKind::validation,
         "expression syntax error at offset " + std::to_string(err.offset) + ": " +
             err.message);
  return *e;
}

double Expression::eval(std::span<const double> x, double u) const {
  const std::vector<Node>& nodes = *nodes_;
  // children precede parents in the arena, so a forward scan evaluates the tree
  std::vector<double> val(nodes.size(), 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& nd = nodes[i];
    const double a = nd.a >= 0 ? val[static_cast<std::size_t>(nd.a)] : 0.0;
    const double b = nd.b >= 0 ? val[static_cast<std::size_t>(nd.b)] : 0.0;
    double r = 0.0;
    switch (nd.op) {
      case Op::constant: r = nd.value; break;
      case Op::var_x:
        if (nd.var >= static_cast<int>(x.size()))
          eval_fail(nd, "variable x" + std::to_string(nd.var + 1) + " is not bound");
        r = x[static_cast<std::size_t>(nd.var)];
        break;
      case Op::var_u: r = u; break;
      case Op::neg: r = -a; break;
      case Op::add: r = a + b; break;
      case Op::sub: r = a - b; break;
      case Op::mul: r = a * b; break;
      case Op::div:
        if (b == 0.0) eval_fail(nd, "division by zero");
        r = a / b;
        break;
      case Op::pow: r = std::pow(a, b); break;
      case Op::fn_sqrt:
        if (a < 0.0) eval_fail(nd, "sqrt of a negative value");
        r = std::sqrt(a);
        break;
      case Op::fn_abs: r = std::abs(a); break;
      case Op::fn_exp: r = std::exp(a); break;
      case Op::fn_sin: r = std::sin(a); break;
      case Op::fn_cos: r = std::cos(a); break;
      case Op::fn_max: r = std::max(a, b); break;
      case Op::fn_min: r = std::min(a, b); break;
    }
    if (!std::isfinite(r)) eval_fail(nd, "non-finite result");
    val[i] = r;
  }
  return val[static_cast<std::size_t>(root_)];
}

std::string Expression::print() const {
  const std::vector<Node>& nodes = *nodes_;
  std::vector<std::string> out(nodes.size());
  auto wrap = [&](int child, int prec, bool strict) {
    const std::string& s = out[static_cast<std::size_t>(child)];
    const int cp = precedence(nodes[static_cast<std::size_t>(child)].op);
    const bool need = strict ? cp <= prec : cp < prec;
    return need ? "(" + s + ")" : s;
  };
  char buf[64];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& nd = nodes[i];
    switch (nd.op) {
      case Op::constant:
        std::snprintf(buf, sizeof buf, "%.17g", nd.value);
        out[i] = buf;
        break;
      case Op::var_x: out[i] = "x" + std::to_string(nd.var + 1); break;
      case Op::var_u: out[i] = "u"; break;
      case Op::neg: out[i] = "-" + wrap(nd.a, 3, false); break;
      case Op::add: out[i] = wrap(nd.a, 1, false) + "+" + wrap(nd.b, 1, true); break;
      case Op::sub: out[i] = wrap(nd.a, 1, false) + "-" + wrap(nd.b, 1, true); break;
      case Op::mul: out[i] = wrap(nd.a, 2, false) + "*" + wrap(nd.b, 2, true); break;
      case Op::div: out[i] = wrap(nd.a, 2, false) + "/" + wrap(nd.b, 2, true); break;
      case Op::pow: out[i] = wrap(nd.a, 4, false) + "^" + wrap(nd.b, 4, true); break;
      case Op::fn_sqrt: out[i] = "sqrt(" + out[static_cast<std::size_t>(nd.a)] + ")"; break;
      case Op::fn_abs: out[i] = "abs(" + out[static_cast<std::size_t>(nd.a)] + ")"; break;
      case Op::fn_exp: out[i] = "exp(" + out[static_cast<std::size_t>(nd.a)] + ")"; break;
      case Op::fn_sin: out[i] = "sin(" + out[static_cast<std::size_t>(nd.a)] + ")"; break;
      case Op::fn_cos: out[i] = "cos(" + out[static_cast<std::size_t>(nd.a)] + ")"; break;
      case Op::fn_max:
        out[i] = "max(" + out[static_cast<std::size_t>(nd.a)] + "," +
                 out[static_cast<std::size_t>(nd.b)] + ")";
        break;
      case Op::fn_min:
        out[i] = "min(" + out[static_cast<std::size_t>(nd.a)] + "," +
                 out[static_cast<std::size_t>(nd.b)] + ")";
        break;
    }
  }
  return out[static_cast<std::size_t>(root_)];
}

namespace {

/// Builds derivative trees into a fresh arena.
struct DiffBuilder {
  const std::vector<Node>& src;
  std::vector<Node> dst;
  int var;  // -1 for u

  int copy(int node) {
    const Node& nd = src[static_cast<std::size_t>(node)];
    Node c = nd;
    if (nd.a >= 0) c.a = copy(nd.a);
    if (nd.b >= 0) c.b = copy(nd.b);
    dst.push_back(c);
    return static_cast<int>(dst.size()) - 1;
  }

  int constant(double v) {
    dst.push_back({Op::constant, v, -1, -1, 0, 0});
    return static_cast<int>(dst.size()) - 1;
  }

  int un(Op op, int a) {
    dst.push_back({op, 0.0, a, -1, 0, 0});
    return static_cast<int>(dst.size()) - 1;
  }

  int bin(Op op, int a, int b) {
    dst.push_back({op, 0.0, a, b, 0, 0});
    return static_cast<int>(dst.size()) - 1;
  }

  bool constant_subtree(int node, double* value) const {
    const Node& nd = src[static_cast<std::size_t>(node)];
    if (nd.op == Op::var_x || nd.op == Op::var_u) return false;
    if (nd.a >= 0 || nd.b >= 0) {
      double a = 0.0, b = 0.0;
      if (nd.a >= 0 && !constant_subtree(nd.a, &a)) return false;
      if (nd.b >= 0 && !constant_subtree(nd.b, &b)) return false;
      switch (nd.op) {
        case Op::neg: *value = -a; break;
        case Op::add: *value = a + b; break;
        case Op::sub: *value = a - b; break;
        case Op::mul: *value = a * b; break;
        case Op::div: *value = b != 0.0 ? a / b : 0.0; break;
        case Op::pow: *value = std::pow(a, b); break;
        case Op::fn_sqrt: *value = std::sqrt(a); break;
        case Op::fn_abs: *value = std::abs(a); break;
        case Op::fn_exp: *value = std::exp(a); break;
        case Op::fn_sin: *value = std::sin(a); break;
        case Op::fn_cos: *value = std::cos(a); break;
        case Op::fn_max: *value = std::max(a, b); break;
        case Op::fn_min: *value = std::min(a, b); break;
        default: return false;
      }
      return true;
    }
    if (nd.op != Op::constant) return false;
    *value = nd.value;
    return true;
  }

  int diff(int node) {
    const Node& nd = src[static_cast<std::size_t>(node)];
    switch (nd.op) {
      case Op::constant: return constant(0.0);
      case Op::var_x: return constant(var >= 0 && nd.var == var ? 1.0 : 0.0);
      case Op::var_u: return constant(var == -1 ? 1.0 : 0.0);
      case Op::neg: return un(Op::neg, diff(nd.a));
      case Op::add: return bin(Op::add, diff(nd.a), diff(nd.b));
      case Op::sub: return bin(Op::sub, diff(nd.a), diff(nd.b));
      case Op::mul:
        return bin(Op::add, bin(Op::mul, diff(nd.a), copy(nd.b)),
                   bin(Op::mul, copy(nd.a), diff(nd.b)));
      case Op::div:
        return bin(Op::div,
                   bin(Op::sub, bin(Op::mul, diff(nd.a), copy(nd.b)),
                       bin(Op::mul, copy(nd.a), diff(nd.b))),
                   bin(Op::mul, copy(nd.b), copy(nd.b)));
      case Op::pow: {
        double c = 0.0;
        require(constant_subtree(nd.b, &c), ErrorKind::argument,
                "derivative: exponent must be a constant expression");
        // c * a^(c-1) * a'
        return bin(Op::mul,
                   bin(Op::mul, constant(c), bin(Op::pow, copy(nd.a), constant(c - 1.0))),
                   diff(nd.a));
      }
      case Op::fn_sqrt:
        return bin(Op::div, diff(nd.a),
                   bin(Op::mul, constant(2.0), un(Op::fn_sqrt, copy(nd.a))));
      case Op::fn_abs:
        // sign(a) a' written as a/abs(a) * a'
        return bin(Op::mul, bin(Op::div, copy(nd.a), un(Op::fn_abs, copy(nd.a))),
                   diff(nd.a));
      case Op::fn_exp: return bin(Op::mul, un(Op::fn_exp, copy(nd.a)), diff(nd.a));
      case Op::fn_sin: return bin(Op::mul, un(Op::fn_cos, copy(nd.a)), diff(nd.a));
      case Op::fn_cos:
        return bin(Op::mul, un(Op::neg, un(Op::fn_sin, copy(nd.a))), diff(nd.a));
      case Op::fn_max:
      case Op::fn_min:
        fail(ErrorKind::argument, "derivative: max/min are not differentiable here");
    }
    fail(ErrorKind::argument, "derivative: unsupported node");
  }
};

}  // namespace

Expression Expression::derivative(int var) const {
  require(var >= -1 && var < kMaxVars, ErrorKind::argument, "derivative: bad variable");
  DiffBuilder b{*nodes_, {}, var};
  const int root = b.diff(root_);
  Expression e;
  e.nodes_ = std::make_shared<const std::vector<Node>>(std::move(b.dst));
  e.root_ = root;
  return e;
}

int Expression::max_var() const {
  int m = 0;
  for (const Node& nd : *nodes_)
    if (nd.op == Node::Op::var_x) m = std::max(m, nd.var + 1);
  return m;
}

bool Expression::uses_u() const {
  for (const Node& nd : *nodes_)
    if (nd.op == Node::Op::var_u) return true;
  return false;
}

}  // namespace dhl::expr

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "dhl/expression.hpp"
#include "support/test_support.hpp"

using namespace dhl;
using expr::Expression;
using dhl::test::Rng;

namespace {

/// Independent reference interpreter over a tiny tree the test generates
/// itself; rendered to text and fed through the parser for comparison.
struct RefNode {
  char op;  // 'c' const, 'x' var, 'u', '+','-','*','/','^', 'q' sqrt, 'a' abs,
            // 'e' exp, 's' sin, 'o' cos, 'M' max, 'm' min
  double value = 0.0;
  int var = 0;
  int a = -1, b = -1;
};

struct RefTree {
  std::vector<RefNode> nodes;
  int root = -1;

  double eval(int at, const Vec& x, double u) const {
    const RefNode& nd = nodes[static_cast<std::size_t>(at)];
    switch (nd.op) {
      case 'c': return nd.value;
      case 'x': return x[static_cast<std::size_t>(nd.var)];
      case 'u': return u;
      case '+': return eval(nd.a, x, u) + eval(nd.b, x, u);
      case '-': return eval(nd.a, x, u) - eval(nd.b, x, u);
      case '*': return eval(nd.a, x, u) * eval(nd.b, x, u);
      case '/': return eval(nd.a, x, u) / eval(nd.b, x, u);
      case '^': return std::pow(eval(nd.a, x, u), eval(nd.b, x, u));
      case 'q': return std::sqrt(eval(nd.a, x, u));
      case 'a': return std::abs(eval(nd.a, x, u));
      case 'e': return std::exp(eval(nd.a, x, u));
      case 's': return std::sin(eval(nd.a, x, u));
      case 'o': return std::cos(eval(nd.a, x, u));
      case 'M': return std::max(eval(nd.a, x, u), eval(nd.b, x, u));
      case 'm': return std::min(eval(nd.a, x, u), eval(nd.b, x, u));
    }
    return 0.0;
  }

  std::string render(int at) const {
    const RefNode& nd = nodes[static_cast<std::size_t>(at)];
    char buf[64];
    switch (nd.op) {
      case 'c':
        std::snprintf(buf, sizeof buf, "%.17g", nd.value);
        return buf;
      case 'x': return "x" + std::to_string(nd.var + 1);
      case 'u': return "u";
      case 'q': return "sqrt(" + render(nd.a) + ")";
      case 'a': return "abs(" + render(nd.a) + ")";
      case 'e': return "exp(" + render(nd.a) + ")";
      case 's': return "sin(" + render(nd.a) + ")";
      case 'o': return "cos(" + render(nd.a) + ")";
      case 'M': return "max(" + render(nd.a) + "," + render(nd.b) + ")";
      case 'm': return "min(" + render(nd.a) + "," + render(nd.b) + ")";
      default:
        return "(" + render(nd.a) + ")" + nd.op + "(" + render(nd.b) + ")";
    }
  }
};

RefTree random_tree(Rng& rng, int n_vars, int depth) {
  RefTree t;
  std::uniform_real_distribution<double> cdist(0.1, 3.0);
  // recursive builder over a shared arena
  std::function<int(int)> build = [&](int d) -> int {
    const int leaf_role = static_cast<int>(rng() % 3);
    if (d <= 0 || (leaf_role == 0 && d < 2)) {
      RefNode nd;
      const int choice = static_cast<int>(rng() % 3);
      if (choice == 0) {
        nd.op = 'c';
        nd.value = cdist(rng);
      } else if (choice == 1) {
        nd.op = 'x';
        nd.var = static_cast<int>(rng() % n_vars);
      } else {
        nd.op = 'u';
      }
      t.nodes.push_back(nd);
      return static_cast<int>(t.nodes.size()) - 1;
    }
    static const char ops[] = {'+', '-', '*', '/', '^', 'q', 'a', 'e', 's', 'o', 'M', 'm'};
    RefNode nd;
    nd.op = ops[rng() % (sizeof ops)];
    if (nd.op == '^') {
      nd.a = build(d - 1);
      RefNode c;
      c.op = 'c';
      c.value = static_cast<double>(1 + rng() % 3);  // keep powers tame
      t.nodes.push_back(c);
      nd.b = static_cast<int>(t.nodes.size()) - 1;
    } else if (nd.op == 'q') {
      // sqrt of a square keeps the domain safe
      const int inner = build(d - 2 < 0 ? 0 : d - 2);
      RefNode sq;
      sq.op = '*';
      sq.a = inner;
      sq.b = inner;
      t.nodes.push_back(sq);
      nd.a = static_cast<int>(t.nodes.size()) - 1;
    } else {
      nd.a = build(d - 1);
      if (nd.op == '+' || nd.op == '-' || nd.op == '*' || nd.op == '/' || nd.op == 'M' ||
          nd.op == 'm')
        nd.b = build(d - 1);
    }
    t.nodes.push_back(nd);
    return static_cast<int>(t.nodes.size()) - 1;
  };
  t.root = build(depth);
  return t;
}

}  // namespace

TEST_CASE("parse basics") {
  CHECK(Expression::parse("1").eval({}, 0.0) == doctest::Approx(1.0));
  const Expression e = Expression::parse("max(x1-0.5,0)^2");
  Vec x{0.25};
  CHECK(e.eval(x, 0.0) == doctest::Approx(0.0));
  x[0] = 0.75;
  CHECK(e.eval(x, 0.0) == doctest::Approx(0.0625));

  CHECK(Expression::parse("2+3*4").eval({}, 0) == doctest::Approx(14.0));
  CHECK(Expression::parse("2^3^2").eval({}, 0) == doctest::Approx(64.0));  // left-assoc
  CHECK(Expression::parse("-x1^2").eval(Vec{2.0}, 0) == doctest::Approx(-4.0));
  CHECK(Expression::parse("2*-3").eval({}, 0) == doctest::Approx(-6.0));
  CHECK(Expression::parse("pow(2,10)").eval({}, 0) == doctest::Approx(1024.0));
  CHECK(Expression::parse("u*u-1").eval({}, 3.0) == doctest::Approx(8.0));
}

TEST_CASE("parse errors carry byte offsets") {
  Expression::ParseError err;
  CHECK_FALSE(Expression::try_parse("x1*", &err).has_value());
  CHECK(err.offset == 3);

  CHECK_FALSE(Expression::try_parse("x1 + foo", &err).has_value());
  CHECK(err.offset == 5);
  CHECK(err.message.find("unknown identifier") != std::string::npos);

  CHECK_FALSE(Expression::try_parse("sin 3", &err).has_value());
  CHECK_FALSE(Expression::try_parse("(x1+1", &err).has_value());
  CHECK_FALSE(Expression::try_parse("x1 x2", &err).has_value());
  CHECK_THROWS_AS((void)Expression::parse("x1*"), Error);
}

TEST_CASE("located evaluation errors") {
  const Expression e = Expression::parse("1+sqrt(0-x1)");
  CHECK(e.eval(Vec{-4.0}, 0) == doctest::Approx(3.0));
  CHECK_THROWS_WITH_AS((void)e.eval(Vec{1.0}, 0), doctest::Contains("offset 2"), Error);
  const Expression d = Expression::parse("x1/(x2-1)");
  CHECK_THROWS_AS((void)d.eval(Vec{1.0, 1.0}, 0), Error);
}

TEST_CASE("printer is a fixed point and preserves values") {
  Rng rng(301);
  std::uniform_real_distribution<double> xdist(-2.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const RefTree t = random_tree(rng, 3, 1 + static_cast<int>(rng() % 4));
    const std::string text = t.render(t.root);
    const Expression e = Expression::parse(text);
    const std::string printed = e.print();
    const Expression e2 = Expression::parse(printed);
    CHECK(e2.print() == printed);
    for (int pt = 0; pt < 5; ++pt) {
      Vec x{xdist(rng), xdist(rng), xdist(rng)};
      const double u = xdist(rng);
      double ref;
      try {
        ref = t.eval(t.root, x, u);
      } catch (...) {
        continue;
      }
      if (!std::isfinite(ref)) continue;
      double got, got2;
      try {
        got = e.eval(x, u);
        got2 = e2.eval(x, u);
      } catch (const Error&) {
        continue;  // reference hit a domain edge the interpreter rejects
      }
      CHECK(got == doctest::Approx(ref).epsilon(1e-14));
      CHECK(got2 == doctest::Approx(ref).epsilon(1e-14));
    }
  }
}

TEST_CASE("derivatives agree with finite differences on smooth trees") {
  Rng rng(307);
  std::uniform_real_distribution<double> xdist(0.3, 1.7);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 200; ++trial) {
    const RefTree t = random_tree(rng, 2, 1 + static_cast<int>(rng() % 3));
    const std::string text = t.render(t.root);
    bool smooth = true;
    for (const RefNode& nd : t.nodes)
      if (nd.op == 'M' || nd.op == 'm' || nd.op == 'a') smooth = false;
    if (!smooth) continue;
    const Expression e = Expression::parse(text);
    Expression de = e.derivative(0);
    const Expression du = e.derivative(-1);
    const double h = 1e-6;
    for (int pt = 0; pt < 3; ++pt) {
      Vec x{xdist(rng), xdist(rng)};
      const double uval = xdist(rng);
      try {
        const double fd_x =
            (e.eval(Vec{x[0] + h, x[1]}, uval) - e.eval(Vec{x[0] - h, x[1]}, uval)) / (2 * h);
        const double fd_u = (e.eval(x, uval + h) - e.eval(x, uval - h)) / (2 * h);
        const double an_x = de.eval(x, uval);
        const double an_u = du.eval(x, uval);
        if (std::abs(fd_x) > 1e4 || std::abs(fd_u) > 1e4) continue;  // steep pow chains
        CHECK(an_x == doctest::Approx(fd_x).epsilon(5e-5).scale(1.0));
        CHECK(an_u == doctest::Approx(fd_u).epsilon(5e-5).scale(1.0));
        ++checked;
      } catch (const Error&) {
        continue;
      }
    }
  }
  CHECK(checked >= 100);

  CHECK_THROWS_AS((void)Expression::parse("max(x1,0)").derivative(0), Error);
  CHECK_THROWS_AS((void)Expression::parse("x1^x2").derivative(0), Error);
}

TEST_CASE("variable usage queries") {
  const Expression e = Expression::parse("x1+x3*u");
  CHECK(e.max_var() == 3);
  CHECK(e.uses_u());
  CHECK_FALSE(Expression::parse("x2").uses_u());
}

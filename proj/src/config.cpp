#include "dhl/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dhl/expression.hpp"

namespace dhl::cli {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    require(used == v.size(), ErrorKind::validation, "config: bad number for " + key);
    return x;
  } catch (const Error&) {
    throw;
  } catch (...) {
    fail(ErrorKind::validation, "config: bad number for " + key + ": '" + v + "'");
  }
}

long parse_int(const std::string& key, const std::string& v) {
  const double x = parse_number(key, v);
  require(std::nearbyint(x) == x, ErrorKind::validation, "config: expected integer for " + key);
  return static_cast<long>(x);
}

Vec parse_vec(const std::string& key, const std::string& v) {
  Vec out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
  require(!out.empty(), ErrorKind::validation, "config: empty list for " + key);
  return out;
}

std::vector<Vec> parse_points(const std::string& key, const std::string& v) {
  std::vector<Vec> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(parse_vec(key, t));
  }
  require(!out.empty(), ErrorKind::validation, "config: empty point list for " + key);
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const Vec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt(v[i]);
  }
  return s;
}

std::string fmt(const std::vector<Vec>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += "; ";
    s += fmt(pts[i]);
  }
  return s;
}

void check_expr(const std::string& key, const std::string& text, bool allow_u, int n) {
  expr::Expression::ParseError err;
  auto e = expr::Expression::try_parse(text, &err);
  require(e.has_value(), ErrorKind::validation,
          "config: " + key + ": syntax error at offset " + std::to_string(err.offset) +
              ": " + err.message);
  require(allow_u || !e->uses_u(), ErrorKind::validation,
          "config: " + key + " must not reference u");
  require(e->max_var() <= n, ErrorKind::validation,
          "config: " + key + " references x" + std::to_string(e->max_var()) +
              " beyond the dimension");
}

}  // namespace

void assign_config(RunConfig& c, const std::string& section, const std::string& key,
                   const std::string& value) {
  const std::string where = section + "." + key;
  if (section == "problem") {
    if (key == "kind") c.kind = value;
    else if (key == "n") c.n = static_cast<int>(parse_int(where, value));
    else if (key == "k") c.k = static_cast<int>(parse_int(where, value));
    else if (key == "f") c.f = value;
    else if (key == "phi") c.phi = value;
    else if (key == "usub") c.usub = value;
    else if (key == "domain") c.domain = value;
    else if (key == "center") c.center = parse_vec(where, value);
    else if (key == "radius") c.radius = parse_number(where, value);
    else if (key == "lo") c.lo = parse_vec(where, value);
    else if (key == "hi") c.hi = parse_vec(where, value);
    else if (key == "coeffs") c.coeffs = parse_vec(where, value);
    else if (key == "levelset") c.levelset = value;
    else if (key == "box_lo") c.box_lo = parse_vec(where, value);
    else if (key == "box_hi") c.box_hi = parse_vec(where, value);
    else if (key == "resolution") c.resolution = static_cast<int>(parse_int(where, value));
    else fail(ErrorKind::validation, "config: unknown key " + where);
  } else if (section == "solver") {
    if (key == "eps_schedule") {
      c.eps_schedule.clear();
      for (double v : parse_vec(where, value)) c.eps_schedule.push_back(v);
    } else if (key == "newton_tol_abs") c.newton_tol_abs = parse_number(where, value);
    else if (key == "newton_tol_rel") c.newton_tol_rel = parse_number(where, value);
    else if (key == "max_newton_iters") c.max_newton_iters = static_cast<int>(parse_int(where, value));
    else if (key == "damping_min") c.damping_min = parse_number(where, value);
    else if (key == "lm_shift") c.lm_shift = parse_number(where, value);
    else if (key == "theta0") c.theta0 = value;
    else if (key == "barrier_delta") c.barrier_delta = parse_number(where, value);
    else if (key == "rhs_mode") c.rhs_mode = value;
    else if (key == "jreg") c.jreg = parse_int(where, value);
    else fail(ErrorKind::validation, "config: unknown key " + where);
  } else if (section == "verify") {
    if (key == "alpha") c.alpha = value;
    else if (key == "hyperbolic_alpha") c.hyperbolic_alpha = parse_number(where, value);
    else if (key == "factor") c.factor = parse_number(where, value);
    else if (key == "pogorelov_c") c.pogorelov_c = value;
    else fail(ErrorKind::validation, "config: unknown key " + where);
  } else if (section == "geometry") {
    if (key == "expr") c.geometry_expr = value;
    else if (key == "points") c.geometry_points = parse_points(where, value);
    else fail(ErrorKind::validation, "config: unknown key " + where);
  } else if (section == "output") {
    if (key == "dir") c.out_dir = value;
    else fail(ErrorKind::validation, "config: unknown key " + where);
  } else {
    fail(ErrorKind::validation, "config: unknown section [" + section + "]");
  }
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig c;
  std::string section;
  std::size_t lineno = 0;
  std::stringstream ss{std::string(text)};
  std::string raw;
  while (std::getline(ss, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', ErrorKind::validation,
              "config: malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::validation,
            "config: expected key=value at line " + std::to_string(lineno));
    require(!section.empty(), ErrorKind::validation,
            "config: key outside any section at line " + std::to_string(lineno));
    assign_config(c, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), ErrorKind::io, "config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

std::string RunConfig::serialize() const {
  std::string s;
  s += "[problem]\n";
  s += "kind = " + kind + "\n";
  s += "n = " + std::to_string(n) + "\n";
  s += "k = " + std::to_string(k) + "\n";
  s += "f = " + f + "\n";
  s += "phi = " + phi + "\n";
  if (!usub.empty()) s += "usub = " + usub + "\n";
  s += "domain = " + domain + "\n";
  if (!center.empty()) s += "center = " + fmt(center) + "\n";
  s += "radius = " + fmt(radius) + "\n";
  if (!lo.empty()) s += "lo = " + fmt(lo) + "\n";
  if (!hi.empty()) s += "hi = " + fmt(hi) + "\n";
  if (!coeffs.empty()) s += "coeffs = " + fmt(coeffs) + "\n";
  if (!levelset.empty()) s += "levelset = " + levelset + "\n";
  if (!box_lo.empty()) s += "box_lo = " + fmt(box_lo) + "\n";
  if (!box_hi.empty()) s += "box_hi = " + fmt(box_hi) + "\n";
  s += "resolution = " + std::to_string(resolution) + "\n";
  s += "\n[solver]\n";
  Vec sched(eps_schedule.begin(), eps_schedule.end());
  s += "eps_schedule = " + fmt(sched) + "\n";
  s += "newton_tol_abs = " + fmt(newton_tol_abs) + "\n";
  s += "newton_tol_rel = " + fmt(newton_tol_rel) + "\n";
  s += "max_newton_iters = " + std::to_string(max_newton_iters) + "\n";
  s += "damping_min = " + fmt(damping_min) + "\n";
  s += "lm_shift = " + fmt(lm_shift) + "\n";
  s += "theta0 = " + theta0 + "\n";
  s += "barrier_delta = " + fmt(barrier_delta) + "\n";
  s += "rhs_mode = " + rhs_mode + "\n";
  s += "jreg = " + std::to_string(jreg) + "\n";
  s += "\n[verify]\n";
  s += "alpha = " + alpha + "\n";
  s += "hyperbolic_alpha = " + fmt(hyperbolic_alpha) + "\n";
  s += "factor = " + fmt(factor) + "\n";
  s += "pogorelov_c = " + pogorelov_c + "\n";
  if (!geometry_expr.empty() || !geometry_points.empty()) {
    s += "\n[geometry]\n";
    if (!geometry_expr.empty()) s += "expr = " + geometry_expr + "\n";
    if (!geometry_points.empty()) s += "points = " + fmt(geometry_points) + "\n";
  }
  s += "\n[output]\n";
  s += "dir = " + out_dir + "\n";
  return s;
}

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
  const std::size_t dotpos = dotted_key.find('.');
  require(dotpos != std::string::npos, ErrorKind::validation,
          "config override: expected section.key, got '" + dotted_key + "'");
  assign_config(*this, dotted_key.substr(0, dotpos), dotted_key.substr(dotpos + 1), value);
}

void RunConfig::validate() const {
  require(kind == "hessian" || kind == "curvature" || kind == "hyperbolic",
          ErrorKind::validation, "config: unknown kind '" + kind + "'");
  require(n >= 2 && n <= 3, ErrorKind::validation, "config: n must be 2 or 3");
  require(k >= 1 && k <= n, ErrorKind::validation,
          "config: k must satisfy 1 <= k <= n (got k=" + std::to_string(k) + ", n=" +
              std::to_string(n) + ")");
  require(k >= 2, ErrorKind::validation,
          "config: k = 1 (quasilinear case) is out of scope");
  require(!f.empty(), ErrorKind::validation, "config: problem.f is required");
  check_expr("problem.f", f, true, n);
  check_expr("problem.phi", phi, false, n);
  if (kind == "hyperbolic")
    require(!usub.empty(), ErrorKind::validation,
            "config: the hyperbolic kind requires problem.usub");
  if (!usub.empty()) check_expr("problem.usub", usub, false, n);

  if (domain == "rectangle") {
    require(static_cast<int>(lo.size()) == n && static_cast<int>(hi.size()) == n,
            ErrorKind::validation, "config: rectangle needs lo/hi of length n");
  } else if (domain == "disk") {
    require(center.empty() || static_cast<int>(center.size()) == n, ErrorKind::validation,
            "config: center must have length n");
    require(radius > 0.0, ErrorKind::validation, "config: radius must be positive");
  } else if (domain == "ellipsoid-section") {
    require(static_cast<int>(coeffs.size()) == n, ErrorKind::validation,
            "config: ellipsoid-section needs coeffs of length n");
    require(center.empty() || static_cast<int>(center.size()) == n, ErrorKind::validation,
            "config: center must have length n");
    require(radius > 0.0, ErrorKind::validation, "config: radius must be positive");
  } else if (domain == "sublevel") {
    require(!levelset.empty(), ErrorKind::validation, "config: sublevel needs levelset");
    check_expr("problem.levelset", levelset, false, n);
    require(static_cast<int>(box_lo.size()) == n && static_cast<int>(box_hi.size()) == n,
            ErrorKind::validation, "config: sublevel needs box_lo/box_hi of length n");
  } else {
    fail(ErrorKind::validation, "config: unknown domain '" + domain + "'");
  }
  require(resolution >= 9, ErrorKind::validation, "config: resolution must be >= 9");

  require(!eps_schedule.empty(), ErrorKind::validation, "config: empty eps_schedule");
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    require(eps_schedule[i] > 0.0, ErrorKind::validation,
            "config: eps_schedule values must be positive");
    if (i) require(eps_schedule[i] < eps_schedule[i - 1], ErrorKind::validation,
                   "config: eps_schedule must be strictly decreasing");
  }
  require(newton_tol_abs > 0.0 && newton_tol_rel > 0.0, ErrorKind::validation,
          "config: tolerances must be positive");
  require(max_newton_iters >= 1, ErrorKind::validation, "config: max_newton_iters >= 1");
  require(damping_min > 0.0 && damping_min < 1.0, ErrorKind::validation,
          "config: damping_min must lie in (0,1)");
  require(lm_shift >= 0.0, ErrorKind::validation, "config: lm_shift must be >= 0");
  if (theta0 != "auto")
    require(parse_number("solver.theta0", theta0) > 0.0, ErrorKind::validation,
            "config: theta0 must be positive or 'auto'");
  require(barrier_delta > 0.0, ErrorKind::validation, "config: barrier_delta > 0");
  require(rhs_mode == "feps" || rhs_mode == "raw" || rhs_mode == "jreg",
          ErrorKind::validation, "config: rhs_mode must be feps, raw or jreg");
  require(jreg >= 1, ErrorKind::validation, "config: jreg must be >= 1");

  if (alpha != "auto")
    require(parse_number("verify.alpha", alpha) >= 0.0, ErrorKind::validation,
            "config: alpha must be >= 0 or 'auto'");
  require(hyperbolic_alpha > 0.0, ErrorKind::validation, "config: hyperbolic_alpha > 0");
  require(factor >= 1.0, ErrorKind::validation, "config: factor must be >= 1");
  if (pogorelov_c != "auto")
    require(parse_number("verify.pogorelov_c", pogorelov_c) >= 0.0, ErrorKind::validation,
            "config: pogorelov_c must be >= 0 or 'auto'");

  if (!geometry_expr.empty()) check_expr("geometry.expr", geometry_expr, false, n);
  for (const Vec& p : geometry_points)
    require(static_cast<int>(p.size()) == n, ErrorKind::validation,
            "config: geometry points must have length n");
}

}  // namespace dhl::cli

#include "dhl/fd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>

namespace dhl::grid {

void StencilExpr::add(int col, double w) {
  for (int i = 0; i < count; ++i)
    if (taps[static_cast<std::size_t>(i)].col == col) {
      taps[static_cast<std::size_t>(i)].w += w;
      return;
    }
  require(count < static_cast<int>(taps.size()), ErrorKind::numeric, "StencilExpr overflow");
  taps[static_cast<std::size_t>(count++)] = {col, w};
}

double StencilExpr::eval(std::span<const double> u) const {
  double s = c;
  for (int i = 0; i < count; ++i)
    s += taps[static_cast<std::size_t>(i)].w * u[static_cast<std::size_t>(taps[static_cast<std::size_t>(i)].col)];
  return s;
}

namespace {

constexpr double kArmFloor = 0.05;  // below this the ghost degenerates to the datum

struct CrossChoice {
  enum class Shape { symmetric, corner, none } shape = Shape::none;
  int sa = 1;
  int sb = 1;
};

int diag_node(const Grid& g, int node, int a, int sa, int b, int sb) {
  return g.neighbor(g.neighbor(node, a, sa), b, sb);
}

CrossChoice choose_cross_field(const Grid& g, int node, int a, int b) {
  bool all = true;
  for (int sa = -1; sa <= 1 && all; sa += 2)
    for (int sb = -1; sb <= 1; sb += 2)
      if (!g.in_mask(diag_node(g, node, a, sa, b, sb))) {
        all = false;
        break;
      }
  if (all) return {CrossChoice::Shape::symmetric, 1, 1};
  constexpr int order[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (const auto& s : order)
    if (g.in_mask(diag_node(g, node, a, s[0], b, s[1])))
      return {CrossChoice::Shape::corner, s[0], s[1]};
  return {};
}

CrossChoice choose_cross_dirichlet(const Grid& g, int node, int a, int b) {
  auto usable_sym = [&](int q) {
    return g.node_class(q) == NodeClass::interior ||
           (g.node_class(q) == NodeClass::boundary && g.boundary_exact(q));
  };
  bool all = true;
  for (int sa = -1; sa <= 1 && all; sa += 2)
    for (int sb = -1; sb <= 1; sb += 2)
      if (!usable_sym(diag_node(g, node, a, sa, b, sb))) {
        all = false;
        break;
      }
  if (all) return {CrossChoice::Shape::symmetric, 1, 1};

  auto score_of = [&](int q) {
    if (g.node_class(q) == NodeClass::interior) return 2;
    if (g.node_class(q) == NodeClass::boundary) return g.boundary_exact(q) ? 1 : 0;
    return -100;  // unusable
  };
  constexpr int order[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  int best = -1, best_score = -1;
  for (int i = 0; i < 4; ++i) {
    const int sa = order[i][0], sb = order[i][1];
    const int dq = diag_node(g, node, a, sa, b, sb);
    if (!g.in_mask(dq)) continue;
    const int score = score_of(dq) + score_of(g.neighbor(node, a, sa)) +
                      score_of(g.neighbor(node, b, sb));
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  if (best < 0) return {};
  return {CrossChoice::Shape::corner, order[best][0], order[best][1]};
}

double field_value(const ScalarField& f, int node) { return f[node]; }

/// Dirichlet-mode value of the axis neighbor reached by the arm (axis, side):
/// the unknown itself for interior neighbors, otherwise the linear
/// extrapolation of (center value, crossing datum) to the neighbor's
/// position. Crossings hugging the center node would blow the 1/t weight up,
/// so those extrapolate through the opposite arm instead.
void ghost_expr(const Grid& g, int interior_idx, int axis, int side, StencilExpr* e,
                double weight) {
  const Arm& arm = g.arm(interior_idx, axis, side);
  if (!arm.to_boundary) {
    e->add(g.interior_index(arm.neighbor), weight);
    return;
  }
  const double t = arm.t;
  if (t >= kArmFloor) {
    e->add_const(weight * arm.value / t);
    e->add(interior_idx, weight * (1.0 - 1.0 / t));
    return;
  }
  // ghost = 2/(1+t) * value - (1-t)/(1+t) * u_opposite
  const double wv = weight * 2.0 / (1.0 + t);
  const double wo = -weight * (1.0 - t) / (1.0 + t);
  e->add_const(wv * arm.value);
  const Arm& opp = g.arm(interior_idx, axis, 1 - side);
  if (!opp.to_boundary) {
    e->add(g.interior_index(opp.neighbor), wo);
  } else if (opp.t >= kArmFloor) {
    e->add_const(wo * opp.value / opp.t);
    e->add(interior_idx, wo * (1.0 - 1.0 / opp.t));
  } else {
    e->add_const(wo * opp.value);  // pinched sliver: both crossings at the node
  }
}

/// Dirichlet-mode value at an arbitrary mask node seen from interior node
/// `node` (used by corner stencils): unknown, or nodal collocation datum.
void point_expr(const Grid& g, int q, StencilExpr* e, double weight) {
  if (g.node_class(q) == NodeClass::interior)
    e->add(g.interior_index(q), weight);
  else
    e->add_const(weight * g.boundary_value(q));
}

}  // namespace

SymMatrix hessian_at(const ScalarField& f, int interior_idx) {
  const Grid& g = *f.grid;
  const int d = g.dim();
  const int node = g.interior_nodes()[static_cast<std::size_t>(interior_idx)];
  const double h = g.spacing();
  const double h2 = h * h;
  SymMatrix out(d);
  for (int a = 0; a < d; ++a) {
    const double up = field_value(f, g.neighbor(node, a, +1));
    const double dn = field_value(f, g.neighbor(node, a, -1));
    out.set(a, a, (up - 2.0 * field_value(f, node) + dn) / h2);
  }
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const CrossChoice cc = choose_cross_field(g, node, a, b);
      double v = 0.0;
      if (cc.shape == CrossChoice::Shape::symmetric) {
        v = (field_value(f, diag_node(g, node, a, +1, b, +1)) -
             field_value(f, diag_node(g, node, a, +1, b, -1)) -
             field_value(f, diag_node(g, node, a, -1, b, +1)) +
             field_value(f, diag_node(g, node, a, -1, b, -1))) / (4.0 * h2);
      } else if (cc.shape == CrossChoice::Shape::corner) {
        v = (field_value(f, diag_node(g, node, a, cc.sa, b, cc.sb)) -
             field_value(f, g.neighbor(node, a, cc.sa)) -
             field_value(f, g.neighbor(node, b, cc.sb)) + field_value(f, node)) /
            (cc.sa * cc.sb * h2);
      }
      out.set(a, b, v);
    }
  return out;
}

Vec gradient_at(const ScalarField& f, int interior_idx) {
  const Grid& g = *f.grid;
  const int d = g.dim();
  const int node = g.interior_nodes()[static_cast<std::size_t>(interior_idx)];
  Vec out(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a)
    out[static_cast<std::size_t>(a)] =
        (field_value(f, g.neighbor(node, a, +1)) - field_value(f, g.neighbor(node, a, -1))) /
        (2.0 * g.spacing());
  return out;
}

std::vector<SymMatrix> hessian_central(const ScalarField& f) {
  require(f.grid != nullptr, ErrorKind::argument, "hessian_central: missing grid");
  std::vector<SymMatrix> out(static_cast<std::size_t>(f.grid->interior_count()));
  for (int i = 0; i < f.grid->interior_count(); ++i) out[static_cast<std::size_t>(i)] = hessian_at(f, i);
  return out;
}

std::vector<Vec> gradient_central(const ScalarField& f) {
  require(f.grid != nullptr, ErrorKind::argument, "gradient_central: missing grid");
  std::vector<Vec> out(static_cast<std::size_t>(f.grid->interior_count()));
  for (int i = 0; i < f.grid->interior_count(); ++i) out[static_cast<std::size_t>(i)] = gradient_at(f, i);
  return out;
}

StencilExpr dirichlet_d2(const Grid& g, int interior_idx, int a, int b) {
  const int node = g.interior_nodes()[static_cast<std::size_t>(interior_idx)];
  const double h2 = g.spacing() * g.spacing();
  StencilExpr e;
  if (a == b) {
    ghost_expr(g, interior_idx, a, 1, &e, 1.0 / h2);
    ghost_expr(g, interior_idx, a, 0, &e, 1.0 / h2);
    e.add(interior_idx, -2.0 / h2);
    return e;
  }
  const int lo = std::min(a, b), hi = std::max(a, b);
  const CrossChoice cc = choose_cross_dirichlet(g, node, lo, hi);
  if (cc.shape == CrossChoice::Shape::symmetric) {
    for (int sa = -1; sa <= 1; sa += 2)
      for (int sb = -1; sb <= 1; sb += 2)
        point_expr(g, diag_node(g, node, lo, sa, hi, sb), &e, sa * sb / (4.0 * h2));
  } else if (cc.shape == CrossChoice::Shape::corner) {
    const double w = 1.0 / (cc.sa * cc.sb * h2);
    point_expr(g, diag_node(g, node, lo, cc.sa, hi, cc.sb), &e, w);
    ghost_expr(g, interior_idx, lo, cc.sa > 0 ? 1 : 0, &e, -w);
    ghost_expr(g, interior_idx, hi, cc.sb > 0 ? 1 : 0, &e, -w);
    e.add(interior_idx, w);
  }
  return e;
}

StencilExpr dirichlet_d1(const Grid& g, int interior_idx, int a) {
  StencilExpr e;
  const double w = 1.0 / (2.0 * g.spacing());
  ghost_expr(g, interior_idx, a, 1, &e, w);
  ghost_expr(g, interior_idx, a, 0, &e, -w);
  return e;
}

SymMatrix dirichlet_hessian_at(const Grid& g, std::span<const double> u, int interior_idx) {
  const int d = g.dim();
  SymMatrix out(d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b)
      out.set(a, b, dirichlet_d2(g, interior_idx, a, b).eval(u));
  return out;
}

Vec dirichlet_gradient_at(const Grid& g, std::span<const double> u, int interior_idx) {
  const int d = g.dim();
  Vec out(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a)
    out[static_cast<std::size_t>(a)] = dirichlet_d1(g, interior_idx, a).eval(u);
  return out;
}

ScalarField distance_field(const GridPtr& gp) {
  const Grid& g = *gp;
  const int n = g.node_count();
  const int d = g.dim();
  std::vector<int> seed(static_cast<std::size_t>(n), -1);
  std::vector<double> dist2(static_cast<std::size_t>(n), 1e300);
  std::vector<Vec> pos(static_cast<std::size_t>(n));
  for (int id = 0; id < n; ++id)
    if (g.in_mask(id)) pos[static_cast<std::size_t>(id)] = g.position(id);
  for (const BoundaryNode& b : g.boundary_nodes()) {
    seed[static_cast<std::size_t>(b.node)] = b.node;
    dist2[static_cast<std::size_t>(b.node)] = 0.0;
  }

  std::vector<int> coords(static_cast<std::size_t>(d));
  auto relax_from = [&](int id, int q) {
    const int s = seed[static_cast<std::size_t>(q)];
    if (s < 0) return false;
    double d2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double diff = pos[static_cast<std::size_t>(id)][static_cast<std::size_t>(a)] -
                          pos[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
      d2 += diff * diff;
    }
    if (d2 < dist2[static_cast<std::size_t>(id)] - 1e-300) {
      dist2[static_cast<std::size_t>(id)] = d2;
      seed[static_cast<std::size_t>(id)] = s;
      return true;
    }
    return false;
  };

  bool changed = true;
  for (int round = 0; round < 8 && changed; ++round) {
    changed = false;
    for (int sweep = 0; sweep < 2; ++sweep) {
      const bool forward = sweep == 0;
      for (int step = 0; step < n; ++step) {
        const int id = forward ? step : n - 1 - step;
        if (!g.in_mask(id)) continue;
        g.node_coords(id, coords);
        // all lattice neighbors in the one-cell box
        std::vector<int> off(static_cast<std::size_t>(d), -1);
        for (;;) {
          bool zero = true, ok = true;
          int q = id;
          int stride = 1;
          for (int a = 0; a < d; ++a) {
            const int c = coords[static_cast<std::size_t>(a)] + off[static_cast<std::size_t>(a)];
            if (off[static_cast<std::size_t>(a)] != 0) zero = false;
            if (c < 0 || c >= g.dims()[static_cast<std::size_t>(a)]) ok = false;
            q += off[static_cast<std::size_t>(a)] * stride;
            stride *= g.dims()[static_cast<std::size_t>(a)];
          }
          if (!zero && ok && g.in_mask(q)) changed |= relax_from(id, q);
          int a = 0;
          for (; a < d; ++a) {
            if (off[static_cast<std::size_t>(a)] < 1) {
              ++off[static_cast<std::size_t>(a)];
              break;
            }
            off[static_cast<std::size_t>(a)] = -1;
          }
          if (a == d) break;
        }
      }
    }
  }

  ScalarField f;
  f.grid = gp;
  f.values.assign(static_cast<std::size_t>(n), 0.0);
  for (int id = 0; id < n; ++id)
    if (g.in_mask(id))
      f.values[static_cast<std::size_t>(id)] = std::sqrt(dist2[static_cast<std::size_t>(id)]);
  return f;
}

void write_field_csv(const ScalarField& f, std::ostream& os) {
  const Grid& g = *f.grid;
  char buf[64];
  for (int id = 0; id < g.node_count(); ++id) {
    if (!g.in_mask(id)) continue;
    const Vec x = g.position(id);
    std::string line;
    for (double xi : x) {
      std::snprintf(buf, sizeof buf, "%.17g", xi);
      line += buf;
      line += ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", f[id]);
    line += buf;
    line += '\n';
    os << line;
  }
}

namespace {
constexpr char kFieldMagic[8] = {'D', 'H', 'L', 'F', 'L', 'D', '0', '1'};

void put_le_double(std::ostream& os, double v) {
  unsigned char b[8];
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_le_double(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}
}  // namespace

void write_field_binary(const ScalarField& f, std::ostream& os) {
  os.write(kFieldMagic, 8);
  for (double v : f.values) put_le_double(os, v);
}

ScalarField read_field_binary(GridPtr g, std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  require(is.good() && std::memcmp(magic, kFieldMagic, 8) == 0, ErrorKind::io,
          "field read: bad magic header");
  ScalarField f;
  f.grid = g;
  f.values.assign(static_cast<std::size_t>(g->node_count()), 0.0);
  for (double& v : f.values) v = get_le_double(is);
  require(is.good(), ErrorKind::io, "field read: truncated data");
  return f;
}

void write_field_csv_file(const ScalarField& f, const std::string& path) {
  std::ofstream os(path);
  require(os.good(), ErrorKind::io, "cannot open " + path);
  write_field_csv(f, os);
}

void write_field_binary_file(const ScalarField& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), ErrorKind::io, "cannot open " + path);
  write_field_binary(f, os);
}

ScalarField read_field_binary_file(GridPtr g, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorKind::io, "cannot open " + path);
  return read_field_binary(std::move(g), is);
}

}  // namespace dhl::grid

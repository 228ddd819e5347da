#include "dhl/grid.hpp"

#include <algorithm>
#include <cmath>

namespace dhl::grid {

Domain Domain::rectangle(Vec lo, Vec hi) {
  require(lo.size() == hi.size() && !lo.empty() && lo.size() <= 3, ErrorKind::argument,
          "rectangle: bad corner vectors");
  for (std::size_t i = 0; i < lo.size(); ++i)
    require(lo[i] < hi[i], ErrorKind::argument, "rectangle: empty extent");
  Domain d;
  d.kind_ = Kind::rectangle;
  d.bounds_ = {lo, hi};
  return d;
}

Domain Domain::disk(Vec center, double radius) {
  require(!center.empty() && center.size() <= 3 && radius > 0.0, ErrorKind::argument,
          "disk: bad parameters");
  Domain d;
  d.kind_ = Kind::disk;
  d.center_ = center;
  d.radius_ = radius;
  Vec lo(center), hi(center);
  for (std::size_t i = 0; i < center.size(); ++i) {
    lo[i] -= radius;
    hi[i] += radius;
  }
  d.bounds_ = {lo, hi};
  return d;
}

Domain Domain::ellipsoid_section(Vec center, Vec coeffs, double radius) {
  require(!center.empty() && center.size() == coeffs.size() && radius > 0.0,
          ErrorKind::argument, "ellipsoid_section: bad parameters");
  for (double c : coeffs)
    require(c > 0.0, ErrorKind::argument, "ellipsoid_section: coefficients must be positive");
  Domain d;
  d.kind_ = Kind::ellipsoid_section;
  d.center_ = center;
  d.coeffs_ = coeffs;
  d.radius_ = radius;
  Vec lo(center), hi(center);
  for (std::size_t i = 0; i < center.size(); ++i) {
    const double semi = radius / std::sqrt(coeffs[i]);
    lo[i] -= semi;
    hi[i] += semi;
  }
  d.bounds_ = {lo, hi};
  return d;
}

Domain Domain::sublevel(ScalarFn level, Box bounds) {
  require(static_cast<bool>(level), ErrorKind::argument, "sublevel: missing level function");
  require(bounds.lo.size() == bounds.hi.size() && !bounds.lo.empty() && bounds.lo.size() <= 3,
          ErrorKind::argument, "sublevel: bad bounding box");
  Domain d;
  d.kind_ = Kind::sublevel;
  d.level_ = std::move(level);
  d.bounds_ = std::move(bounds);
  return d;
}

bool Domain::inside(std::span<const double> x) const {
  switch (kind_) {
    case Kind::rectangle: {
      for (std::size_t i = 0; i < bounds_.lo.size(); ++i)
        if (!(x[i] > bounds_.lo[i] && x[i] < bounds_.hi[i])) return false;
      return true;
    }
    case Kind::disk: {
      double s = 0.0;
      for (std::size_t i = 0; i < center_.size(); ++i) {
        const double d = x[i] - center_[i];
        s += d * d;
      }
      return s < radius_ * radius_;
    }
    case Kind::ellipsoid_section: {
      double s = 0.0;
      for (std::size_t i = 0; i < center_.size(); ++i) {
        const double d = x[i] - center_[i];
        s += coeffs_[i] * d * d;
      }
      return s < radius_ * radius_;
    }
    case Kind::sublevel:
      return level_(x) > 0.0;
  }
  return false;
}

Vec Grid::position(int node) const {
  Vec x(static_cast<std::size_t>(dim_));
  int rest = node;
  for (int a = 0; a < dim_; ++a) {
    const int i = rest % dims_[static_cast<std::size_t>(a)];
    rest /= dims_[static_cast<std::size_t>(a)];
    x[static_cast<std::size_t>(a)] = origin_[static_cast<std::size_t>(a)] + h_ * i;
  }
  return x;
}

void Grid::node_coords(int node, std::span<int> out) const {
  int rest = node;
  for (int a = 0; a < dim_; ++a) {
    out[static_cast<std::size_t>(a)] = rest % dims_[static_cast<std::size_t>(a)];
    rest /= dims_[static_cast<std::size_t>(a)];
  }
}

int Grid::node_id(std::span<const int> coords) const {
  int id = 0;
  for (int a = dim_ - 1; a >= 0; --a)
    id = id * dims_[static_cast<std::size_t>(a)] + coords[static_cast<std::size_t>(a)];
  return id;
}

int Grid::neighbor(int node, int axis, int dir) const {
  int stride = 1;
  for (int a = 0; a < axis; ++a) stride *= dims_[static_cast<std::size_t>(a)];
  return node + dir * stride;
}

const Arm& Grid::arm(int interior_idx, int axis, int side) const {
  return arms_[static_cast<std::size_t>(interior_idx) * (2 * dim_) + 2 * axis + side];
}

namespace {

/// Crossing fraction of the domain boundary along [from, to]; `from` is
/// strictly inside, `to` is not. Bisection keeps the result deterministic.
double crossing_fraction(const Domain& dom, const Vec& from, const Vec& to) {
  double lo = 0.0, hi = 1.0;
  Vec mid(from.size());
  for (int it = 0; it < 50; ++it) {
    const double m = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < from.size(); ++i) mid[i] = from[i] + m * (to[i] - from[i]);
    if (dom.inside(mid))
      lo = m;
    else
      hi = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

class GridBuilder {
 public:
  static Grid shell(int dim, double h, std::vector<int> dims, Vec origin) {
    Grid g;
    g.dim_ = dim;
    g.h_ = h;
    g.dims_ = std::move(dims);
    g.origin_ = std::move(origin);
    g.node_count_ = 1;
    for (int d : g.dims_) g.node_count_ *= d;
    g.cls_.assign(static_cast<std::size_t>(g.node_count_), NodeClass::outside);
    g.interior_index_.assign(static_cast<std::size_t>(g.node_count_), -1);
    g.bvalue_.assign(static_cast<std::size_t>(g.node_count_), 0.0);
    g.bexact_.assign(static_cast<std::size_t>(g.node_count_), 0);
    return g;
  }

  /// Classifies boundary candidates around the interior set, fills the
  /// interior index, arms and cross-stencil cleanliness flags. `mask_inside`
  /// tells whether a node belongs to the (pre-band) inside set; `arm_data`
  /// supplies (t, value, exact) for an interior->boundary arm.
  struct ArmDatum {
    double t = 1.0;
    double value = 0.0;
    bool exact = false;
  };
  using ArmFn = std::function<ArmDatum(int interior_node, int boundary_node, int axis, int dir)>;
  using ValueFn = std::function<double(int boundary_node)>;
  // whether the boundary node seen diagonally from an interior node sits on
  // the true boundary (its nodal datum is then exact)
  using ExactFn = std::function<bool(int interior_node, int boundary_node)>;

  static void assemble(Grid& g, const std::vector<std::uint8_t>& inside,
                       const ValueFn& nodal_value, const ArmFn& arm_data,
                       const ExactFn& diag_exact) {
    const int d = g.dim_;
    std::vector<int> coords(static_cast<std::size_t>(d));

    // interior = inside nodes off the lattice edge
    for (int id = 0; id < g.node_count_; ++id) {
      if (!inside[static_cast<std::size_t>(id)]) continue;
      g.node_coords(id, coords);
      bool edge = false;
      for (int a = 0; a < d; ++a)
        if (coords[static_cast<std::size_t>(a)] == 0 ||
            coords[static_cast<std::size_t>(a)] == g.dims_[static_cast<std::size_t>(a)] - 1)
          edge = true;
      if (edge) continue;
      g.cls_[static_cast<std::size_t>(id)] = NodeClass::interior;
    }

    // boundary = non-interior nodes within one cell (any diagonal offset) of
    // an interior node; diagonal reach keeps cross stencils supplied
    for (int id = 0; id < g.node_count_; ++id) {
      if (g.cls_[static_cast<std::size_t>(id)] != NodeClass::interior) continue;
      g.node_coords(id, coords);
      std::vector<int> nb(coords.begin(), coords.end());
      // enumerate {-1,0,1}^d offsets
      std::vector<int> off(static_cast<std::size_t>(d), -1);
      for (;;) {
        bool all_zero = true;
        for (int a = 0; a < d; ++a) {
          nb[static_cast<std::size_t>(a)] = coords[static_cast<std::size_t>(a)] + off[static_cast<std::size_t>(a)];
          if (off[static_cast<std::size_t>(a)] != 0) all_zero = false;
        }
        if (!all_zero) {
          const int q = g.node_id(nb);
          if (g.cls_[static_cast<std::size_t>(q)] == NodeClass::outside)
            g.cls_[static_cast<std::size_t>(q)] = NodeClass::boundary;
        }
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

    for (int id = 0; id < g.node_count_; ++id) {
      if (g.cls_[static_cast<std::size_t>(id)] == NodeClass::interior) {
        g.interior_index_[static_cast<std::size_t>(id)] = static_cast<int>(g.interior_nodes_.size());
        g.interior_nodes_.push_back(id);
      } else if (g.cls_[static_cast<std::size_t>(id)] == NodeClass::boundary) {
        const double v = nodal_value(id);
        g.bvalue_[static_cast<std::size_t>(id)] = v;
        g.boundary_nodes_.push_back({id, v});
      }
    }
    require(!g.interior_nodes_.empty(), ErrorKind::domain, "grid: empty interior");

    g.arms_.assign(g.interior_nodes_.size() * static_cast<std::size_t>(2 * d), Arm{});
    g.clean_.assign(g.interior_nodes_.size(), 1);
    for (std::size_t ii = 0; ii < g.interior_nodes_.size(); ++ii) {
      const int id = g.interior_nodes_[ii];
      for (int a = 0; a < d; ++a)
        for (int side = 0; side < 2; ++side) {
          const int dir = side == 0 ? -1 : +1;
          const int q = g.neighbor(id, a, dir);
          Arm& arm = g.arms_[ii * static_cast<std::size_t>(2 * d) + static_cast<std::size_t>(2 * a + side)];
          arm.neighbor = q;
          if (g.cls_[static_cast<std::size_t>(q)] == NodeClass::interior) {
            arm.to_boundary = false;
          } else {
            arm.to_boundary = true;
            const ArmDatum ad = arm_data(id, q, a, dir);
            arm.t = ad.t;
            arm.value = ad.value;
            if (ad.exact) g.bexact_[static_cast<std::size_t>(q)] = 1;
          }
        }
      // cleanliness: every diagonal pair node carries a value; exactness of
      // diagonal boundary nodes feeds the cross-stencil selection
      g.node_coords(id, coords);
      std::vector<int> nb(coords.begin(), coords.end());
      for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
          for (int sa = -1; sa <= 1; sa += 2)
            for (int sb = -1; sb <= 1; sb += 2) {
              nb.assign(coords.begin(), coords.end());
              nb[static_cast<std::size_t>(a)] += sa;
              nb[static_cast<std::size_t>(b)] += sb;
              const int q = g.node_id(nb);
              if (!g.in_mask(q)) {
                g.clean_[ii] = 0;
              } else if (g.cls_[static_cast<std::size_t>(q)] == NodeClass::boundary &&
                         !g.bexact_[static_cast<std::size_t>(q)] && diag_exact(id, q)) {
                g.bexact_[static_cast<std::size_t>(q)] = 1;
              }
            }
    }
  }
};

GridPtr build_grid(const Domain& dom, int resolution, const ScalarFn& phi) {
  require(resolution >= 9, ErrorKind::argument, "build_grid: resolution must be >= 9");
  require(static_cast<bool>(phi), ErrorKind::argument, "build_grid: missing boundary data");
  const Box& box = dom.bounds();
  const int d = dom.dim();
  const double h = (box.hi[0] - box.lo[0]) / (resolution - 1);
  std::vector<int> dims(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a)
    dims[static_cast<std::size_t>(a)] =
        static_cast<int>(std::lround((box.hi[static_cast<std::size_t>(a)] -
                                      box.lo[static_cast<std::size_t>(a)]) / h)) + 1;
  Grid g = GridBuilder::shell(d, h, dims, box.lo);

  std::vector<std::uint8_t> inside(static_cast<std::size_t>(g.node_count()), 0);
  for (int id = 0; id < g.node_count(); ++id)
    inside[static_cast<std::size_t>(id)] = dom.inside(g.position(id)) ? 1 : 0;

  auto nodal_value = [&](int node) { return phi(g.position(node)); };
  auto arm_data = [&](int p, int q, int axis, int dir) {
    (void)axis;
    (void)dir;
    GridBuilder::ArmDatum ad;
    const Vec from = g.position(p);
    const Vec to = g.position(q);
    ad.t = crossing_fraction(dom, from, to);
    Vec cross(from.size());
    for (std::size_t i = 0; i < from.size(); ++i)
      cross[i] = from[i] + ad.t * (to[i] - from[i]);
    ad.value = phi(cross);
    ad.exact = ad.t >= 1.0 - 1e-9;
    return ad;
  };
  auto diag_exact = [&](int p, int q) {
    return crossing_fraction(dom, g.position(p), g.position(q)) >= 1.0 - 1e-9;
  };
  GridBuilder::assemble(g, inside, nodal_value, arm_data, diag_exact);
  return std::make_shared<Grid>(std::move(g));
}

ScalarField make_field(GridPtr grid, const ScalarFn& fn) {
  ScalarField f;
  f.grid = grid;
  f.values.assign(static_cast<std::size_t>(grid->node_count()), 0.0);
  for (int id = 0; id < grid->node_count(); ++id)
    if (grid->in_mask(id)) f.values[static_cast<std::size_t>(id)] = fn(grid->position(id));
  return f;
}

ScalarField constant_field(GridPtr grid, double value) {
  ScalarField f;
  f.grid = grid;
  f.values.assign(static_cast<std::size_t>(grid->node_count()), 0.0);
  for (int id = 0; id < grid->node_count(); ++id)
    if (grid->in_mask(id)) f.values[static_cast<std::size_t>(id)] = value;
  return f;
}

LevelSet level_set_domain(const ScalarField& usub, double eps) {
  require(usub.grid != nullptr, ErrorKind::argument, "level_set_domain: missing grid");
  require(eps > 0.0, ErrorKind::argument, "level_set_domain: eps must be positive");
  const Grid& g = *usub.grid;
  LevelSet ls;
  ls.eps = eps;
  ls.mask.assign(static_cast<std::size_t>(g.node_count()), 0);
  int count = 0;
  for (int id = 0; id < g.node_count(); ++id)
    if (g.in_mask(id) && usub[id] > eps) {
      ls.mask[static_cast<std::size_t>(id)] = 1;
      ++count;
    }
  require(count > 0, ErrorKind::domain, "level_set_domain: empty interior");

  std::vector<int> coords(static_cast<std::size_t>(g.dim()));
  for (int id = 0; id < g.node_count(); ++id) {
    if (!ls.mask[static_cast<std::size_t>(id)]) continue;
    g.node_coords(id, coords);
    bool rim = false;
    for (int a = 0; a < g.dim() && !rim; ++a) {
      if (coords[static_cast<std::size_t>(a)] == 0 ||
          coords[static_cast<std::size_t>(a)] == g.dims()[static_cast<std::size_t>(a)] - 1) {
        rim = true;
        break;
      }
      for (int dir = -1; dir <= 1; dir += 2)
        if (!ls.mask[static_cast<std::size_t>(g.neighbor(id, a, dir))]) {
          rim = true;
          break;
        }
    }
    if (rim) ls.band.push_back(id);
  }
  return ls;
}

GridPtr build_level_set_grid(const ScalarField& usub, double eps) {
  const LevelSet ls = level_set_domain(usub, eps);
  const Grid& base = *usub.grid;

  Grid g = GridBuilder::shell(base.dim(), base.spacing(),
                              base.dims(), base.origin());
  auto nodal_value = [&](int) { return eps; };
  // crossing of {usub = eps} from nodal interpolation along the arm
  auto arm_data = [&](int p, int q, int, int) {
    GridBuilder::ArmDatum ad;
    const double up = usub[p];
    const double uq = usub[q];
    ad.t = up > uq ? std::clamp((up - eps) / (up - uq), 0.0, 1.0) : 1.0;
    ad.value = eps;
    ad.exact = ad.t >= 1.0 - 1e-9;
    return ad;
  };
  auto diag_exact = [&](int, int q) { return eps - usub[q] <= 1e-12; };
  GridBuilder::assemble(g, ls.mask, nodal_value, arm_data, diag_exact);
  return std::make_shared<Grid>(std::move(g));
}

}  // namespace dhl::grid

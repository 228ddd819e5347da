#include <doctest.h>

#include <cmath>

#include "dhl/graph_geometry.hpp"
#include "dhl/hyperbolic_geometry.hpp"
#include "support/test_support.hpp"

using namespace dhl;
using dhl::test::Rng;

namespace {

graph::Jet2 random_jet(Rng& rng, int n, double grad_scale = 1.5, double hess_scale = 2.0) {
  graph::Jet2 jet;
  jet.u = test::random_vec(rng, 1, -1.0, 1.0)[0];
  jet.du = test::random_vec(rng, n, -grad_scale, grad_scale);
  jet.d2u = test::random_symmetric(rng, n, hess_scale);
  return jet;
}

/// sigma_k of the eigenvalues of a general (non-symmetric) matrix from the
/// trace recurrence; independent of the eigen path under test.
double sigma_from_traces(const Mat& m, int k) {
  const int n = m.n();
  Mat t = Mat::identity(n);
  double sig = 1.0;
  for (int step = 1; step <= k; ++step) {
    Mat mt = mul(m, t);
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += mt(i, i);
    sig = tr / step;
    t = Mat(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) t(i, j) = -mt(i, j);
      t(i, i) += sig;
    }
  }
  return sig;
}

}  // namespace

TEST_CASE("graph_frame closed forms") {
  {
    graph::Jet2 jet{0.3, Vec{0, 0}, SymMatrix::identity(2)};
    const graph::Frame fr = graph::graph_frame(jet);
    CHECK(fr.w == doctest::Approx(1.0));
    CHECK(fr.gamma_up(0, 0) == doctest::Approx(1.0));
    CHECK(fr.gamma_up(0, 1) == doctest::Approx(0.0));
    CHECK(fr.normal[0] == doctest::Approx(0.0));
    CHECK(fr.normal[2] == doctest::Approx(1.0));
  }
  {
    graph::Jet2 jet{0.0, Vec{3.0 / 5, 4.0 / 5}, SymMatrix(2)};  // |du| = 1
    const graph::Frame fr = graph::graph_frame(jet);
    CHECK(fr.w == doctest::Approx(std::sqrt(2.0)));
    CHECK(fr.v == doctest::Approx(1.0 / std::sqrt(2.0)));
  }
}

TEST_CASE("graph_frame invariants on random jets") {
  Rng rng(101);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const graph::Jet2 jet = random_jet(rng, n);
    const graph::Frame fr = graph::graph_frame(jet);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double prod = 0.0, sq = 0.0;
        for (int l = 0; l < n; ++l) {
          prod += fr.gamma_up(i, l) * fr.gamma_down(l, j);
          sq += fr.gamma_down(i, l) * fr.gamma_down(l, j);
        }
        CHECK(prod == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
        CHECK(sq == doctest::Approx(fr.metric(i, j)).epsilon(1e-12).scale(1.0));
      }
    CHECK(norm2(fr.normal) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fr.normal.back() == doctest::Approx(fr.v));
  }
}

TEST_CASE("curvature_matrix closed forms") {
  {
    // flat gradient: a equals the Hessian
    graph::Jet2 jet{0.0, Vec{0, 0}, SymMatrix::diagonal(Vec{2, -1})};
    const graph::CurvatureData cd = graph::curvature_matrix(jet, 1);
    CHECK(cd.a(0, 0) == doctest::Approx(2.0));
    CHECK(cd.a(1, 1) == doctest::Approx(-1.0));
    CHECK(cd.kappa.values[0] == doctest::Approx(2.0));
    CHECK(cd.kappa.values[1] == doctest::Approx(-1.0));
  }
  {
    // lower hemisphere of radius R: all curvatures 1/R
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 2);
      const double R = 1.0 + (trial % 3);
      Vec x = test::random_vec(rng, n, -0.4 * R, 0.4 * R);
      const graph::CurvatureData cd = graph::curvature_matrix(test::hemisphere_jet(x, R), n);
      for (double kv : cd.kappa.values)
        CHECK(kv == doctest::Approx(1.0 / R).epsilon(1e-10));
      CHECK(cd.cone.label == sym::ConeLabel::interior);
    }
  }
  {
    // plane: kappa = 0, boundary of every cone
    graph::Jet2 jet{1.0, Vec{0.5, -0.25}, SymMatrix(2)};
    const graph::CurvatureData cd = graph::curvature_matrix(jet, 2);
    CHECK(cd.kappa.values[0] == doctest::Approx(0.0));
    CHECK(cd.cone.label == sym::ConeLabel::boundary);
  }
}

TEST_CASE("curvature h = d2u/w and metric similarity") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const graph::Jet2 jet = random_jet(rng, n);
    const graph::Frame fr = graph::graph_frame(jet);
    const graph::CurvatureData cd = graph::curvature_matrix(jet, 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(cd.h(i, j) == doctest::Approx(jet.d2u(i, j) / fr.w).epsilon(1e-14).scale(1.0));

    // sigma_k of kappa equals sigma_k of the eigenvalues of g^{-1} h
    Mat ginv(n), hmat(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += fr.gamma_up(i, l) * fr.gamma_up(l, j);
        ginv(i, j) = s;
        hmat(i, j) = cd.h(i, j);
      }
    const Mat m = mul(ginv, hmat);
    for (int k = 1; k <= n; ++k)
      CHECK(sym::sigma(cd.kappa.values, k) ==
            doctest::Approx(sigma_from_traces(m, k)).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("curvature is invariant under rotations and linear in d2u") {
  Rng rng(19);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    const graph::Jet2 jet = random_jet(rng, n);
    const Mat q = test::random_rotation(rng, n);

    graph::Jet2 rot = jet;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += q(l, i) * jet.du[static_cast<std::size_t>(l)];
      rot.du[static_cast<std::size_t>(i)] = s;  // Q^T du
    }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s += q(a, i) * jet.d2u(a, b) * q(b, j);
        rot.d2u.set(i, j, s);  // Q^T d2u Q
      }
    const Vec k1 = graph::curvature_matrix(jet, 1).kappa.values;
    const Vec k2 = graph::curvature_matrix(rot, 1).kappa.values;
    for (int i = 0; i < n; ++i)
      CHECK(k1[static_cast<std::size_t>(i)] ==
            doctest::Approx(k2[static_cast<std::size_t>(i)]).epsilon(1e-10).scale(1.0));

    // a is linear in d2u at fixed gradient
    const double c = 1.75;
    graph::Jet2 scaled_jet = jet;
    scaled_jet.d2u = scaled(jet.d2u, c);
    const SymMatrix a1 = graph::curvature_matrix(jet, 1).a;
    const SymMatrix a2 = graph::curvature_matrix(scaled_jet, 1).a;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(a2(i, j) == doctest::Approx(c * a1(i, j)).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("projected_hessian closed forms") {
  {
    graph::Jet2 jet{0.0, Vec{0, 0, 0}, SymMatrix(3)};
    const SymMatrix d2v = SymMatrix::diagonal(Vec{2, 1, 0.5});
    const graph::ProjectionReport rep = graph::projected_hessian(jet, d2v, 2);
    for (double m : rep.margins) CHECK(m == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.tvt(0, 0) == doctest::Approx(2.0));
  }
  {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
      graph::Jet2 jet = random_jet(rng, 3);
      const graph::Frame fr = graph::graph_frame(jet);
      const graph::ProjectionReport rep =
          graph::projected_hessian(jet, SymMatrix::identity(3), 2);
      const Vec lam = sym::eigen_sym(rep.tvt).spectrum.values;
      for (int j = 1; j <= 2; ++j)
        CHECK(sym::sigma(lam, j) >= sym::binomial(3, j) / (fr.w * fr.w) - 1e-10);
    }
  }
  {
    graph::Jet2 jet{0.0, Vec{1.0, -2.0}, SymMatrix(2)};
    const graph::ProjectionReport rep = graph::projected_hessian(jet, SymMatrix(2), 2);
    for (double m : rep.margins) CHECK(m == doctest::Approx(0.0));
  }
  // precondition: spectrum outside the closed cone names the failing sigma
  graph::Jet2 jet{0.0, Vec{0.1, 0.2}, SymMatrix(2)};
  CHECK_THROWS_WITH_AS(
      (void)graph::projected_hessian(jet, SymMatrix::diagonal(Vec{-3, -4}), 1),
      doctest::Contains("sigma_1"), Error);
}

TEST_CASE("projection margins are nonnegative on admissible pairs") {
  Rng rng(29);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    const int k = 1 + static_cast<int>(rng() % n);
    const graph::Jet2 jet = random_jet(rng, n);
    const int cone_order = std::min(k + 1, n);
    const Vec lam = test::sample_cone_interior(rng, n, cone_order);
    const SymMatrix d2v = test::conjugate_diag(test::random_rotation(rng, n), lam);
    const graph::ProjectionReport rep = graph::projected_hessian(jet, d2v, k);
    for (double m : rep.margins) CHECK(m >= -1e-10);
  }
}

TEST_CASE("admissible") {
  Rng rng(31);
  for (int k = 1; k <= 2; ++k) {
    graph::Jet2 jet{0.0, test::random_vec(rng, 2, -1, 1), SymMatrix::identity(2)};
    CHECK(graph::admissible(jet, k).label == sym::ConeLabel::interior);
  }
  graph::Jet2 plane{0.0, Vec{0.2, 0.4}, SymMatrix(2)};
  CHECK(graph::admissible(plane, 2).label == sym::ConeLabel::boundary);
  graph::Jet2 saddle{0.0, Vec{0, 0}, SymMatrix::diagonal(Vec{1, -1})};
  CHECK(graph::admissible(saddle, 2).label == sym::ConeLabel::outside);
  CHECK(graph::admissible(saddle, 2).margin == doctest::Approx(-1.0));
}

TEST_CASE("hyperbolic curvature closed forms") {
  {
    // horizontal graph at height 1: all hyperbolic curvatures are 1
    graph::Jet2 jet{1.0, Vec{0, 0}, SymMatrix(2)};
    const hyp::HypCurvature hc = hyp::curvature_matrix(jet, 2);
    CHECK(hc.a(0, 0) == doctest::Approx(1.0));
    CHECK(hc.a(0, 1) == doctest::Approx(0.0));
    for (double kv : hc.kappa.values) CHECK(kv == doctest::Approx(1.0));
  }
  {
    // upper hemisphere over the ideal boundary: totally geodesic
    Rng rng(37);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 2);
      const double R = 1.0 + (trial % 2);
      const Vec x = test::random_vec(rng, n, -0.5 * R, 0.5 * R);
      const hyp::HypCurvature hc = hyp::curvature_matrix(test::dome_jet(x, R), 1);
      for (double kv : hc.kappa.values)
        CHECK(kv == doctest::Approx(0.0).epsilon(1e-11).scale(1.0));
    }
  }
  graph::Jet2 below{-0.5, Vec{0, 0}, SymMatrix(2)};
  CHECK_THROWS_AS((void)hyp::curvature_matrix(below, 1), Error);
}

TEST_CASE("hyperbolic second fundamental form identity") {
  // h_tilde = h/u + (v/u^2) g at random jets
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    graph::Jet2 jet = random_jet(rng, n);
    jet.u = 0.1 + std::abs(jet.u) * 2.0;
    const graph::Frame fr = graph::graph_frame(jet);
    const graph::CurvatureData cd = graph::curvature_matrix(jet, 1);
    const hyp::HypCurvature hc = hyp::curvature_matrix(jet, 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double expected = cd.h(i, j) / jet.u + fr.v / (jet.u * jet.u) * fr.metric(i, j);
        CHECK(hc.h(i, j) == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
        CHECK(hc.g(i, j) ==
              doctest::Approx(fr.metric(i, j) / (jet.u * jet.u)).epsilon(1e-12).scale(1.0));
      }
  }
}

TEST_CASE("hyperbolic curvature is rotation invariant") {
  Rng rng(43);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    graph::Jet2 jet = random_jet(rng, n);
    jet.u = 0.2 + std::abs(jet.u);
    const Mat q = test::random_rotation(rng, n);
    graph::Jet2 rot = jet;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += q(l, i) * jet.du[static_cast<std::size_t>(l)];
      rot.du[static_cast<std::size_t>(i)] = s;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s += q(a, i) * jet.d2u(a, b) * q(b, j);
        rot.d2u.set(i, j, s);
      }
    const Vec k1 = hyp::curvature_matrix(jet, 1).kappa.values;
    const Vec k2 = hyp::curvature_matrix(rot, 1).kappa.values;
    for (int i = 0; i < n; ++i)
      CHECK(k1[static_cast<std::size_t>(i)] ==
            doctest::Approx(k2[static_cast<std::size_t>(i)]).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("ellipsoid level-set graph solves the homogeneous problem") {
  Rng rng(47);
  const double R = 1.0;
  for (const auto& [n, k] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {3, 3}}) {
    for (int trial = 0; trial < 200; ++trial) {
      // sample well inside the ellipsoid
      Vec x = test::random_vec(rng, n, -0.4 * R, 0.4 * R);
      const graph::Jet2 jet = test::ellipsoid_jet(x, R, k);
      const hyp::HypCurvature hc = hyp::curvature_matrix(jet, k);
      CHECK(sym::sigma(hc.kappa.values, k) == doctest::Approx(0.0).epsilon(1e-10).scale(1.0));
      // remaining admissibility: the lower elementary symmetric functions stay >= 0
      for (int m = 1; m < k; ++m) CHECK(sym::sigma(hc.kappa.values, m) >= -1e-10);

      // ubar^2 + |x|^2 is (k+1)-convex: D^2(ubar^2 + |x|^2) has spectrum
      // (2 on the last k-1 axes, 0 elsewhere) in the closed cone
      SymMatrix q(n);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          q.set(i, j, 2.0 * (jet.u * jet.d2u(i, j) +
                             jet.du[static_cast<std::size_t>(i)] * jet.du[static_cast<std::size_t>(j)]) +
                          (i == j ? 2.0 : 0.0));
      const Vec lam = sym::eigen_sym(q).spectrum.values;
      const int order = std::min(k + 1, n);
      const std::vector<double> sig = sym::sigma_all(lam, order);
      for (int m = 1; m <= order; ++m) CHECK(sig[static_cast<std::size_t>(m)] >= -1e-9);
    }
  }
}

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dhl/error.hpp"

namespace dhl {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Dense square matrix, row-major. Sized for pointwise geometry (n <= 8),
/// not for grid-level systems.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

  static Mat identity(int n) {
    Mat m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int n() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  std::span<const double> raw() const { return a_; }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

inline Mat mul(const Mat& a, const Mat& b) {
  const int n = a.n();
  Mat c(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

/// Symmetric matrix with full row-major storage; both triangles are kept
/// bit-identical (writes go through set()).
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {
    require(n >= 1, ErrorKind::argument, "SymMatrix: dimension must be >= 1");
  }

  static SymMatrix identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
    return m;
  }

  static SymMatrix diagonal(std::span<const double> d) {
    SymMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.n(); ++i) m.set(i, i, d[i]);
    return m;
  }

  /// Validates symmetry to within 1e-14 (absolute, scaled by the largest
  /// entry for data away from unit size) and finiteness.
  static SymMatrix from_rowmajor(std::span<const double> a, int n) {
    require(n >= 1 && static_cast<int>(a.size()) == n * n, ErrorKind::argument,
            "SymMatrix: bad raw size");
    double amax = 0.0;
    for (double v : a) {
      require(std::isfinite(v), ErrorKind::argument, "SymMatrix: non-finite entry");
      amax = std::max(amax, std::abs(v));
    }
    const double tol = 1e-14 * std::max(1.0, amax);
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double x = a[static_cast<std::size_t>(i) * n + j];
        const double y = a[static_cast<std::size_t>(j) * n + i];
        require(std::abs(x - y) <= tol, ErrorKind::argument,
                "SymMatrix: input is not symmetric");
        m.set(i, j, 0.5 * (x + y));
      }
    return m;
  }

  int n() const { return n_; }
  double operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * n_ + j];
  }
  void set(int i, int j, double v) {
    a_[static_cast<std::size_t>(i) * n_ + j] = v;
    a_[static_cast<std::size_t>(j) * n_ + i] = v;
  }
  void add(int i, int j, double v) { set(i, j, (*this)(i, j) + v); }
  std::span<const double> raw() const { return a_; }

  double frobenius() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  double max_abs() const {
    double s = 0.0;
    for (double v : a_) s = std::max(s, std::abs(v));
    return s;
  }

  double trace() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += (*this)(i, i);
    return s;
  }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

inline SymMatrix scaled(const SymMatrix& a, double c) {
  SymMatrix r(a.n());
  for (int i = 0; i < a.n(); ++i)
    for (int j = i; j < a.n(); ++j) r.set(i, j, c * a(i, j));
  return r;
}

inline SymMatrix added(const SymMatrix& a, const SymMatrix& b) {
  SymMatrix r(a.n());
  for (int i = 0; i < a.n(); ++i)
    for (int j = i; j < a.n(); ++j) r.set(i, j, a(i, j) + b(i, j));
  return r;
}

/// g * m * g for symmetric g, m; the result is assembled entry by entry on
/// the upper triangle, so it is symmetric by construction.
inline SymMatrix sandwich(const SymMatrix& g, const SymMatrix& m) {
  const int n = g.n();
  require(m.n() == n, ErrorKind::argument, "sandwich: dimension mismatch");
  SymMatrix r(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        double t = 0.0;
        for (int l = 0; l < n; ++l) t += m(k, l) * g(l, j);
        s += g(i, k) * t;
      }
      r.set(i, j, s);
    }
  return r;
}

/// Frobenius inner product of two symmetric matrices.
inline double sym_dot(const SymMatrix& a, const SymMatrix& b) {
  double s = 0.0;
  for (int i = 0; i < a.n(); ++i)
    for (int j = 0; j < a.n(); ++j) s += a(i, j) * b(i, j);
  return s;
}

/// Four-index array over {0..n-1}^4.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n)
      : n_(n), a_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  int n() const { return n_; }
  double operator()(int i, int j, int p, int q) const { return a_[idx(i, j, p, q)]; }
  double& at(int i, int j, int p, int q) { return a_[idx(i, j, p, q)]; }

 private:
  std::size_t idx(int i, int j, int p, int q) const {
    return ((static_cast<std::size_t>(i) * n_ + j) * n_ + p) * n_ + q;
  }
  int n_ = 0;
  std::vector<double> a_;
};

}  // namespace dhl

#include "dhl/symfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace dhl::sym {

namespace {

void check_spectrum(std::span<const double> lam) {
  const int n = static_cast<int>(lam.size());
  require(n >= 1 && n <= kMaxDim, ErrorKind::argument,
          "spectrum length must be in [1, " + std::to_string(kMaxDim) + "]");
  require(all_finite(lam), ErrorKind::argument, "spectrum has non-finite entries");
}

}  // namespace

double binomial(int n, int k) {
  require(n >= 0 && k >= 0 && k <= n, ErrorKind::argument, "binomial: bad arguments");
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double sigma(std::span<const double> lam, int k) {
  check_spectrum(lam);
  const int n = static_cast<int>(lam.size());
  require(k >= 0 && k <= n, ErrorKind::argument,
          "sigma: order k=" + std::to_string(k) + " out of range for n=" + std::to_string(n));
  if (k == 0) return 1.0;
  return elementary_all<double>(lam, k)[static_cast<std::size_t>(k)];
}

std::vector<double> sigma_all(std::span<const double> lam, int k) {
  check_spectrum(lam);
  const int n = static_cast<int>(lam.size());
  require(k >= 0 && k <= n, ErrorKind::argument, "sigma_all: order out of range");
  return elementary_all<double>(lam, k);
}

double sigma_truncated(std::span<const double> lam, int m, std::span<const int> zeroed) {
  check_spectrum(lam);
  const int n = static_cast<int>(lam.size());
  require(m >= 0 && m <= n, ErrorKind::argument, "sigma_truncated: order out of range");
  Vec work(lam.begin(), lam.end());
  std::array<bool, kMaxDim> seen{};
  for (int idx : zeroed) {
    require(idx >= 0 && idx < n, ErrorKind::argument,
            "sigma_truncated: index " + std::to_string(idx) + " out of range");
    require(!seen[static_cast<std::size_t>(idx)], ErrorKind::argument,
            "sigma_truncated: duplicate index " + std::to_string(idx));
    seen[static_cast<std::size_t>(idx)] = true;
    work[static_cast<std::size_t>(idx)] = 0.0;
  }
  return sigma(work, m);
}

ConeStatus cone_status(std::span<const double> lam, int k, double tol) {
  check_spectrum(lam);
  const int n = static_cast<int>(lam.size());
  require(k >= 1 && k <= n, ErrorKind::argument, "cone_status: order out of range");
  require(tol >= 0.0, ErrorKind::argument, "cone_status: tolerance must be >= 0");
  const std::vector<double> e = sigma_all(lam, k);
  double margin = e[1];
  for (int m = 2; m <= k; ++m) margin = std::min(margin, e[static_cast<std::size_t>(m)]);
  ConeStatus st;
  st.margin = margin;
  if (margin > tol)
    st.label = ConeLabel::interior;
  else if (margin >= -tol)
    st.label = ConeLabel::boundary;
  else
    st.label = ConeLabel::outside;
  return st;
}

SymMatrix sigma_gradient(const SymMatrix& a, int k) {
  const int n = a.n();
  require(n <= kMaxDim, ErrorKind::argument, "sigma_gradient: dimension too large");
  require(k >= 1 && k <= n, ErrorKind::argument, "sigma_gradient: order out of range");
  // T_0 = I; sigma_m = tr(A T_{m-1}) / m; T_m = sigma_m I - A T_{m-1}.
  SymMatrix t = SymMatrix::identity(n);
  for (int m = 1; m < k; ++m) {
    SymMatrix at(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += a(i, l) * t(l, j);
        at.set(i, j, s);
      }
    const double sig_m = at.trace() / m;
    SymMatrix next(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        next.set(i, j, (i == j ? sig_m : 0.0) - at(i, j));
    t = next;
  }
  return t;
}

Tensor4 sigma_hessian_diagonal(std::span<const double> lam, int k) {
  check_spectrum(lam);
  const int n = static_cast<int>(lam.size());
  require(n >= 2, ErrorKind::argument, "sigma_hessian_diagonal: need n >= 2");
  require(k >= 2 && k <= n, ErrorKind::argument,
          "sigma_hessian_diagonal: order must satisfy 2 <= k <= n");
  Tensor4 h(n);
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < n; ++p) {
      if (i == p) continue;
      const std::array<int, 2> z{i, p};
      const double v = sigma_truncated(lam, k - 2, std::span<const int>(z));
      h.at(i, i, p, p) = v;
      h.at(i, p, p, i) = -v;
    }
  return h;
}

std::pair<double, double> newton_maclaurin(std::span<const double> lam, int k, int l,
                                           int r, int s) {
  check_spectrum(lam);
  const int n = static_cast<int>(lam.size());
  require(k > l && l >= 0 && r > s && s >= 0 && k >= r && l >= s && k <= n,
          ErrorKind::argument, "newton_maclaurin: inadmissible orders");
  const ConeStatus st = cone_status(lam, k, 0.0);
  require(st.label == ConeLabel::interior, ErrorKind::precondition,
          "newton_maclaurin: spectrum is not inside the order-k cone");
  const std::vector<double> e = sigma_all(lam, k);
  auto normalized = [&](int m) { return e[static_cast<std::size_t>(m)] / binomial(n, m); };
  const double lhs = std::pow(normalized(k) / normalized(l), 1.0 / (k - l));
  const double rhs = std::pow(normalized(r) / normalized(s), 1.0 / (r - s));
  return {lhs, rhs};
}

PinchReport lemma_pinch(std::span<const double> lam, int k, double delta_bar, double eps) {
  check_spectrum(lam);
  const int n = static_cast<int>(lam.size());
  require(k >= 1 && k <= n, ErrorKind::argument, "lemma_pinch: order out of range");
  require(delta_bar > 0.0 && delta_bar < 1.0, ErrorKind::argument,
          "lemma_pinch: delta_bar must lie in (0, 1)");
  require(eps > 0.0, ErrorKind::argument, "lemma_pinch: eps must be positive");
  for (int i = 0; i + 1 < n; ++i)
    require(lam[static_cast<std::size_t>(i)] >= lam[static_cast<std::size_t>(i + 1)],
            ErrorKind::argument, "lemma_pinch: spectrum must be sorted descending");
  const ConeStatus st = cone_status(lam, k, 0.0);
  require(st.label == ConeLabel::interior, ErrorKind::precondition,
          "lemma_pinch: spectrum is not inside the order-k cone");

  const double lam1 = lam[0];
  const double sk = sigma(lam, k);
  PinchReport rep;
  rep.small_sigma_hypothesis = sk <= eps * std::pow(lam1, k);
  rep.flat_tail_hypothesis = true;
  for (int i = k; i < n; ++i)
    if (std::abs(lam[static_cast<std::size_t>(i)]) > eps * lam1)
      rep.flat_tail_hypothesis = false;
  const std::array<int, 1> z{0};
  const double s_trunc = sigma_truncated(lam, k - 1, std::span<const int>(z));
  rep.conclusion = lam1 * s_trunc >= (1.0 - delta_bar) * sk;
  return rep;
}

EigenResult eigen_sym(const SymMatrix& input) {
  const int n = input.n();
  require(n >= 1 && n <= kMaxDim, ErrorKind::argument,
          "eigen_sym: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  require(all_finite(input.raw()), ErrorKind::argument, "eigen_sym: non-finite entries");

  std::array<double, kMaxDim * kMaxDim> a{};
  std::array<double, kMaxDim * kMaxDim> v{};
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  auto V = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      A(i, j) = input(i, j);
      V(i, j) = (i == j) ? 1.0 : 0.0;
    }

  double norm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) norm += A(i, j) * A(i, j);
  norm = std::sqrt(norm);
  const double tol = 1e-13 * std::max(norm, 1e-300);

  auto offdiag = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += 2.0 * A(i, j) * A(i, j);
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 60;
  int sweep = 0;
  for (; sweep < kMaxSweeps && offdiag() > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = 0.5 * (A(q, q) - A(p, p)) / apq;
        double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int i = 0; i < n; ++i) {
          const double aip = A(i, p), aiq = A(i, q);
          A(i, p) = c * aip - s * aiq;
          A(i, q) = s * aip + c * aiq;
        }
        for (int j = 0; j < n; ++j) {
          const double apj = A(p, j), aqj = A(q, j);
          A(p, j) = c * apj - s * aqj;
          A(q, j) = s * apj + c * aqj;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = V(i, p), viq = V(i, q);
          V(i, p) = c * vip - s * viq;
          V(i, q) = s * vip + c * viq;
        }
      }
  }
  if (offdiag() > tol)
    fail(ErrorKind::numeric, "eigen_sym: Jacobi sweeps did not converge, off-diagonal "
                             "residual " + std::to_string(offdiag()));

  std::array<int, kMaxDim> order{};
  std::iota(order.begin(), order.begin() + n, 0);
  std::stable_sort(order.begin(), order.begin() + n,
                   [&](int x, int y) { return A(x, x) > A(y, y); });

  EigenResult res;
  res.spectrum.values.resize(static_cast<std::size_t>(n));
  res.spectrum.sorted = true;
  res.frame = Mat(n);
  for (int c = 0; c < n; ++c) {
    res.spectrum.values[static_cast<std::size_t>(c)] = A(order[static_cast<std::size_t>(c)],
                                                         order[static_cast<std::size_t>(c)]);
    for (int i = 0; i < n; ++i) res.frame(i, c) = V(i, order[static_cast<std::size_t>(c)]);
  }
  res.sweeps = sweep;

  double worst = 0.0;
  for (int c = 0; c < n; ++c) {
    double rnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += input(i, j) * res.frame(j, c);
      s -= res.spectrum.values[static_cast<std::size_t>(c)] * res.frame(i, c);
      rnorm += s * s;
    }
    worst = std::max(worst, std::sqrt(rnorm));
  }
  res.residual = worst;
  return res;
}

double gradient_trace_bound_constant(int n, int k) {
  require(n >= 1 && k >= 2 && k <= n, ErrorKind::argument,
          "gradient_trace_bound_constant: need 2 <= k <= n");
  return (n - k + 1) * (binomial(n, k - 1) / binomial(n, k)) *
         std::pow(binomial(n, k) / binomial(n, 1), 1.0 / (k - 1));
}

}  // namespace dhl::sym

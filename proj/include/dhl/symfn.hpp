#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dhl/error.hpp"
#include "dhl/smallmat.hpp"

namespace dhl::sym {

/// Shared strictness tolerance for Gårding-cone classification.
inline constexpr double kConeTol = 1e-12;

/// Largest spectrum / matrix dimension the pointwise algebra accepts.
inline constexpr int kMaxDim = 8;

/// Eigenvalue vector; `sorted` means descending order.
struct Spectrum {
  Vec values;
  bool sorted = false;

  int n() const { return static_cast<int>(values.size()); }
};

enum class ConeLabel { interior, boundary, outside };

/// Classification of a spectrum against the cone where sigma_1..sigma_k are
/// positive. `margin` is the smallest of those values.
struct ConeStatus {
  ConeLabel label = ConeLabel::outside;
  double margin = 0.0;
};

constexpr const char* to_string(ConeLabel label) {
  switch (label) {
    case ConeLabel::interior: return "interior";
    case ConeLabel::boundary: return "boundary";
    case ConeLabel::outside: return "outside";
  }
  return "unknown";
}

/// e_0..e_k of the input values by the prefix recurrence
/// e_j <- e_j + x_i * e_{j-1}; O(n k) and stable for mixed-sign spectra.
/// Works over any commutative ring scalar (double, Rational).
template <class T>
std::vector<T> elementary_all(std::span<const T> x, int k) {
  std::vector<T> e(static_cast<std::size_t>(k) + 1, T(0));
  e[0] = T(1);
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    const int top = std::min(i + 1, k);
    for (int j = top; j >= 1; --j) e[j] += x[i] * e[j - 1];
  }
  return e;
}

double binomial(int n, int k);

/// sigma_k of the spectrum; k = 0 returns 1 by convention.
double sigma(std::span<const double> lam, int k);

/// sigma_0..sigma_k in one pass.
std::vector<double> sigma_all(std::span<const double> lam, int k);

/// sigma_m with the listed entries (0-based, distinct) replaced by zero.
double sigma_truncated(std::span<const double> lam, int m, std::span<const int> zeroed);

ConeStatus cone_status(std::span<const double> lam, int k, double tol = kConeTol);

/// d sigma_k(lambda(A)) / d a_ij, assembled from the matrix-polynomial
/// recurrence T_m = sigma_m I - A T_{m-1} (Faddeev-LeVerrier), so repeated
/// eigenvalues need no special handling. For diagonal A the result is
/// diag(sigma_{k-1;i}); positive definite when lambda(A) lies inside the cone.
SymMatrix sigma_gradient(const SymMatrix& a, int k);

/// Second derivatives d^2 sigma_k / (d a_ij d a_pq) at a diagonal matrix with
/// the given spectrum: sigma_{k-2;ip} on (ii,pp) with i != p, the negative on
/// (ij,ji) with i != j, zero elsewhere. Requires k >= 2.
Tensor4 sigma_hessian_diagonal(std::span<const double> lam, int k);

/// Both sides of the normalized-ratio inequality
/// [ (s_k/C(n,k)) / (s_l/C(n,l)) ]^{1/(k-l)} <= [ (s_r/C(n,r)) / (s_s/C(n,s)) ]^{1/(r-s)}
/// for spectra inside the cone; the caller asserts lhs <= rhs.
std::pair<double, double> newton_maclaurin(std::span<const double> lam, int k, int l,
                                           int r, int s);

/// Probe for the conditional pinch bound lam_1 * sigma_{k-1;1} >= (1 - delta_bar) * sigma_k.
struct PinchReport {
  bool small_sigma_hypothesis = false;  // sigma_k <= eps * lam_1^k
  bool flat_tail_hypothesis = false;    // |lam_i| <= eps * lam_1 for i > k
  bool conclusion = false;
};

/// Requires a descending spectrum inside the cone, 0 < delta_bar < 1, eps > 0.
PinchReport lemma_pinch(std::span<const double> lam, int k, double delta_bar, double eps);

struct EigenResult {
  Spectrum spectrum;   // descending
  Mat frame;           // columns are eigenvectors, same order
  double residual;     // max_i |A q_i - lam_i q_i|
  int sweeps;
};

/// Cyclic Jacobi for symmetric matrices, n <= 8. Off-diagonal Frobenius
/// tolerance 1e-13 (relative to |A|_F), 60-sweep cap; deterministic.
EigenResult eigen_sym(const SymMatrix& a);

/// Constant c0 with sum_i sigma_k^{ii} >= c0 * sigma_k^{1-1/(k-1)} * sigma_1^{1/(k-1)}
/// inside the cone, via (n-k+1) sigma_{k-1} and the normalized-ratio inequality.
double gradient_trace_bound_constant(int n, int k);

}  // namespace dhl::sym

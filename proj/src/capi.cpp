#include "dhl.h"

#include <cstring>
#include <string>

#include "dhl/config.hpp"
#include "dhl/expression.hpp"
#include "dhl/graph_geometry.hpp"
#include "dhl/hyperbolic_geometry.hpp"
#include "dhl/runner.hpp"
#include "dhl/symfn.hpp"

namespace {

thread_local std::string g_last_error;

int map_kind(dhl::ErrorKind k) {
  switch (k) {
    case dhl::ErrorKind::argument: return DHL_ERROR_ARGUMENT;
    case dhl::ErrorKind::domain: return DHL_ERROR_DOMAIN;
    case dhl::ErrorKind::precondition: return DHL_ERROR_PRECONDITION;
    case dhl::ErrorKind::numeric: return DHL_ERROR_NUMERIC;
    case dhl::ErrorKind::nonconvergence: return DHL_ERROR_NONCONVERGENCE;
    case dhl::ErrorKind::validation: return DHL_ERROR_VALIDATION;
    case dhl::ErrorKind::io: return DHL_ERROR_IO;
    case dhl::ErrorKind::verification: return DHL_ERROR_VERIFICATION;
  }
  return DHL_ERROR_NUMERIC;
}

template <class Fn>
dhl_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DHL_OK;
  } catch (const dhl::Error& e) {
    g_last_error = std::string(dhl::to_string(e.kind())) + ": " + e.what();
    return static_cast<dhl_status>(map_kind(e.kind()));
  } catch (const std::exception& e) {
    g_last_error = std::string("numeric: ") + e.what();
    return DHL_ERROR_NUMERIC;
  }
}

std::vector<double> to_vec(const double* p, int n) { return {p, p + n}; }

dhl_status write_string(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf && cap > 0) {
    const size_t m = s.size() + 1 <= cap ? s.size() : cap - 1;
    std::memcpy(buf, s.data(), m);
    buf[m] = '\0';
  }
  return DHL_OK;
}

}  // namespace

extern "C" {

struct dhl_expr {
  dhl::expr::Expression rep;
};

struct dhl_config {
  dhl::cli::RunConfig rep;
};

const char* dhl_status_name(int status) {
  switch (status) {
    case DHL_OK: return "ok";
    case DHL_ERROR_ARGUMENT: return "argument";
    case DHL_ERROR_DOMAIN: return "domain";
    case DHL_ERROR_PRECONDITION: return "precondition";
    case DHL_ERROR_NUMERIC: return "numeric";
    case DHL_ERROR_NONCONVERGENCE: return "nonconvergence";
    case DHL_ERROR_VALIDATION: return "validation";
    case DHL_ERROR_IO: return "io";
    case DHL_ERROR_VERIFICATION: return "verification";
  }
  return "unknown";
}

const char* dhl_last_error(void) { return g_last_error.c_str(); }

int dhl_exit_code(int status) {
  switch (status) {
    case DHL_OK: return 0;
    case DHL_ERROR_NUMERIC:
    case DHL_ERROR_NONCONVERGENCE: return 3;
    case DHL_ERROR_VERIFICATION: return 4;
    default: return 2;
  }
}

dhl_status dhl_sigma(const double* lam, int n, int k, double* out) {
  return guarded([&] {
    dhl::require(lam && out, dhl::ErrorKind::argument, "dhl_sigma: null pointer");
    *out = dhl::sym::sigma(to_vec(lam, n), k);
  });
}

dhl_status dhl_sigma_truncated(const double* lam, int n, int m, const int* zeroed,
                               int num_zeroed, double* out) {
  return guarded([&] {
    dhl::require(lam && out && (zeroed || num_zeroed == 0), dhl::ErrorKind::argument,
                 "dhl_sigma_truncated: null pointer");
    std::vector<int> z(zeroed, zeroed + num_zeroed);
    *out = dhl::sym::sigma_truncated(to_vec(lam, n), m, z);
  });
}

dhl_status dhl_cone_status(const double* lam, int n, int k, double tol, int* label,
                           double* margin) {
  return guarded([&] {
    dhl::require(lam && label && margin, dhl::ErrorKind::argument,
                 "dhl_cone_status: null pointer");
    const dhl::sym::ConeStatus st = dhl::sym::cone_status(to_vec(lam, n), k, tol);
    *label = static_cast<int>(st.label);
    *margin = st.margin;
  });
}

dhl_status dhl_sigma_gradient(const double* a, int n, int k, double* grad) {
  return guarded([&] {
    dhl::require(a && grad, dhl::ErrorKind::argument, "dhl_sigma_gradient: null pointer");
    const dhl::SymMatrix m =
        dhl::SymMatrix::from_rowmajor(std::span<const double>(a, static_cast<size_t>(n) * n), n);
    const dhl::SymMatrix g = dhl::sym::sigma_gradient(m, k);
    std::memcpy(grad, g.raw().data(), sizeof(double) * static_cast<size_t>(n) * n);
  });
}

dhl_status dhl_eigen_sym(const double* a, int n, double* lam, double* frame) {
  return guarded([&] {
    dhl::require(a && lam, dhl::ErrorKind::argument, "dhl_eigen_sym: null pointer");
    const dhl::SymMatrix m =
        dhl::SymMatrix::from_rowmajor(std::span<const double>(a, static_cast<size_t>(n) * n), n);
    const dhl::sym::EigenResult r = dhl::sym::eigen_sym(m);
    for (int i = 0; i < n; ++i) lam[i] = r.spectrum.values[static_cast<size_t>(i)];
    if (frame)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) frame[i * n + j] = r.frame(i, j);
  });
}

namespace {

dhl::graph::Jet2 jet_from(double u, const double* du, const double* d2u, int n) {
  dhl::graph::Jet2 jet;
  jet.u = u;
  jet.du = to_vec(du, n);
  jet.d2u =
      dhl::SymMatrix::from_rowmajor(std::span<const double>(d2u, static_cast<size_t>(n) * n), n);
  return jet;
}

}  // namespace

dhl_status dhl_graph_curvature(const double* du, const double* d2u, int n, int k,
                               double* kappa, int* label, double* margin) {
  return guarded([&] {
    dhl::require(du && d2u && kappa && label && margin, dhl::ErrorKind::argument,
                 "dhl_graph_curvature: null pointer");
    const dhl::graph::CurvatureData cd =
        dhl::graph::curvature_matrix(jet_from(0.0, du, d2u, n), k);
    for (int i = 0; i < n; ++i) kappa[i] = cd.kappa.values[static_cast<size_t>(i)];
    *label = static_cast<int>(cd.cone.label);
    *margin = cd.cone.margin;
  });
}

dhl_status dhl_hyperbolic_curvature(double u, const double* du, const double* d2u, int n,
                                    int k, double* kappa, int* label, double* margin) {
  return guarded([&] {
    dhl::require(du && d2u && kappa && label && margin, dhl::ErrorKind::argument,
                 "dhl_hyperbolic_curvature: null pointer");
    const dhl::hyp::HypCurvature hc =
        dhl::hyp::curvature_matrix(jet_from(u, du, d2u, n), k);
    for (int i = 0; i < n; ++i) kappa[i] = hc.kappa.values[static_cast<size_t>(i)];
    *label = static_cast<int>(hc.cone.label);
    *margin = hc.cone.margin;
  });
}

dhl_status dhl_expr_parse(const char* text, dhl_expr** out, long* error_offset) {
  if (error_offset) *error_offset = -1;
  return guarded([&] {
    dhl::require(text && out, dhl::ErrorKind::argument, "dhl_expr_parse: null pointer");
    dhl::expr::Expression::ParseError err;
    auto e = dhl::expr::Expression::try_parse(text, &err);
    if (!e) {
      if (error_offset) *error_offset = static_cast<long>(err.offset);
      dhl::fail(dhl::ErrorKind::validation,
                "syntax error at offset " + std::to_string(err.offset) + ": " + err.message);
    }
    *out = new dhl_expr{*e};
  });
}

dhl_status dhl_expr_eval(const dhl_expr* e, const double* x, int n, double u, double* out) {
  return guarded([&] {
    dhl::require(e && out && (x || n == 0), dhl::ErrorKind::argument,
                 "dhl_expr_eval: null pointer");
    *out = e->rep.eval(std::span<const double>(x, static_cast<size_t>(n)), u);
  });
}

dhl_status dhl_expr_print(const dhl_expr* e, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    dhl::require(e != nullptr, dhl::ErrorKind::argument, "dhl_expr_print: null pointer");
    write_string(e->rep.print(), buf, cap, needed);
  });
}

void dhl_expr_free(dhl_expr* e) { delete e; }

dhl_status dhl_config_load(const char* path, dhl_config** out) {
  return guarded([&] {
    dhl::require(path && out, dhl::ErrorKind::argument, "dhl_config_load: null pointer");
    *out = new dhl_config{dhl::cli::RunConfig::load(path)};
  });
}

dhl_status dhl_config_parse(const char* text, dhl_config** out) {
  return guarded([&] {
    dhl::require(text && out, dhl::ErrorKind::argument, "dhl_config_parse: null pointer");
    *out = new dhl_config{dhl::cli::RunConfig::parse(text)};
  });
}

dhl_status dhl_config_set(dhl_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    dhl::require(cfg && key && value, dhl::ErrorKind::argument,
                 "dhl_config_set: null pointer");
    cfg->rep.set(key, value);
  });
}

dhl_status dhl_config_write(const dhl_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    dhl::require(cfg != nullptr, dhl::ErrorKind::argument, "dhl_config_write: null pointer");
    write_string(cfg->rep.serialize(), buf, cap, needed);
  });
}

void dhl_config_free(dhl_config* cfg) { delete cfg; }

dhl_status dhl_run(const dhl_config* cfg, const char* command, const char* out_dir) {
  return guarded([&] {
    dhl::require(cfg && command, dhl::ErrorKind::argument, "dhl_run: null pointer");
    dhl::cli::run(cfg->rep, command, out_dir ? out_dir : "");
  });
}

}  // extern "C"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "dhl.h"

namespace {

const char* kConfig = R"([problem]
kind = hessian
n = 2
k = 2
f = 1
phi = 0
domain = disk
radius = 1
resolution = 17

[solver]
eps_schedule = 1e-1,1e-2,1e-3
)";

}  // namespace

TEST_CASE("status names and exit codes") {
  CHECK(std::string(dhl_status_name(DHL_OK)) == "ok");
  CHECK(std::string(dhl_status_name(DHL_ERROR_VALIDATION)) == "validation");
  CHECK(dhl_exit_code(DHL_OK) == 0);
  CHECK(dhl_exit_code(DHL_ERROR_VALIDATION) == 2);
  CHECK(dhl_exit_code(DHL_ERROR_ARGUMENT) == 2);
  CHECK(dhl_exit_code(DHL_ERROR_NONCONVERGENCE) == 3);
  CHECK(dhl_exit_code(DHL_ERROR_NUMERIC) == 3);
  CHECK(dhl_exit_code(DHL_ERROR_VERIFICATION) == 4);
}

TEST_CASE("pointwise algebra through the C surface") {
  const double lam[4] = {1, 2, 3, 4};
  double out = 0.0;
  CHECK(dhl_sigma(lam, 4, 2, &out) == DHL_OK);
  CHECK(out == doctest::Approx(35.0));
  CHECK(dhl_sigma(nullptr, 4, 2, &out) == DHL_ERROR_ARGUMENT);
  CHECK(std::strlen(dhl_last_error()) > 0);
  CHECK(dhl_sigma(lam, 4, 9, &out) == DHL_ERROR_ARGUMENT);

  const int zeroed[1] = {2};
  CHECK(dhl_sigma_truncated(lam, 4, 2, zeroed, 1, &out) == DHL_OK);
  CHECK(out == doctest::Approx(1 * 2 + 1 * 4 + 2 * 4));

  int label = -1;
  double margin = 0.0;
  const double mixed[3] = {1, 1, -0.5};
  CHECK(dhl_cone_status(mixed, 3, 2, 1e-12, &label, &margin) == DHL_OK);
  CHECK(label == 1);  // boundary
  CHECK(margin == doctest::Approx(0.0));

  const double a[4] = {2, 0, 0, 1};
  double grad[4];
  CHECK(dhl_sigma_gradient(a, 2, 2, grad) == DHL_OK);
  CHECK(grad[0] == doctest::Approx(1.0));
  CHECK(grad[3] == doctest::Approx(2.0));

  double ev[2], frame[4];
  const double sym[4] = {2, 1, 1, 2};
  CHECK(dhl_eigen_sym(sym, 2, ev, frame) == DHL_OK);
  CHECK(ev[0] == doctest::Approx(3.0));
  CHECK(ev[1] == doctest::Approx(1.0));
  const double asym[4] = {2, 1, 0, 2};
  CHECK(dhl_eigen_sym(asym, 2, ev, nullptr) == DHL_ERROR_ARGUMENT);

  const double du[2] = {0, 0};
  const double d2u[4] = {1, 0, 0, 1};
  double kappa[2];
  CHECK(dhl_graph_curvature(du, d2u, 2, 2, kappa, &label, &margin) == DHL_OK);
  CHECK(kappa[0] == doctest::Approx(1.0));
  CHECK(label == 0);

  const double flat[4] = {0, 0, 0, 0};
  CHECK(dhl_hyperbolic_curvature(1.0, du, flat, 2, 2, kappa, &label, &margin) == DHL_OK);
  CHECK(kappa[0] == doctest::Approx(1.0));  // horosphere-like graph
  CHECK(dhl_hyperbolic_curvature(-1.0, du, flat, 2, 2, kappa, &label, &margin) ==
        DHL_ERROR_DOMAIN);
}

TEST_CASE("expressions through the C surface") {
  dhl_expr* e = nullptr;
  long off = -1;
  CHECK(dhl_expr_parse("max(x1-0.5,0)^2", &e, &off) == DHL_OK);
  double out = 0.0;
  const double x[1] = {0.75};
  CHECK(dhl_expr_eval(e, x, 1, 0.0, &out) == DHL_OK);
  CHECK(out == doctest::Approx(0.0625));
  char buf[128];
  size_t needed = 0;
  CHECK(dhl_expr_print(e, buf, sizeof buf, &needed) == DHL_OK);
  dhl_expr* e2 = nullptr;
  CHECK(dhl_expr_parse(buf, &e2, &off) == DHL_OK);
  double out2 = 0.0;
  CHECK(dhl_expr_eval(e2, x, 1, 0.0, &out2) == DHL_OK);
  CHECK(out2 == doctest::Approx(out));
  dhl_expr_free(e);
  dhl_expr_free(e2);

  dhl_expr* bad = nullptr;
  CHECK(dhl_expr_parse("x1*", &bad, &off) == DHL_ERROR_VALIDATION);
  CHECK(off == 3);
  CHECK(bad == nullptr);
}

TEST_CASE("configs and runs through the C surface") {
  dhl_config* cfg = nullptr;
  REQUIRE(dhl_config_parse(kConfig, &cfg) == DHL_OK);
  CHECK(dhl_config_set(cfg, "problem.resolution", "17") == DHL_OK);
  CHECK(dhl_config_set(cfg, "problem.bogus", "1") == DHL_ERROR_VALIDATION);

  size_t needed = 0;
  CHECK(dhl_config_write(cfg, nullptr, 0, &needed) == DHL_OK);
  std::string text(needed, '\0');
  CHECK(dhl_config_write(cfg, text.data(), text.size(), &needed) == DHL_OK);
  text.resize(needed - 1);
  dhl_config* cfg2 = nullptr;
  REQUIRE(dhl_config_parse(text.c_str(), &cfg2) == DHL_OK);
  std::string text2(needed, '\0');
  CHECK(dhl_config_write(cfg2, text2.data(), text2.size(), &needed) == DHL_OK);
  text2.resize(needed - 1);
  CHECK(text2 == text);
  dhl_config_free(cfg2);

  const auto out = std::filesystem::temp_directory_path() / "dhl_capi_run";
  std::filesystem::remove_all(out);
  CHECK(dhl_run(cfg, "solve", out.string().c_str()) == DHL_OK);
  CHECK(std::filesystem::exists(out / "u.bin"));
  CHECK(dhl_run(cfg, "florp", nullptr) == DHL_ERROR_VALIDATION);

  // semantic validation maps to exit code 2
  CHECK(dhl_config_set(cfg, "problem.k", "3") == DHL_OK);
  const dhl_status st = dhl_run(cfg, "solve", out.string().c_str());
  CHECK(st == DHL_ERROR_VALIDATION);
  CHECK(dhl_exit_code(st) == 2);
  CHECK(std::string(dhl_last_error()).find("k") != std::string::npos);
  dhl_config_free(cfg);

  CHECK(dhl_config_load("/nonexistent/nope.cfg", &cfg) == DHL_ERROR_IO);
}

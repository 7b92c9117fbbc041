#include "doctest.h"

#include <cmath>
#include <cstring>
#include <string>

#include "json.hpp"
#include "semiclass/semiclass.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  sc_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::strlen(sc_version()) > 0);
  sc_symbol* s = nullptr;
  CHECK(sc_symbol_parse("x1 + $", 1, &s) == SC_ERR_PARSE);
  CHECK(std::strlen(sc_last_error()) > 0);
  CHECK(sc_symbol_parse(nullptr, 1, &s) == SC_ERR_ARGUMENT);
}

TEST_CASE("symbol handles round trip") {
  sc_symbol* s = nullptr;
  REQUIRE(sc_symbol_parse("xi^2 + x^2 + i*x^3", 1, &s) == SC_OK);
  char* text = nullptr;
  REQUIRE(sc_symbol_print(s, &text) == SC_OK);
  CHECK(take(text).find("xi1^2") != std::string::npos);

  sc_symbol* q = nullptr;
  REQUIRE(sc_symbol_quadratic_part(s, &q) == SC_OK);
  char* qt = nullptr;
  REQUIRE(sc_symbol_print(q, &qt) == SC_OK);
  CHECK(take(qt) == "x1^2 + xi1^2");

  sc_symbol* r = nullptr;
  REQUIRE(sc_symbol_remainder_part(s, &r) == SC_OK);
  char* rt = nullptr;
  REQUIRE(sc_symbol_print(r, &rt) == SC_OK);
  CHECK(take(rt) == "i*x1^3");

  char* rep = nullptr;
  REQUIRE(sc_symbol_check_assumptions(s, 20.0, 2048, &rep) == SC_OK);
  auto j = nlohmann::json::parse(take(rep));
  CHECK(j["all_passed"] == true);

  sc_symbol_free(r);
  sc_symbol_free(q);
  sc_symbol_free(s);
}

TEST_CASE("moyal through the C API matches the documented string") {
  sc_symbol *a = nullptr, *b = nullptr, *st = nullptr;
  REQUIRE(sc_symbol_parse("x1", 1, &a) == SC_OK);
  REQUIRE(sc_symbol_parse("xi1", 1, &b) == SC_OK);
  REQUIRE(sc_moyal_star(a, b, 0, 0.0, &st) == SC_OK);
  char* text = nullptr;
  REQUIRE(sc_symbol_print(st, &text) == SC_OK);
  CHECK(take(text) == "x1*xi1 + (i/2)h");
  sc_symbol_free(st);

  sc_symbol* comm = nullptr;
  REQUIRE(sc_moyal_commutator(a, b, 0, 0.0, &comm) == SC_OK);
  char* ct = nullptr;
  REQUIRE(sc_symbol_print(comm, &ct) == SC_OK);
  CHECK(take(ct) == "i*h");
  sc_symbol_free(comm);

  sc_symbol* pb = nullptr;
  REQUIRE(sc_moyal_poisson(b, a, &pb) == SC_OK);
  char* pt = nullptr;
  REQUIRE(sc_symbol_print(pb, &pt) == SC_OK);
  CHECK(take(pt) == "1");
  sc_symbol_free(pb);

  sc_symbol_free(a);
  sc_symbol_free(b);
}

TEST_CASE("oscillator oracle values") {
  int alpha2[2] = {0, 0};
  CHECK(sc_oscillator_eigenvalue(alpha2, 2, 0.1) == doctest::Approx(0.2));
  double v = 0;
  REQUIRE(sc_oscillator_lp_norm(alpha2, 2, 0.01, INFINITY, &v) == SC_OK);
  CHECK(v == doctest::Approx(5.6418958).epsilon(1e-6));
  CHECK(sc_oscillator_lp_norm(alpha2, 2, 0.01, 1.0, &v) == SC_ERR_ARGUMENT);
}

TEST_CASE("grid, quantize, apply and eigensolve through handles") {
  sc_grid* g = nullptr;
  CHECK(sc_grid_create(3, 4.0, 64, 0.1, &g) == SC_ERR_ARGUMENT);
  REQUIRE(sc_grid_create(1, 8.0, 128, 0.1, &g) == SC_OK);
  CHECK(sc_grid_points(g) == 128);

  sc_symbol* osc = nullptr;
  REQUIRE(sc_symbol_parse("xi^2 + x^2", 1, &osc) == SC_OK);
  sc_operator* A = nullptr;
  REQUIRE(sc_quantize_weyl(osc, g, &A) == SC_OK);

  char* stats = nullptr;
  REQUIRE(sc_operator_stats(A, &stats) == SC_OK);
  auto j = nlohmann::json::parse(take(stats));
  CHECK(j["method"] == "midpoint-fft");
  CHECK(double(j["hermiticity_defect"]) < 1e-12);

  // apply to the sampled ground state: A u = h u
  std::vector<double> in(2 * 128), out(2 * 128);
  int alpha[1] = {0};
  REQUIRE(sc_oscillator_sample(alpha, 1, 0.1, g, in.data()) == SC_OK);
  REQUIRE(sc_operator_apply(A, in.data(), out.data()) == SC_OK);
  double num = 0, den = 0;
  for (size_t i = 0; i < in.size(); ++i) {
    num += (out[i] - 0.1 * in[i]) * (out[i] - 0.1 * in[i]);
    den += in[i] * in[i];
  }
  CHECK(std::sqrt(num / den) < 1e-6);

  sc_eigs* e = nullptr;
  REQUIRE(sc_eigs_near(A, 0.0, 0.0, 2, &e) == SC_OK);
  REQUIRE(sc_eigs_count(e) == 2);
  double lr, li, res;
  int mult;
  REQUIRE(sc_eigs_get(e, 0, &lr, &li, &res, &mult) == SC_OK);
  CHECK(lr == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(res <= 1e-8);
  std::vector<double> vec(2 * 128);
  CHECK(sc_eigs_vector(e, 0, 128, vec.data()) == SC_OK);
  CHECK(sc_eigs_vector(e, 5, 128, vec.data()) == SC_ERR_ARGUMENT);

  sc_eigs_free(e);
  sc_operator_free(A);
  sc_symbol_free(osc);
  sc_grid_free(g);
}

TEST_CASE("quadratic model spectrum JSON") {
  sc_symbol* q = nullptr;
  REQUIRE(sc_symbol_parse("xi^2 + x^2", 1, &q) == SC_OK);
  char* out = nullptr;
  REQUIRE(sc_quadratic_model_spectrum(q, 7.0, &out) == SC_OK);
  auto j = nlohmann::json::parse(take(out));
  REQUIRE(j["eigenvalues"].size() == 3);
  CHECK(double(j["eigenvalues"][0]["mu_re"]) == doctest::Approx(1.0).epsilon(1e-6));
  sc_symbol_free(q);
}

TEST_CASE("inline config run through the C API") {
  nlohmann::json cfg;
  cfg["name"] = "capi_smoke";
  cfg["symbol"] = {{"family", "oscillator"}};
  cfg["n"] = 1;
  cfg["grid"] = {{"L", 9.0}, {"N", 128}, {"variant", "spectral"}};
  cfg["sweep"] = {{"h_tilde", 0.5}, {"k_min", 0}, {"k_max", 3}};
  cfg["p_list"] = {2.0, "inf"};
  cfg["checks"] = {"assumptions", "moyal", "spectrum"};
  cfg["tolerances"] = {{"cluster_C", 2.0}};
  cfg["output_dir"] = "capi_test_out";
  char* summary = nullptr;
  int ok = 0;
  REQUIRE(sc_run_config_json(cfg.dump().c_str(), "capi_test_out", &summary, &ok) == SC_OK);
  auto j = nlohmann::json::parse(take(summary));
  CHECK(ok == 1);
  CHECK(j["all_passed"] == true);
  CHECK(j["verdicts"]["assumptions"] == true);
  CHECK(j["verdicts"]["moyal"] == true);
  CHECK(j["verdicts"]["spectrum"] == true);
}

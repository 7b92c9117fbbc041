#include "doctest.h"

#include <Eigen/Dense>

#include "families.hpp"
#include "polysymbol.hpp"

using namespace semiclass;
using namespace semiclass::symbols;

namespace {

PolySymbol rand_poly(Rng& rng, int dim, int max_deg, bool with_h = false) {
  PolySymbol p(dim);
  const int nslots = 2 * dim + (with_h ? 1 : 0);
  for (int t = 0; t < 6; ++t) {
    Expo e(size_t(2 * dim + 1), 0);
    int deg = rng.uniform_int(0, max_deg);
    for (int d = 0; d < deg; ++d) e[size_t(rng.uniform_int(0, nslots - 1))] += 1;
    CRat c(frac(rng.uniform_int(-12, 12), 1 + rng.uniform_int(0, 3)),
           frac(rng.uniform_int(-12, 12), 1 + rng.uniform_int(0, 3)));
    p.add_term(e, c);
  }
  return p;
}

}  // namespace

TEST_CASE("parser round trips and exact decimals") {
  auto p = parse("x^2 + xi^2", 1);
  PolySymbol want(1);
  want.add_term({2, 0, 0}, CRat(1));
  want.add_term({0, 2, 0}, CRat(1));
  CHECK(p == want);

  auto q = parse("0.3*x1 - 2e-2*xi1 + 1.5i", 1);
  auto it = q.terms().find(Expo{1, 0, 0});
  REQUIRE(it != q.terms().end());
  CHECK(it->second.re == Rat(3, 10));  // exact rational, not a rounded double

  CHECK(parse("x", 1) == parse("x1", 1));
  CHECK(parse("xi", 1) == parse("xi1", 1));
  CHECK_THROWS_AS(parse("x3", 2), Error);
  CHECK_THROWS_AS(parse("x1 + ", 1), Error);
  CHECK_THROWS_AS(parse("foo", 1), Error);

  // complex literal a+bi
  auto z = parse("2+3i", 1);
  CHECK(z.value_at0() == CRat(Rat(2), Rat(3)));
}

TEST_CASE("polynomial ring laws hold exactly") {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    int dim = 1 + trial % 2;
    auto a = rand_poly(rng, dim, 3), b = rand_poly(rng, dim, 3), c = rand_poly(rng, dim, 2);
    CHECK((a + b) * c == a * c + b * c);
    CHECK(a * b == b * a);
    CHECK(a.derivative(0).derivative(dim) == a.derivative(dim).derivative(0));
  }
}

TEST_CASE("quadratic_part on polynomial symbols") {
  auto p1 = parse("xi^2 + x^2", 1);
  CHECK(quadratic_part(Symbol::of(p1)) == p1);

  auto p2 = parse("xi^2 + x^2 + i*x^3", 1);
  CHECK(quadratic_part(Symbol::of(p2)) == p1);

  // cross-term Hessian block eigenvalues {1, 1, 0.5, 1.5}
  auto p3 = parse("xi1^2 + xi2^2 + x1^2 + x2^2 + x1*x2", 2);
  auto q3 = quadratic_part(Symbol::of(p3));
  auto H = q3.hessian_at0();
  Eigen::MatrixXd ReQ(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) ReQ(i, j) = 0.5 * H[i][j].to_cplx().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ReQ);
  Eigen::Vector4d ev = es.eigenvalues();
  CHECK(ev(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ev(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ev(2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ev(3) == doctest::Approx(1.5).epsilon(1e-12));

  // idempotence
  CHECK(quadratic_part(Symbol::of(q3)) == q3);

  // not doubly characteristic
  CHECK_THROWS_AS(quadratic_part(Symbol::of(parse("x", 1))), Error);
  CHECK_THROWS_AS(quadratic_part(Symbol::of(parse("x^2 + 1", 1))), Error);
}

TEST_CASE("quadratic_part via finite differences matches the exact Hessian") {
  auto p = parse("xi^2 + 2*x^2 + x*xi + x^3 + i*x^2", 1);
  CallableSymbol cs;
  cs.dim = 1;
  cs.desc = "wrapped";
  PolySymbol pp = p;
  cs.f = [pp](const double* X) { return pp.eval(X); };
  auto q_fd = quadratic_part(Symbol::of(cs));
  auto q_exact = quadratic_part(Symbol::of(p));
  auto Hf = q_fd.hessian_at0();
  auto He = q_exact.hessian_at0();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      cplx a = Hf[i][j].to_cplx(), b = He[i][j].to_cplx();
      CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b)));
    }
}

TEST_CASE("remainder_part") {
  auto p1 = parse("xi^2 + x^2", 1);
  auto q1 = quadratic_part(Symbol::of(p1));
  CHECK(remainder_part(Symbol::of(p1), q1).poly->is_zero());

  auto p2 = parse("xi^2 + x^2 + i*x^3", 1);
  auto r2 = remainder_part(Symbol::of(p2), quadratic_part(Symbol::of(p2)));
  CHECK(*r2.poly == parse("i*x^3", 1));

  auto p3 = parse("xi^2 + x^4 + x^2", 1);
  auto r3 = remainder_part(Symbol::of(p3), quadratic_part(Symbol::of(p3)));
  CHECK(*r3.poly == parse("x^4", 1));
  double X[2] = {0.01, 0.0};
  double ratio = std::abs(r3.poly->eval(X)) / std::pow(0.01, 3);
  CHECK(ratio == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("check_assumptions: oscillator passes with the expected constants") {
  auto rep = check_assumptions(Symbol::of(families::quadratic_model("oscillator", 2)),
                               20.0, 4096);
  CHECK(rep.all_passed());
  CHECK(rep.nonneg_real_part);
  CHECK(rep.zero_set_ok);
  CHECK(rep.re_q_min_eig == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.lower_bound_C == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.ellipticity_constant > 0.95);  // |X|^2/<X>^2 over |X| >= 10
  // report JSON is well formed
  CHECK(rep.json().find("\"all_passed\": true") != std::string::npos);
}

TEST_CASE("check_assumptions: sign-indefinite symbol fails with a witness") {
  auto rep = check_assumptions(Symbol::of(parse("xi1^2 + xi2^2 - x1^2 - x2^2", 2)),
                               20.0, 2048);
  CHECK_FALSE(rep.nonneg_real_part);
  CHECK(rep.worst_re_violation < 0.0);
  CHECK_FALSE(rep.all_passed());
}

TEST_CASE("check_assumptions: complex tanh perturbation keeps the oscillator bounds") {
  auto sym = families::full_symbol("complex_perturbed_1d", 1);
  auto rep = check_assumptions(sym, 20.0, 4096);
  CHECK(rep.all_passed());
  CHECK(rep.re_q_min_eig == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.lower_bound_C == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("accepted symbols satisfy Re q >= re_q_min_eig |X|^2 on samples") {
  auto sym = families::full_symbol("complex_perturbed", 2);
  auto rep = check_assumptions(sym, 20.0, 1024);
  REQUIRE(rep.all_passed());
  auto q = families::quadratic_model("complex_perturbed", 2);
  Rng rng(7);
  for (int t = 0; t < 1000; ++t) {
    double X[4];
    double r2 = 0;
    for (auto& v : X) {
      v = 3.0 * rng.sym();
      r2 += v * v;
    }
    CHECK(q.eval(X).real() >= rep.re_q_min_eig * r2 - 1e-9);
  }
}

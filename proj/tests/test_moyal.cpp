#include "doctest.h"

#include "moyal.hpp"

using namespace semiclass;
using namespace semiclass::symbols;
using namespace semiclass::moyal;

namespace {

PolySymbol rand_poly(Rng& rng, int dim, int max_deg) {
  PolySymbol p(dim);
  for (int t = 0; t < 5; ++t) {
    Expo e(size_t(2 * dim + 1), 0);
    int deg = rng.uniform_int(0, max_deg);
    for (int d = 0; d < deg; ++d) e[size_t(rng.uniform_int(0, 2 * dim - 1))] += 1;
    p.add_term(e, CRat(frac(rng.uniform_int(-9, 9), 1 + rng.uniform_int(0, 2)),
                       frac(rng.uniform_int(-9, 9), 1 + rng.uniform_int(0, 2))));
  }
  return p;
}

// generic complex quadratic with positive definite real part
PolySymbol rand_elliptic_quadratic(Rng& rng, int dim) {
  PolySymbol q(dim);
  // diag-dominant real part plus small complex noise
  for (int i = 0; i < 2 * dim; ++i) {
    Expo e(size_t(2 * dim + 1), 0);
    e[size_t(i)] = 2;
    q.add_term(e, CRat(Rat(long(4 + rng.uniform_int(0, 4))),
                       frac(rng.uniform_int(-2, 2), 5)));
    for (int j = i + 1; j < 2 * dim; ++j) {
      Expo c(size_t(2 * dim + 1), 0);
      c[size_t(i)] = 1;
      c[size_t(j)] = 1;
      q.add_term(c, CRat(frac(rng.uniform_int(-2, 2), 3),
                         frac(rng.uniform_int(-2, 2), 4)));
    }
  }
  return q;
}

}  // namespace

TEST_CASE("sigma power terms against hand-expanded values") {
  auto x = parse("x", 1), xi = parse("xi", 1);
  // k=1: only (alpha,beta) = (0,e) survives for (a,b) = (x,xi): value 1
  CHECK(sigma_power_term(x, xi, 1) == PolySymbol::constant(1, CRat(1)));
}

TEST_CASE("sigma power term of a constant vanishes") {
  Rng rng(11);
  auto b = rand_poly(rng, 1, 3);
  CHECK(sigma_power_term(PolySymbol::constant(1, CRat(7)), b, 1).is_zero());
}

TEST_CASE("sigma^2(x^2, xi^2) = 4 (brute-force hand expansion)") {
  auto v = sigma_power_term(parse("x^2", 1), parse("xi^2", 1), 2);
  CHECK(v == PolySymbol::constant(1, CRat(4)));
}

TEST_CASE("star products of canonical pairs") {
  auto x = parse("x", 1), xi = parse("xi", 1);
  CHECK(star_product(x, xi) == parse("x*xi + 0.5*i*h", 1));
  CHECK(star_product(xi, x) == parse("x*xi - 0.5*i*h", 1));

  // Weyl ordering of x^2 xi^2: x^2#xi^2 = x^2 xi^2 + 2ih x xi - h^2/2
  CHECK(star_product(parse("x^2", 1), parse("xi^2", 1)) ==
        parse("x^2*xi^2 + 2*i*h*x*xi - 0.5*h^2", 1));

  // identity element
  Rng rng(13);
  for (int t = 0; t < 6; ++t) {
    auto b = rand_poly(rng, 1 + t % 2, 3);
    CHECK(star_product(PolySymbol::constant(b.dim(), CRat(1)), b) == b);
  }
}

TEST_CASE("termination at k = min(deg a, deg b)") {
  auto ex = star_expansion(parse("x^3", 1), parse("xi^2", 1));
  CHECK(ex.terms.size() == 3);  // k = 0, 1, 2
  CHECK_FALSE(ex.terms.back().second.is_zero());
}

TEST_CASE("star commutator of a quadratic with its powers vanishes exactly") {
  // the oscillator case
  auto q = parse("xi^2 + x^2", 1);
  for (int N = 1; N <= 4; ++N) CHECK(star_commutator(q, q.pow(N)).is_zero());
  // generic complex elliptic quadratics, n = 1 and n = 2
  Rng rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    auto qq = rand_elliptic_quadratic(rng, 1 + trial % 2);
    for (int N = 1; N <= 4; ++N) CHECK(star_commutator(qq, qq.pow(N)).is_zero());
  }
}

TEST_CASE("associativity is exact on random degree <= 3 triples") {
  Rng rng(19);
  for (int trial = 0; trial < 25; ++trial) {
    int dim = 1 + trial % 2;
    auto a = rand_poly(rng, dim, 3), b = rand_poly(rng, dim, 3), c = rand_poly(rng, dim, 3);
    CHECK(star_product(star_product(a, b), c) == star_product(a, star_product(b, c)));
  }
}

TEST_CASE("commutator-bracket law for degree <= 2 symbols") {
  // a#b - b#a = (h/i){a,b} exactly when both degrees are <= 2
  Rng rng(23);
  for (int trial = 0; trial < 12; ++trial) {
    int dim = 1 + trial % 2;
    auto a = rand_poly(rng, dim, 2), b = rand_poly(rng, dim, 2);
    auto lhs = star_commutator(a, b);
    auto rhs = (poisson_bracket(a, b) * PolySymbol::variable(dim, 2 * dim))
                   .scaled(-CRat::i_unit());
    CHECK(lhs == rhs);
  }
}

TEST_CASE("conjugation law with real formal h") {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    int dim = 1 + trial % 2;
    auto a = rand_poly(rng, dim, 3), b = rand_poly(rng, dim, 3);
    CHECK(star_product(a.conjugated(), b.conjugated()) ==
          star_product(b, a).conjugated());
  }
}

TEST_CASE("poisson bracket conventions") {
  auto x = parse("x", 1), xi = parse("xi", 1);
  CHECK(poisson_bracket(xi, x) == PolySymbol::constant(1, CRat(1)));
  Rng rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    auto a = rand_poly(rng, 1 + trial % 2, 3);
    CHECK(poisson_bracket(a, a).is_zero());
    CHECK(poisson_bracket(a, a * a * a).is_zero());  // {q, q^3}
  }
  // k=1 expansion term carries the opposite sign: sigma^1 = -{a,b}
  auto a = parse("x^2 + x*xi", 1), b = parse("xi^2 + x", 1);
  CHECK(sigma_power_term(a, b, 1) == -poisson_bracket(a, b));
}

TEST_CASE("numeric h substitution") {
  auto s = star_product(parse("x", 1), parse("xi", 1), CRat(Rat(1, 10)));
  PolySymbol want = parse("x*xi", 1);
  want.add_term(Expo{0, 0, 0}, CRat(Rat(0), Rat(1, 20)));
  CHECK(s == want);
}

#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "analysis.hpp"
#include "eigensolve.hpp"
#include "families.hpp"
#include "fft.hpp"
#include "hermite.hpp"
#include "moyal.hpp"
#include "quantize.hpp"

using namespace semiclass;
using namespace semiclass::quantize;
using symbols::parse;
using symbols::Symbol;

namespace {

VectorXcd gaussian_1d(const PhaseSpaceGrid& g, double width, double center = 0.0) {
  VectorXcd u(g.N);
  for (int j = 0; j < g.N; ++j) {
    double x = g.x_node(j) - center;
    u(j) = std::exp(-x * x / (2.0 * width * width));
  }
  return normalized(u, g);
}

double rel_err(const VectorXcd& a, const VectorXcd& b) {
  return (a - b).norm() / b.norm();
}

// adaptive Simpson for the radial-mass oracle
double simpson_oracle(const std::function<double(double)>& f, double a, double b,
                      int depth = 18) {
  auto rec = [&](auto&& self, double lo, double hi, double flo, double fmid, double fhi,
                 double whole, int d) -> double {
    double m = 0.5 * (lo + hi);
    double lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
    double flm = f(lm), frm = f(rm);
    double left = (m - lo) / 6 * (flo + 4 * flm + fmid);
    double right = (hi - m) / 6 * (fmid + 4 * frm + fhi);
    if (d <= 0 || std::abs(left + right - whole) < 1e-12)
      return left + right + (left + right - whole) / 15;
    return self(self, lo, m, flo, flm, fmid, left, d - 1) +
           self(self, m, hi, fmid, frm, fhi, right, d - 1);
  };
  double m = 0.5 * (a + b);
  return rec(rec, a, b, f(a), f(m), f(b), (b - a) / 6 * (f(a) + 4 * f(m) + f(b)), depth);
}

}  // namespace

TEST_CASE("x-only symbols quantize to exact multiplication operators") {
  PhaseSpaceGrid g(1, 6.0, 64, 0.1);
  auto A = weyl_quantize(Symbol::of(parse("x", 1)), g);
  for (int j = 0; j < g.N; ++j) {
    CHECK((*A.dense)(j, j).real() == doctest::Approx(g.x_node(j)).epsilon(1e-12));
    for (int k = 0; k < g.N; ++k)
      if (k != j) CHECK(std::abs((*A.dense)(j, k)) < 1e-12);
  }
}

TEST_CASE("xi quantizes to the spectral derivative") {
  PhaseSpaceGrid g(1, 8.0, 128, 0.1);
  auto A = weyl_quantize(Symbol::of(parse("xi", 1)), g);
  // plane wave on the dual grid is an exact eigenvector
  const int m = 5;
  const double k0 = g.xi_node(m);
  VectorXcd u(g.N);
  for (int j = 0; j < g.N; ++j) {
    double phase = k0 * g.x_node(j) / g.h;
    u(j) = cplx(std::cos(phase), std::sin(phase));
  }
  VectorXcd Au = A.apply(u);
  CHECK(rel_err(Au, VectorXcd(k0 * u)) < 1e-12);

  // and agrees with the FFT derivative on a smooth localized state
  VectorXcd w = gaussian_1d(g, 1.0);
  std::vector<cplx> buf(w.data(), w.data() + w.size());
  fft::forward(buf, {g.N});
  for (int i = 0; i < g.N; ++i)
    buf[size_t(i)] *= g.xi_node(i <= g.N / 2 - 1 ? i : i - g.N);
  fft::backward(buf, {g.N});
  VectorXcd oracle(g.N);
  for (int i = 0; i < g.N; ++i) oracle(i) = buf[size_t(i)] / double(g.N);
  CHECK(rel_err(A.apply(w), oracle) < 1e-8);
}

TEST_CASE("oscillator ground state energy h at the spec grid") {
  PhaseSpaceGrid g(1, 8.0, 256, 0.1);
  auto A = weyl_quantize(Symbol::of(parse("xi^2 + x^2", 1)), g);
  auto pairs = eig::eigs_near(A, 0.0, 1);
  CHECK(pairs[0].lam.real() == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(std::abs(pairs[0].lam.imag()) < 1e-10);
}

TEST_CASE("real symbols quantize to Hermitian matrices") {
  PhaseSpaceGrid g(1, 8.0, 128, 0.05);
  for (const char* expr : {"xi^2 + x^2", "x*xi", "x^2*xi^2 + x"}) {
    auto A = weyl_quantize(Symbol::of(parse(expr, 1)), g);
    double scale = A.dense->cwiseAbs().maxCoeff();
    CHECK((*A.dense - A.dense->adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
  auto As = weyl_quantize(families::full_symbol("sin_perturbed", 1), g);
  double scale = As.dense->cwiseAbs().maxCoeff();
  CHECK((*As.dense - As.dense->adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
}

TEST_CASE("linearity and symbol conjugation") {
  PhaseSpaceGrid g(1, 6.0, 64, 0.1);
  auto a = parse("x^2 + x*xi", 1), b = parse("xi^2 + i*x^3", 1);
  auto A = weyl_quantize(Symbol::of(a), g);
  auto B = weyl_quantize(Symbol::of(b), g);
  auto AB = weyl_quantize(Symbol::of(a + b.scaled(CRat(3))), g);
  double scale = AB.dense->cwiseAbs().maxCoeff();
  CHECK((*AB.dense - (*A.dense + 3.0 * *B.dense)).cwiseAbs().maxCoeff() <= 1e-12 * scale);

  auto Ac = weyl_quantize(Symbol::of(b.conjugated()), g);
  CHECK((*Ac.dense - B.dense->adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
}

TEST_CASE("schrodinger fast paths agree with midpoint-fft") {
  PhaseSpaceGrid g(1, 8.0, 256, 0.05);
  auto vw = families::potential_symbol("complex_perturbed_1d", 1);
  auto A1 = weyl_quantize(families::full_symbol("complex_perturbed_1d", 1), g);
  auto A2 = quantize_schrodinger(vw, g, "spectral");
  auto A3 = quantize_schrodinger(vw, g, "spectral-mf");
  VectorXcd u = gaussian_1d(g, std::sqrt(0.05));
  CHECK(rel_err(A2.apply(u), A1.apply(u)) < 1e-8);
  CHECK(rel_err(A3.apply(u), A1.apply(u)) < 1e-8);
  // fd8 is consistent to its stencil accuracy
  auto A4 = quantize_schrodinger(vw, g, "fd8");
  CHECK(rel_err(A4.apply(u), A1.apply(u)) < 1e-4);
}

TEST_CASE("2D oscillator spectrum through the sparse path") {
  PhaseSpaceGrid g(2, 3.0, 64, 0.05);
  auto A = quantize_schrodinger(families::potential_symbol("oscillator", 2), g, "fd8");
  auto pairs = eig::eigs_near(A, 0.0, 6);
  const double want[6] = {0.1, 0.2, 0.2, 0.3, 0.3, 0.3};
  for (int i = 0; i < 6; ++i) {
    CHECK(pairs[size_t(i)].lam.real() == doctest::Approx(want[i]).epsilon(1e-3));
    CHECK(std::abs(pairs[size_t(i)].lam.imag()) < 1e-10);
  }
  // Hermitian part split: odd W makes the operator complex-symmetric, not
  // Hermitian, and its Hermitian part is the quantization of |xi|^2 + V
  auto Aw = quantize_schrodinger(families::potential_symbol("complex_perturbed", 2), g,
                                 "fd8");
  Eigen::MatrixXcd D(*Aw.sparse);
  CHECK((D - D.transpose()).cwiseAbs().maxCoeff() < 1e-12 * D.cwiseAbs().maxCoeff());
  CHECK((D - D.adjoint()).cwiseAbs().maxCoeff() > 1e-6);
  symbols::CallableSymbol vonly;
  vonly.dim = 2;
  vonly.desc = "Re potential";
  auto vw2 = families::potential_symbol("complex_perturbed", 2);
  vonly.f = [vw2](const double* X) { return cplx(vw2.eval(X).real(), 0.0); };
  auto Av = quantize_schrodinger(Symbol::of(std::move(vonly)), g, "fd8");
  Eigen::MatrixXcd Dv(*Av.sparse);
  CHECK((0.5 * (D + D.adjoint()) - Dv).cwiseAbs().maxCoeff() <
        1e-12 * D.cwiseAbs().maxCoeff());
}

TEST_CASE("star-product compatibility at quadratic order") {
  PhaseSpaceGrid g(1, 8.0, 256, 0.1);
  auto a = parse("x + xi", 1), b = parse("x*xi + x^2", 1);
  auto Aa = weyl_quantize(Symbol::of(a), g);
  auto Ab = weyl_quantize(Symbol::of(b), g);
  auto st = moyal::star_product(a, b, CRat(rat_of_double(g.h)));
  auto Ast = weyl_quantize(Symbol::of(st), g);
  VectorXcd u = gaussian_1d(g, 1.0);
  VectorXcd lhs = Aa.apply(Ab.apply(u));
  CHECK(rel_err(lhs, Ast.apply(u)) < 1e-6);
}

TEST_CASE("cutoff quantization") {
  PhaseSpaceGrid g(1, 8.0, 256, 0.02);
  // degenerate cutoff: chi == 1 on the sampled box gives the identity
  auto one = cutoff_quantize(Symbol::of(symbols::PolySymbol::constant(1, CRat(1))), 1.0, g);
  CHECK((*one.dense - Eigen::MatrixXcd::Identity(g.N, g.N)).cwiseAbs().maxCoeff() < 1e-10);

  // standard bump at scale 1 fixes the ground state at h = 0.02
  auto Q = cutoff_quantize(families::chi_cutoff(1), 1.0, g);
  CHECK(Q.norm_estimate <= 1.1);
  auto u0 = hermite::sample_state({0}, 0.02, g);
  CHECK(l2_norm(VectorXcd(Q.apply(u0) - u0), g) <= 1e-6);

  // unresolvable scale
  CHECK_THROWS_AS(cutoff_quantize(families::chi_cutoff(1), 1e-4, g), Error);
}

TEST_CASE("microlocal mass against the radial Wigner-tail oracle") {
  // Radial cutoffs commute with the oscillator flow, so Op(1-psi(X/s)) is
  // diagonal on Hermite functions: its ground diagonal entry is the integral
  // of (1-psi(|X|/s)) against the Gaussian Wigner weight (2 rho/h) e^{-rho^2/h}.
  const double h = 0.05;
  const double s = std::pow(h, 0.4);
  PhaseSpaceGrid g(1, 10.0, 512, h);
  auto u0 = hermite::sample_state({0}, h, g);
  double mass = analysis::microlocal_mass(u0, families::psi_cutoff(1), 0.4, h, g);
  auto integrand = [&](double rho) {
    return (1.0 - families::smoothstep_down(rho / s, 2.0, 3.0)) * (2.0 * rho / h) *
           std::exp(-rho * rho / h);
  };
  double oracle = simpson_oracle(integrand, 0.0, 12.0);
  CHECK(mass == doctest::Approx(oracle).epsilon(2e-3));
  CHECK(mass <= h * h);
}

TEST_CASE("rescaling unitary") {
  const double h = 0.05, ht = 0.5;
  ScalingParams sp{h, ht, 0.4};
  PhaseSpaceGrid gh(1, 6.0, 256, h);
  PhaseSpaceGrid gt = rescaled_grid(gh, sp);
  CHECK(gt.h == ht);

  // Gaussian of width sqrt(h) maps to a Gaussian of width sqrt(ht)
  VectorXcd u = gaussian_1d(gh, std::sqrt(h));
  VectorXcd v = rescale_state(u, gh, gt, sp.eps(), +1);
  VectorXcd want = gaussian_1d(gt, std::sqrt(ht));
  CHECK(rel_err(v, want) < 1e-10);
  CHECK(l2_norm(v, gt) == doctest::Approx(l2_norm(u, gh)).epsilon(1e-10));

  // eps = 1 is the identity
  VectorXcd w = rescale_state(u, gh, gh, 1.0, +1);
  CHECK(rel_err(w, u) < 1e-14);

  // unitarity for localized band-limited noise through real interpolation
  PhaseSpaceGrid gt2(1, 12.0, 256, ht);  // non-commensurate target box
  Rng rng(41);
  std::vector<cplx> spec(size_t(gh.N), cplx(0, 0));
  for (int i = 0; i < gh.N; ++i) {
    int m = i <= gh.N / 2 - 1 ? i : i - gh.N;
    if (std::abs(m) <= gh.N / 6) spec[size_t(i)] = rng.cnormalish();
  }
  fft::backward(spec, {gh.N});
  VectorXcd noise(gh.N);
  for (int j = 0; j < gh.N; ++j) {
    double x = gh.x_node(j);
    noise(j) = spec[size_t(j)] * std::exp(-x * x / 2.0);  // window inside the mapped box
  }
  noise = normalized(noise, gh);
  VectorXcd nv = rescale_state(noise, gh, gt2, sp.eps(), +1);
  CHECK(l2_norm(nv, gt2) == doctest::Approx(1.0).epsilon(1e-4));

  // out-of-range interpolation is refused
  PhaseSpaceGrid far(1, 40.0, 256, ht);
  CHECK_THROWS_AS(rescale_state(u, gh, far, sp.eps(), +1), Error);
}

TEST_CASE("conjugation identity between the h and h-tilde quantizations") {
  ScalingParams sp{0.05, 0.5, 0.4};
  PhaseSpaceGrid gh(1, 10.0, 512, 0.05);

  // multiplication symbols are exact simultaneously
  CHECK(conjugation_check(Symbol::of(parse("x", 1)), sp, gh, rescaled_grid(gh, sp)) <
        1e-10);

  // oscillator on the commensurate rescaled grid
  CHECK(conjugation_check(Symbol::of(parse("xi^2 + x^2", 1)), sp, gh,
                          rescaled_grid(gh, sp)) < 1e-5);

  // same box ratio but a finer target grid exercises true interpolation
  PhaseSpaceGrid gt(1, 10.0 / std::sqrt(sp.eps()), 1024, 0.5);
  CHECK(conjugation_check(Symbol::of(parse("xi^2 + x^2", 1)), sp, gh, gt) < 1e-5);

  // 2D
  ScalingParams sp2{0.1, 0.5, 0.4};
  PhaseSpaceGrid gh2(2, 4.0, 48, 0.1);
  CHECK(conjugation_check(Symbol::of(parse("x1^2 + x2^2 + xi1^2 + xi2^2", 2)), sp2, gh2,
                          rescaled_grid(gh2, sp2)) < 1e-4);
}

TEST_CASE("matrix-free polynomial Weyl apply matches dense midpoint-fft") {
  PhaseSpaceGrid g(1, 8.0, 128, 0.1);
  VectorXcd u = gaussian_1d(g, 0.8);
  for (const char* expr :
       {"x", "xi", "x*xi", "x^2*xi^2 + x^3", "xi^4 + 2*x^2*xi^2 + x^4 + i*x*xi"}) {
    auto p = parse(expr, 1);
    auto A = weyl_quantize(Symbol::of(p), g);
    CHECK(rel_err(apply_weyl_poly(p, 1.0, g, u), A.apply(u)) < 1e-8);
  }
  // argument rescaling: p(X/s)
  auto p = parse("xi^2 + x^2", 1);
  const double s = 0.35;
  symbols::CallableSymbol scaled;
  scaled.dim = 1;
  scaled.desc = "osc scaled";
  scaled.f = [s](const double* X) {
    return cplx((X[0] * X[0] + X[1] * X[1]) / (s * s), 0.0);
  };
  auto As = weyl_quantize(Symbol::of(scaled), g);
  CHECK(rel_err(apply_weyl_poly(p, s, g, u), As.apply(u)) < 1e-8);

  // 2D
  PhaseSpaceGrid g2(2, 5.0, 32, 0.2);
  VectorXcd u2(g2.points());
  for (int j1 = 0; j1 < g2.N; ++j1)
    for (int j2 = 0; j2 < g2.N; ++j2) {
      double x1 = g2.x_node(j1), x2 = g2.x_node(j2);
      u2(long(j1) * g2.N + j2) = std::exp(-(x1 * x1 + x2 * x2) / 1.5);
    }
  u2 = normalized(u2, g2);
  auto q2 = parse("x1^2 + x2^2 + xi1^2 + xi2^2", 2);
  auto A2 = weyl_quantize(Symbol::of(q2.pow(2)), g2);
  CHECK(rel_err(apply_weyl_poly(q2.pow(2), 1.0, g2, u2), A2.apply(u2)) < 1e-6);
}

TEST_CASE("operator save/load round trip") {
  PhaseSpaceGrid g(1, 6.0, 64, 0.1);
  auto A = weyl_quantize(Symbol::of(parse("xi^2 + x^2 + i*x^3", 1)), g);
  std::string path = "test_op_dense.scop";
  save_operator(A, path);
  auto B = load_operator(path);
  CHECK(B.method == A.method);
  CHECK(B.grid.same_layout(A.grid));
  CHECK((*B.dense - *A.dense).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());

  auto S = quantize_schrodinger(families::potential_symbol("oscillator", 2),
                                PhaseSpaceGrid(2, 3.0, 32, 0.1), "fd4");
  std::string spath = "test_op_sparse.scop";
  save_operator(S, spath);
  auto T = load_operator(spath);
  CHECK(T.is_sparse());
  Eigen::MatrixXcd d1(*S.sparse), d2(*T.sparse);
  CHECK((d1 - d2).cwiseAbs().maxCoeff() == 0.0);
  std::remove(spath.c_str());
}

TEST_CASE("non-finite symbol values are rejected") {
  symbols::CallableSymbol bad;
  bad.dim = 1;
  bad.desc = "pole at the origin";
  bad.f = [](const double* X) { return cplx(1.0 / X[0], 0.0); };
  PhaseSpaceGrid g(1, 4.0, 64, 0.1);  // x = 0 is a grid node
  CHECK_THROWS_AS(weyl_quantize(Symbol::of(std::move(bad)), g), Error);
}

TEST_CASE("grid guards") {
  CHECK_THROWS_AS(PhaseSpaceGrid(3, 4.0, 64, 0.1), Error);
  CHECK_THROWS_AS(PhaseSpaceGrid(1, 4.0, 63, 0.1), Error);
  PhaseSpaceGrid g(1, 4.0, 64, 0.1);
  CHECK(g.h_floor() == doctest::Approx(0.0625));
  CHECK(g.h_min_hard() == doctest::Approx(0.015625));
  CHECK_THROWS_AS(g.require_momentum(1e9), Error);
  // 2D dense midpoint is capped at N = 64
  CHECK_THROWS_AS(weyl_quantize(Symbol::of(parse("x1", 2)), PhaseSpaceGrid(2, 4.0, 96, 0.1)),
                  Error);
}

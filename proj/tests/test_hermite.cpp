#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>

#include "analysis.hpp"
#include "hermite.hpp"

using namespace semiclass;
using namespace semiclass::hermite;

namespace {

// Gauss-Hermite nodes/weights by Golub-Welsch (test-local oracle)
void gauss_hermite(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k < m; ++k) J(k - 1, k) = J(k, k - 1) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(size_t(m));
  weights.resize(size_t(m));
  for (int i = 0; i < m; ++i) {
    nodes[size_t(i)] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    weights[size_t(i)] = std::sqrt(M_PI) * v0 * v0;
  }
}

}  // namespace

TEST_CASE("oscillator eigenvalue formula") {
  CHECK(oscillator_eigenvalue({0, 0}, 0.1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(oscillator_eigenvalue({1, 2}, 0.05) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(oscillator_eigenvalue({3}, 0.0) == 0.0);
  CHECK_THROWS_AS(oscillator_eigenvalue({-1}, 0.1), Error);
}

TEST_CASE("state evaluation") {
  OscillatorState g{{0}, 0.07};
  double x0 = 0.0;
  CHECK(g.eval(&x0) == doctest::Approx(std::pow(M_PI * 0.07, -0.25)).epsilon(1e-14));
  OscillatorState e1{{1}, 0.07};
  CHECK(e1.eval(&x0) == 0.0);
  // overflow guard deep in the tail
  double far = 60.0;
  CHECK(OscillatorState{{2}, 1e-3}.eval(&far) == 0.0);
}

TEST_CASE("orthonormality via Gauss-Hermite quadrature") {
  std::vector<double> t, w;
  gauss_hermite(40, t, w);
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b) {
      double acc = 0;
      for (size_t i = 0; i < t.size(); ++i) {
        double pa = hermite_fn(a, t[i]) * std::exp(0.5 * t[i] * t[i]);
        double pb = hermite_fn(b, t[i]) * std::exp(0.5 * t[i] * t[i]);
        acc += w[i] * pa * pb;
      }
      CHECK(acc == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("closed-form L^p constants") {
  // p = 2 normalization is exact
  CHECK(lp_norm_exact({2, 1}, 0.37, 2.0) == 1.0);
  // ground-state sup in n = 2: (pi h)^(-1/2)
  CHECK(lp_norm_exact({0, 0}, 0.01, INFINITY) ==
        doctest::Approx(1.0 / std::sqrt(M_PI * 0.01)).epsilon(1e-9));
  // ground state, n = 1, p = 4: C0 = pi^{-1/4} (pi/2)^{1/8}
  double c0 = lp_constant({0}, 4.0);
  CHECK(c0 == doctest::Approx(std::pow(M_PI, -0.25) * std::pow(M_PI / 2.0, 0.125))
                  .epsilon(1e-9));
  CHECK(c0 == doctest::Approx(0.7947).epsilon(1e-4));
  // first excited state (odd, zero at the origin): int |phi_1|^4 = 3/(4 pi) sqrt(pi/2)
  double c1 = lp_constant({1}, 4.0);
  CHECK(c1 == doctest::Approx(std::pow(3.0 / (4.0 * M_PI) * std::sqrt(M_PI / 2.0), 0.25))
                  .epsilon(1e-9));
  CHECK_THROWS_AS(lp_norm_exact({0}, 0.1, 1.5), Error);
}

TEST_CASE("h-scaling identity is exact (C_alpha cancels)") {
  for (double p : {2.0, 4.0, 6.0, double(INFINITY)}) {
    for (std::vector<int> alpha : {std::vector<int>{1, 2}, std::vector<int>{0, 3}}) {
      double h1 = 0.7, h2 = 0.013;
      double lhs = lp_norm_exact(alpha, h1, p) / lp_norm_exact(alpha, h2, p);
      double rhs = std::pow(h1 / h2, lp_exponent(2, p));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("exponent endpoints") {
  CHECK(lp_exponent(1, 2.0) == 0.0);
  CHECK(lp_exponent(2, 2.0) == 0.0);
  CHECK(lp_exponent(2, INFINITY) == doctest::Approx(-0.5));
  CHECK(lp_exponent(1, INFINITY) == doctest::Approx(-0.25));
}

TEST_CASE("grid L^p norms of sampled states match the closed forms") {
  quantize::PhaseSpaceGrid g(1, 10.0, 512, 0.04);
  auto u = sample_state({0}, 0.04, g);
  CHECK(analysis::lp_norm_grid(u, g, 2.0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(analysis::sup_norm_refined(u, g) ==
        doctest::Approx(std::pow(M_PI * 0.04, -0.25)).epsilon(1e-8));
  CHECK(analysis::lp_norm_grid(u, g, 4.0) ==
        doctest::Approx(lp_norm_exact({0}, 0.04, 4.0)).epsilon(1e-8));
  // an excited state with an off-node maximum
  auto u3 = sample_state({3}, 0.04, g);
  CHECK(analysis::sup_norm_refined(u3, g) ==
        doctest::Approx(lp_norm_exact({3}, 0.04, INFINITY)).epsilon(1e-7));
}

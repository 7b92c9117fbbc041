#pragma once

// Exact harmonic-oscillator oracle.  Eigenfunctions are carried through the
// L^2-normalized Hermite-function recurrence
//   phi_0(y) = pi^{-1/4} e^{-y^2/2},
//   phi_{k+1}(y) = sqrt(2/(k+1)) y phi_k(y) - sqrt(k/(k+1)) phi_{k-1}(y),
// so u_alpha(h)(x) = h^{-n/4} prod_j phi_{alpha_j}(x_j/sqrt(h)) and the L^p
// constants factor per axis.  This module is the closed-form reference every
// numerical path is validated against.

#include <vector>

#include "grid.hpp"
#include "util.hpp"

#include <Eigen/Dense>

namespace semiclass::hermite {

struct OscillatorState {
  std::vector<int> alpha;
  double h = 1.0;
  int n() const { return int(alpha.size()); }
  double eval(const double* x) const;  // x has length n
};

// lambda_alpha(h) = (2|alpha| + n) h; h = 0 accepted for formula tests.
double oscillator_eigenvalue(const std::vector<int>& alpha, double h);

// phi_k(y), numerically stable for k <= 20; underflow guard far in the tail.
double hermite_fn(int k, double y);

// ||u_alpha(h)||_p = C_alpha h^{n/(2p) - n/4} with
// C_alpha = (int |p_alpha|^p e^{-|x|^2 p/2})^{1/p}; C cached per (alpha, p).
// p in [2, inf]; pass INFINITY for the sup norm.
double lp_norm_exact(const std::vector<int>& alpha, double h, double p);

// the C_alpha factor alone (h-independent)
double lp_constant(const std::vector<int>& alpha, double p);

// decay exponent n/(2p) - n/4 (value 0 at p = 2, -n/4 at p = inf)
double lp_exponent(int n, double p);

// samples u_alpha(h) on a grid (alpha length must equal grid.n)
Eigen::VectorXcd sample_state(const std::vector<int>& alpha, double h,
                              const quantize::PhaseSpaceGrid& g);

}  // namespace semiclass::hermite

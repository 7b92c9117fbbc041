#pragma once

// Discretization of Op_h^w(a) on phase-space grids.
//
// The general path samples the symbol at midpoints (x_j+x_k)/2 and momentum
// nodes xi_m and evaluates the (j-k) offset sum with FFTs; with xi_m on the
// FFT-dual grid the quadrature prefactors collapse to 1/N^n, and the momentum
// Nyquist mode is symmetrized so real symbols give exactly Hermitian
// matrices.  Schrodinger symbols |xi|^2 + V + iW get fast paths: an assembled
// spectral kinetic matrix, a matrix-free FFT apply, or sparse central finite
// differences of order 2..8 for the 2D eigensolver.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <string>

#include "grid.hpp"
#include "polysymbol.hpp"

namespace semiclass::quantize {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using SparseC = Eigen::SparseMatrix<cplx>;

struct OperatorMatrix {
  PhaseSpaceGrid grid;
  std::string method;       // midpoint-fft | schrodinger-spectral |
                            // schrodinger-spectral-mf | schrodinger-fd<o>
  std::string symbol_desc;
  std::shared_ptr<const MatrixXcd> dense;
  std::shared_ptr<const SparseC> sparse;
  std::function<VectorXcd(const VectorXcd&)> applyfn;  // matrix-free path
  double norm_estimate = -1.0;  // sampled operator-norm estimate, if computed

  bool is_dense() const { return dense != nullptr; }
  bool is_sparse() const { return sparse != nullptr; }
  bool is_matrix_free() const { return !dense && !sparse; }
  size_t rows() const { return grid.points(); }
  VectorXcd apply(const VectorXcd& u) const;
};

struct ScalingParams {
  double h = 0.05;
  double h_tilde = 0.5;
  double delta = 0.4;  // microlocal scale exponent, in (0, 1/2)
  double eps() const { return h / h_tilde; }

  void validate() const {
    if (!(h > 0 && h <= h_tilde && h_tilde <= 1.0))
      fail(SC_ERR_ARGUMENT, "scaling params need 0 < h <= h_tilde <= 1");
    if (!(delta > 0.0 && delta < 0.5))
      fail(SC_ERR_ARGUMENT, "delta must lie in (0, 1/2)");
  }
};

// General midpoint-FFT quantization (dense).  2D is restricted to N <= 64 per
// axis; larger requests are a resource error, use the Schrodinger paths.
OperatorMatrix weyl_quantize(const symbols::Symbol& a, const PhaseSpaceGrid& grid);

// -h^2 Laplacian + V(x) + iW(x).  vw evaluates V+iW on the position grid (it
// must not depend on xi).  variant: "spectral" (dense, 2D needs N <= 64),
// "spectral-mf" (matrix-free apply), "fd2"|"fd4"|"fd6"|"fd8" (sparse).
OperatorMatrix quantize_schrodinger(const symbols::Symbol& vw, const PhaseSpaceGrid& grid,
                                    const std::string& variant);

// Op_h^w(chi(X/scale)) for a compactly supported cutoff with values in [0,1].
// Rejects scales under twice the grid resolution; stores a sampled operator
// norm estimate (sharp Garding slack: expect <= 1 + 0.1).
OperatorMatrix cutoff_quantize(const symbols::Symbol& chi, double scale,
                               const PhaseSpaceGrid& grid);

double operator_norm_estimate(const OperatorMatrix& A, int iters = 48);

// ---- two-parameter rescaling ----------------------------------------------

// Grid for the x = sqrt(eps) x~ substitution: same N, box L/sqrt(eps),
// parameter h_tilde.
PhaseSpaceGrid rescaled_grid(const PhaseSpaceGrid& g, const ScalingParams& sp);

// (Uu)(x~) = eps^{n/4} u(sqrt(eps) x~) by band-limited (trigonometric)
// interpolation; unitary on L^2 up to spectral truncation.  direction +1
// applies U (src = h grid, dst = h~ grid), -1 applies U^{-1}.
VectorXcd rescale_state(const VectorXcd& u, const PhaseSpaceGrid& src,
                        const PhaseSpaceGrid& dst, double eps, int direction);

// max over a fixed test-vector set of the relative L^2 defect of
// Op_h(a) = U^{-1} Op_h~(a(sqrt(eps) .)) U on grid_h.
double conjugation_check(const symbols::Symbol& a, const ScalingParams& sp,
                         const PhaseSpaceGrid& grid_h, const PhaseSpaceGrid& grid_ht);

// ---- polynomial Weyl apply (matrix-free) -----------------------------------

// Applies Op_h^w(p(X/arg_scale)) to u via the symmetrized monomial expansion
// (x-multiplications and FFT derivative powers), grouping FFTs by monomial
// x-power.  Exact Weyl ordering per monomial; agrees with midpoint-fft to
// spectral accuracy on band-limited states.
VectorXcd apply_weyl_poly(const symbols::PolySymbol& p, double arg_scale,
                          const PhaseSpaceGrid& grid, const VectorXcd& u);

// ---- band-limited evaluation helpers ---------------------------------------

// Values of the trig interpolant of u at the tensor grid pts[0] x ... (one
// vector of target coordinates per axis).
VectorXcd trig_eval_tensor(const VectorXcd& u, const PhaseSpaceGrid& g,
                           const std::vector<std::vector<double>>& pts);

// ---- grid-weighted norms ----------------------------------------------------

double l2_norm(const VectorXcd& u, const PhaseSpaceGrid& g);
VectorXcd normalized(const VectorXcd& u, const PhaseSpaceGrid& g);

// ---- persistence -------------------------------------------------------------

void save_operator(const OperatorMatrix& A, const std::string& path);
OperatorMatrix load_operator(const std::string& path);

}  // namespace semiclass::quantize

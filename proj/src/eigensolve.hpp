#pragma once

// Eigenvalue clusters of discretized (generally non-normal) operators near a
// target.  Dense Hermitian matrices go through the self-adjoint solver, small
// dense general matrices through Hessenberg-QR, everything else through
// shift-invert Arnoldi (restarted, Krylov dimension 3k+10, Schur-vector
// locking) with a sparse or dense LU of (A - sigma).  Residuals are always
// verified against the original matrix; for non-normal operators the residual
// is the honest accuracy measure, so it is the acceptance quantity.

#include <Eigen/Dense>

#include <vector>

#include "polysymbol.hpp"
#include "quantize.hpp"

namespace semiclass::eig {

using quantize::OperatorMatrix;
using quantize::PhaseSpaceGrid;
using Eigen::VectorXcd;

struct EigenPair {
  cplx lam;
  VectorXcd vec;  // grid-weighted L^2 norm 1, largest component real positive
  double residual = 0.0;
  int multiplicity_hint = 1;
};

struct SolveOptions {
  double residual_tol_dense = 1e-8;
  double residual_tol_sparse = 1e-6;
  int max_restarts = 24;
  int dense_qr_limit = 320;  // Hessenberg-QR above this is slower than Arnoldi
};

// k eigenpairs nearest target, ordered by (|lam-target|, Im, Re) ascending.
std::vector<EigenPair> eigs_near(const OperatorMatrix& A, cplx target, int k,
                                 const SolveOptions& opt = {});

// all eigenvalues with |lam| < C h; k grows until the cluster is exhausted
// (next eigenvalue at |lam| >= 1.05 C h), capped at 40.
std::vector<EigenPair> ground_cluster(const OperatorMatrix& A, double C, double h,
                                      const SolveOptions& opt = {});

struct ModelEigenvalue {
  cplx mu;
  int multiplicity;
};

// eigenvalues of Op_1^w(q) in D(0,C) for an exact quadratic q with positive
// definite Re q, clustered with multiplicities (relative tolerance 1e-6)
std::vector<ModelEigenvalue> quadratic_model_spectrum(const symbols::PolySymbol& q,
                                                      double C);

struct LeadingOrderRow {
  double h;
  cplx lambda;
  cplx mu;
  double deviation;  // |lambda/h - mu|
  bool ambiguous;    // pairing distance exceeded half the model gap
};

// matches ground clusters of the family against h*mu_k by nearest pairing
std::vector<LeadingOrderRow> leading_order_check(
    const std::function<OperatorMatrix(double)>& family, const symbols::PolySymbol& q,
    const std::vector<double>& h_list, double C);

// binary-vector + JSON-header persistence for eigenpair sets
void save_pairs(const std::vector<EigenPair>& pairs, const PhaseSpaceGrid& g,
                const std::string& path);
std::pair<std::vector<EigenPair>, PhaseSpaceGrid> load_pairs(const std::string& path);

}  // namespace semiclass::eig

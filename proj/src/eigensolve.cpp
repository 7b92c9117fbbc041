#include "eigensolve.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>

#include "json.hpp"

namespace semiclass::eig {

using quantize::SparseC;
using Eigen::MatrixXcd;

namespace {

struct ShiftedSolver {
  std::unique_ptr<Eigen::PartialPivLU<MatrixXcd>> dlu;
  std::unique_ptr<Eigen::SparseLU<SparseC>> slu;
  std::unique_ptr<SparseC> skeep;  // SparseLU keeps a reference to its matrix
  bool singular = false;

  VectorXcd solve(const VectorXcd& b) const {
    if (dlu) return dlu->solve(b);
    return slu->solve(b);
  }
};

ShiftedSolver factorize_shifted(const OperatorMatrix& A, cplx sigma) {
  ShiftedSolver s;
  const long n = long(A.rows());
  if (A.is_dense()) {
    MatrixXcd M = *A.dense;
    M.diagonal().array() -= sigma;
    s.dlu = std::make_unique<Eigen::PartialPivLU<MatrixXcd>>(M);
    const auto& diag = s.dlu->matrixLU().diagonal();
    double dmax = 0, dmin = std::numeric_limits<double>::infinity();
    for (long i = 0; i < n; ++i) {
      double a = std::abs(diag(i));
      dmax = std::max(dmax, a);
      dmin = std::min(dmin, a);
    }
    s.singular = !(dmax > 0) || dmin < 1e-14 * dmax;
  } else if (A.is_sparse()) {
    s.skeep = std::make_unique<SparseC>(*A.sparse);
    SparseC I(n, n);
    I.setIdentity();
    *s.skeep = *s.skeep - sigma * I;
    s.slu = std::make_unique<Eigen::SparseLU<SparseC>>();
    s.slu->compute(*s.skeep);
    s.singular = s.slu->info() != Eigen::Success;
  } else {
    fail(SC_ERR_ARGUMENT, "eigensolve needs an assembled (dense or sparse) operator");
  }
  return s;
}

VectorXcd start_vector(long n, uint64_t seed) {
  Rng rng(seed);
  VectorXcd v(n);
  for (long i = 0; i < n; ++i) v(i) = rng.cnormalish();
  v.normalize();
  return v;
}

double plain_residual(const OperatorMatrix& A, cplx lam, const VectorXcd& x) {
  return (A.apply(x) - lam * x).norm();  // x has unit 2-norm
}

struct Candidate {
  cplx lam;
  VectorXcd vec;
  double res;
};

bool canonical_less(cplx a, cplx b, cplx target) {
  double da = std::abs(a - target), db = std::abs(b - target);
  if (da != db) return da < db;
  if (a.imag() != b.imag()) return a.imag() < b.imag();
  return a.real() < b.real();
}

// Restarted shift-invert Arnoldi with Schur-vector locking.  Non-normal
// matrices have non-orthogonal eigenvectors, so a candidate built in the
// orthogonal complement of the locked subspace is a Schur vector: it is
// accepted on its projected residual, the coupling column goes into the
// triangular factor R, and eigenvectors are assembled from (Q, R) at the end
// and verified against the original operator.
std::vector<Candidate> arnoldi_shift_invert(const OperatorMatrix& A, cplx target, int k,
                                            double tol, const SolveOptions& opt) {
  const long n = long(A.rows());
  cplx sigma = target;
  ShiftedSolver solver = factorize_shifted(A, sigma);
  if (solver.singular) {
    // shift sits on a discrete eigenvalue; nudge and retry once
    sigma += cplx(1e-12 * (1.0 + std::abs(sigma)), 0.0);
    solver = factorize_shifted(A, sigma);
    if (solver.singular) fail(SC_ERR_CONVERGENCE, "shifted operator is numerically singular");
  }
  auto reshift = [&](double amount) {
    // a shift within rounding distance of an eigenvalue poisons every solve
    // with kappa*eps noise; back off once the targeted pair is locked
    sigma += cplx(amount * (1.0 + std::abs(sigma)), 0.0);
    solver = factorize_shifted(A, sigma);
    if (solver.singular) {
      sigma += cplx(3.7 * amount * (1.0 + std::abs(sigma)), 0.0);
      solver = factorize_shifted(A, sigma);
    }
  };

  const int m = int(std::min<long>(n, 3 * k + 10));
  std::vector<VectorXcd> Q;  // orthonormal Schur basis, A Q = Q R + O(tol)
  MatrixXcd R = MatrixXcd::Zero(k, k);

  auto project_out_locked = [&](VectorXcd& w) {
    for (const auto& q : Q) w -= q * q.dot(w);
  };

  VectorXcd v = start_vector(n, 0x5eedbeefULL);
  double best_missed = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    if ((restart == 8 || restart == 16) && int(Q.size()) < k) reshift(1e-6);
    project_out_locked(v);
    if (v.norm() < 1e-12) v = start_vector(n, 0xabcdef11ULL + uint64_t(restart));
    project_out_locked(v);
    v.normalize();

    std::vector<VectorXcd> V;
    V.push_back(v);
    MatrixXcd H = MatrixXcd::Zero(m + 1, m);
    int steps = m;
    for (int j = 0; j < m; ++j) {
      VectorXcd w = solver.solve(V[size_t(j)]);
      project_out_locked(w);
      for (int pass = 0; pass < 2; ++pass)  // MGS with one re-orthogonalization
        for (int i = 0; i <= j; ++i) {
          cplx c = V[size_t(i)].dot(w);
          H(i, j) += c;
          w -= V[size_t(i)] * c;
        }
      double nw = w.norm();
      H(j + 1, j) = nw;
      if (nw < 1e-13) {
        steps = j + 1;  // invariant subspace found
        break;
      }
      V.push_back(w / nw);
    }

    Eigen::ComplexEigenSolver<MatrixXcd> ces(H.topLeftCorner(steps, steps));
    std::vector<std::pair<cplx, int>> ritz;
    for (int i = 0; i < steps; ++i) {
      cplx theta = ces.eigenvalues()(i);
      if (std::abs(theta) < 1e-14) continue;  // spurious / far from shift
      ritz.emplace_back(sigma + 1.0 / theta, i);
    }
    std::stable_sort(ritz.begin(), ritz.end(), [&](const auto& a, const auto& b) {
      return canonical_less(a.first, b.first, target);
    });

    best_missed = std::numeric_limits<double>::infinity();
    std::vector<int> missed;
    for (const auto& [lam, idx] : ritz) {
      if (int(Q.size()) >= k) break;
      VectorXcd x = VectorXcd::Zero(n);
      for (int i = 0; i < steps; ++i) x += V[size_t(i)] * ces.eigenvectors()(i, idx);
      // The Schur data must describe the vector that actually enters Q:
      // project against the current locked set first (a near-eigenvector of a
      // non-normal operator overlaps earlier directions, and its coupling
      // appears only after the projection), then test the projected residual.
      project_out_locked(x);
      double nx = x.norm();
      if (nx < 1e-8) continue;  // direction already locked
      x /= nx;
      VectorXcd r = A.apply(x) - lam * x;
      Eigen::VectorXcd t(Q.size());
      for (size_t i = 0; i < Q.size(); ++i) {
        t(long(i)) = Q[i].dot(r);
        r -= Q[i] * t(long(i));
      }
      if (r.norm() <= tol) {
        const int j = int(Q.size());
        for (int i = 0; i < j; ++i) R(i, j) = t(i);
        R(j, j) = lam;
        Q.push_back(x);
      } else {
        // copies of multiple eigenvalues land here too: the Krylov space is
        // already deflated, so every candidate is a genuinely new direction
        missed.push_back(idx);
        best_missed = std::min(best_missed, r.norm());
      }
    }
    if (int(Q.size()) >= k) break;
    if (restart == opt.max_restarts)
      fail(SC_ERR_CONVERGENCE,
           strf("arnoldi: %zu of %d pairs converged after %d restarts (best "
                "unconverged projected residual %.3g, tol %.3g)",
                Q.size(), k, opt.max_restarts, best_missed, tol));
    // restart towards the nearest unconverged Ritz directions
    VectorXcd next = VectorXcd::Zero(n);
    int used = 0;
    for (int idx : missed) {
      for (int i = 0; i < steps; ++i) next += V[size_t(i)] * ces.eigenvectors()(i, idx);
      if (++used >= 3) break;
    }
    v = used > 0 ? next : start_vector(n, 0x3333ULL + uint64_t(restart));
  }

  // assemble eigenvectors of A from the Schur pair (Q, R): for each i solve
  // the upper-triangular system (R - lam_i) z = 0 with z_i = 1
  std::vector<Candidate> out;
  const double rscale = std::max(1e-300, R.cwiseAbs().maxCoeff());
  for (int i = 0; i < k; ++i) {
    cplx lam = R(i, i);
    Eigen::VectorXcd z = Eigen::VectorXcd::Zero(k);
    z(i) = 1.0;
    for (int j = i - 1; j >= 0; --j) {
      cplx num = 0.0;
      for (int l = j + 1; l <= i; ++l) num += R(j, l) * z(l);
      cplx den = R(j, j) - lam;
      if (std::abs(den) < 1e-13 * rscale) {
        // same eigenvalue above: diagonalizable multiplets have negligible
        // coupling, keep the component zero (guarded division otherwise)
        z(j) = std::abs(num) < 1e-13 * rscale ? 0.0 : -num / cplx(1e-13 * rscale);
      } else {
        z(j) = -num / den;
      }
    }
    VectorXcd x = VectorXcd::Zero(n);
    for (int j = 0; j <= i; ++j) x += Q[size_t(j)] * z(j);
    x.normalize();
    out.push_back({lam, x, plain_residual(A, lam, x)});
  }
  return out;
}

bool dense_hermitian(const MatrixXcd& M) {
  double scale = std::max(1e-300, M.cwiseAbs().maxCoeff());
  return (M - M.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

std::vector<EigenPair> finalize(std::vector<Candidate> cands, const OperatorMatrix& A,
                                cplx target, double tol) {
  std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    return canonical_less(a.lam, b.lam, target);
  });
  std::vector<EigenPair> out;
  const double w = std::sqrt(A.grid.weight());
  for (auto& c : cands) {
    EigenPair p;
    p.lam = c.lam;
    // phase: largest-magnitude component real positive (ties: lowest index)
    long imax = 0;
    double amax = -1;
    for (long i = 0; i < c.vec.size(); ++i) {
      double a = std::abs(c.vec(i));
      if (a > amax + 1e-15 * amax) {
        amax = a;
        imax = i;
      }
    }
    cplx phase = c.vec(imax) / std::abs(c.vec(imax));
    VectorXcd v = c.vec / phase;
    v /= (w * v.norm());  // grid-weighted normalization
    p.vec = v;
    p.residual = w * (A.apply(v) - p.lam * v).norm();
    if (p.residual > tol * 1.01)
      fail(SC_ERR_CONVERGENCE, strf("eigenpair residual %.3g above tolerance %.3g",
                                    p.residual, tol));
    out.push_back(std::move(p));
  }
  // multiplicity hints: cluster nearly equal eigenvalues among the returned set
  for (size_t i = 0; i < out.size(); ++i) {
    int count = 0;
    for (size_t j = 0; j < out.size(); ++j)
      if (std::abs(out[j].lam - out[i].lam) <= 1e-6 * std::max(1.0, std::abs(out[i].lam)))
        ++count;
    out[i].multiplicity_hint = count;
  }
  return out;
}

}  // namespace

std::vector<EigenPair> eigs_near(const OperatorMatrix& A, cplx target, int k,
                                 const SolveOptions& opt) {
  if (k < 1 || k > 40) fail(SC_ERR_ARGUMENT, "eigs_near: k must be in 1..40");
  const long n = long(A.rows());
  k = int(std::min<long>(k, n));
  const double tol = A.is_sparse() ? opt.residual_tol_sparse : opt.residual_tol_dense;

  if (A.is_dense()) {
    const MatrixXcd& M = *A.dense;
    if (dense_hermitian(M)) {
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(M);
      std::vector<Candidate> cands;
      std::vector<int> order(static_cast<size_t>(n));
      for (long i = 0; i < n; ++i) order[size_t(i)] = int(i);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return canonical_less(cplx(es.eigenvalues()(a), 0.0),
                              cplx(es.eigenvalues()(b), 0.0), target);
      });
      for (int i = 0; i < k; ++i) {
        int idx = order[size_t(i)];
        cands.push_back({cplx(es.eigenvalues()(idx), 0.0), es.eigenvectors().col(idx), 0.0});
      }
      return finalize(std::move(cands), A, target, tol);
    }
    if (n <= opt.dense_qr_limit) {
      Eigen::ComplexEigenSolver<MatrixXcd> es(M);
      std::vector<int> order(static_cast<size_t>(n));
      for (long i = 0; i < n; ++i) order[size_t(i)] = int(i);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return canonical_less(es.eigenvalues()(a), es.eigenvalues()(b), target);
      });
      std::vector<Candidate> cands;
      for (int i = 0; i < k; ++i) {
        int idx = order[size_t(i)];
        cands.push_back({es.eigenvalues()(idx), es.eigenvectors().col(idx), 0.0});
      }
      return finalize(std::move(cands), A, target, tol);
    }
  }
  auto cands = arnoldi_shift_invert(A, target, k, tol, opt);
  return finalize(std::move(cands), A, target, tol);
}

std::vector<EigenPair> ground_cluster(const OperatorMatrix& A, double C, double h,
                                      const SolveOptions& opt) {
  if (C <= 0 || h <= 0) fail(SC_ERR_ARGUMENT, "ground_cluster: C and h must be positive");
  // open-disc semantics with a small margin, so eigenvalues sitting exactly
  // on |lam| = C h (up to discretization noise) stay outside
  const double bound = C * h * (1.0 - 1e-9);
  const long n = long(A.rows());
  int k = int(std::min<long>(4, n));
  while (true) {
    auto pairs = eigs_near(A, 0.0, k, opt);
    std::vector<EigenPair> inside;
    for (const auto& p : pairs)
      if (std::abs(p.lam) < bound) inside.push_back(p);
    const bool exhausted =
        inside.size() < pairs.size() || long(pairs.size()) == n;
    if (exhausted) return inside;
    if (k >= 40)
      fail(SC_ERR_RESOURCE, "ground cluster exceeds the 40-eigenpair cap");
    k = int(std::min<long>(std::min(2 * k, 40), n));
  }
}

std::vector<ModelEigenvalue> quadratic_model_spectrum(const symbols::PolySymbol& q,
                                                      double C) {
  if (C <= 0) fail(SC_ERR_ARGUMENT, "quadratic_model_spectrum: C must be positive");
  if (q.has_formal_h()) fail(SC_ERR_PRECONDITION, "model symbol must not carry h");
  const int n = q.dim();
  for (const auto& [e, c] : q.terms()) {
    int deg = 0;
    for (int i = 0; i < 2 * n; ++i) deg += int(e[size_t(i)]);
    if (deg != 2)
      fail(SC_ERR_PRECONDITION, "quadratic_model_spectrum needs a homogeneous quadratic");
  }
  // positive definite real part
  auto H = q.hessian_at0();
  Eigen::MatrixXd ReQ(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) ReQ(i, j) = 0.5 * H[size_t(i)][size_t(j)].to_cplx().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ReQ, Eigen::EigenvaluesOnly);
  const double m0 = es.eigenvalues().minCoeff();  // Re q(X) >= m0 |X|^2
  if (m0 <= 0)
    fail(SC_ERR_PRECONDITION, "quadratic model requires positive definite Re q");

  const double extent = std::sqrt(C / m0);
  const double L = std::max(8.0, 4.0 * extent);
  const double xi_need = 3.0 * extent + 1.0;
  int N = 0;
  for (int cand : (n == 1 ? std::vector<int>{256, 384, 512} : std::vector<int>{48, 64})) {
    if (M_PI * cand / (2.0 * L) >= xi_need) {
      N = cand;
      break;
    }
  }
  if (N == 0)
    fail(SC_ERR_RESOURCE, "grid-resolution failure: disc radius too large for the "
                          "h=1 model grid");
  PhaseSpaceGrid grid(n, L, N, 1.0);
  OperatorMatrix A = quantize::weyl_quantize(symbols::Symbol::of(q), grid);
  auto cluster = ground_cluster(A, C, 1.0);

  // group into clusters with relative tolerance 1e-6 * C
  std::stable_sort(cluster.begin(), cluster.end(), [](const EigenPair& a, const EigenPair& b) {
    if (a.lam.real() != b.lam.real()) return a.lam.real() < b.lam.real();
    return a.lam.imag() < b.lam.imag();
  });
  const double tol = 1e-6 * C;
  std::vector<ModelEigenvalue> out;
  for (const auto& p : cluster) {
    if (!out.empty() && std::abs(p.lam - out.back().mu) <= tol * out.back().multiplicity) {
      // running mean keeps the cluster center stable
      auto& m = out.back();
      m.mu = (m.mu * double(m.multiplicity) + p.lam) / double(m.multiplicity + 1);
      m.multiplicity += 1;
    } else {
      out.push_back({p.lam, 1});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ModelEigenvalue& a, const ModelEigenvalue& b) {
    return std::abs(a.mu) < std::abs(b.mu);
  });
  return out;
}

std::vector<LeadingOrderRow> leading_order_check(
    const std::function<OperatorMatrix(double)>& family, const symbols::PolySymbol& q,
    const std::vector<double>& h_list, double C) {
  auto model = quadratic_model_spectrum(q, C);
  std::vector<cplx> mus;
  for (const auto& m : model)
    for (int r = 0; r < m.multiplicity; ++r) mus.push_back(m.mu);
  double min_gap = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < model.size(); ++i)
    for (size_t j = i + 1; j < model.size(); ++j)
      min_gap = std::min(min_gap, std::abs(model[i].mu - model[j].mu));

  std::vector<LeadingOrderRow> rows;
  for (double h : h_list) {
    OperatorMatrix A = family(h);
    auto cluster = ground_cluster(A, C, h);
    std::vector<bool> used(mus.size(), false);
    for (const auto& p : cluster) {
      cplx scaled = p.lam / h;
      int best = -1;
      double bestd = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < mus.size(); ++i) {
        if (used[i]) continue;
        double d = std::abs(scaled - mus[i]);
        if (d < bestd) {
          bestd = d;
          best = int(i);
        }
      }
      LeadingOrderRow row;
      row.h = h;
      row.lambda = p.lam;
      row.mu = best >= 0 ? mus[size_t(best)] : cplx(0, 0);
      row.deviation = best >= 0 ? bestd : std::numeric_limits<double>::infinity();
      row.ambiguous = best < 0 || (std::isfinite(min_gap) && bestd > 0.5 * min_gap);
      if (best >= 0) used[size_t(best)] = true;
      rows.push_back(row);
    }
  }
  return rows;
}

void save_pairs(const std::vector<EigenPair>& pairs, const PhaseSpaceGrid& g,
                const std::string& path) {
  nlohmann::json h;
  h["schema_version"] = 1;
  h["count"] = pairs.size();
  h["grid"] = {{"n", g.n}, {"L", g.L}, {"N", g.N}, {"h", g.h}};
  nlohmann::json lam = nlohmann::json::array(), res = nlohmann::json::array(),
                 mult = nlohmann::json::array();
  for (const auto& p : pairs) {
    lam.push_back({p.lam.real(), p.lam.imag()});
    res.push_back(p.residual);
    mult.push_back(p.multiplicity_hint);
  }
  h["lambda"] = lam;
  h["residual"] = res;
  h["multiplicity_hint"] = mult;
  std::string header = h.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(SC_ERR_IO, "cannot open for writing: " + path);
  const char magic[8] = {'S', 'C', 'E', 'G', '0', '1', '\n', '\0'};
  f.write(magic, 8);
  uint64_t hl = header.size();
  f.write(reinterpret_cast<const char*>(&hl), 8);
  f.write(header.data(), long(header.size()));
  for (const auto& p : pairs)
    f.write(reinterpret_cast<const char*>(p.vec.data()), long(sizeof(cplx)) * p.vec.size());
  if (!f) fail(SC_ERR_IO, "write failed: " + path);
}

std::pair<std::vector<EigenPair>, PhaseSpaceGrid> load_pairs(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(SC_ERR_IO, "cannot open: " + path);
  char magic[8];
  f.read(magic, 8);
  const char want[8] = {'S', 'C', 'E', 'G', '0', '1', '\n', '\0'};
  if (!f || std::memcmp(magic, want, 8) != 0) fail(SC_ERR_IO, "bad eigenpair file magic");
  uint64_t hl = 0;
  f.read(reinterpret_cast<char*>(&hl), 8);
  std::string header(hl, '\0');
  f.read(header.data(), long(hl));
  nlohmann::json h = nlohmann::json::parse(header);
  PhaseSpaceGrid g(h["grid"]["n"], h["grid"]["L"], h["grid"]["N"], h["grid"]["h"]);
  const size_t count = h["count"];
  std::vector<EigenPair> pairs(count);
  for (size_t i = 0; i < count; ++i) {
    auto& p = pairs[i];
    p.lam = cplx(h["lambda"][i][0], h["lambda"][i][1]);
    p.residual = h["residual"][i];
    p.multiplicity_hint = h["multiplicity_hint"][i];
    p.vec.resize(long(g.points()));
    f.read(reinterpret_cast<char*>(p.vec.data()), long(sizeof(cplx) * g.points()));
  }
  if (!f) fail(SC_ERR_IO, "truncated eigenpair file");
  return {std::move(pairs), g};
}

}  // namespace semiclass::eig

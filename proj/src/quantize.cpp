#include "quantize.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "fft.hpp"
#include "json.hpp"

namespace semiclass::quantize {

using symbols::Symbol;

VectorXcd OperatorMatrix::apply(const VectorXcd& u) const {
  if (size_t(u.size()) != rows()) fail(SC_ERR_ARGUMENT, "apply: vector length mismatch");
  if (dense) return (*dense) * u;
  if (sparse) return (*sparse) * u;
  return applyfn(u);
}

double l2_norm(const VectorXcd& u, const PhaseSpaceGrid& g) {
  return std::sqrt(g.weight()) * u.norm();
}

VectorXcd normalized(const VectorXcd& u, const PhaseSpaceGrid& g) {
  double nrm = l2_norm(u, g);
  if (nrm == 0.0) fail(SC_ERR_ARGUMENT, "cannot normalize zero vector");
  return u / nrm;
}

namespace {

inline int fft_m(int i, int N) { return i <= N / 2 - 1 ? i : i - N; }
inline int mod_n(int d, int N) { return ((d % N) + N) % N; }

void check_finite(cplx v, const char* what) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    fail(SC_ERR_PRECONDITION, std::string("non-finite symbol value on the grid: ") + what);
}

// symbol value at momentum index i with the Nyquist mode symmetrized
cplx sym_val_1d(const Symbol& a, double xbar, const PhaseSpaceGrid& g, int i) {
  double X[2];
  X[0] = xbar;
  if (i == g.N / 2) {
    X[1] = g.xi_node(-g.N / 2);
    cplx lo = a.eval(X);
    X[1] = g.xi_node(g.N / 2);
    cplx hi = a.eval(X);
    return 0.5 * (lo + hi);
  }
  X[1] = g.xi_node(fft_m(i, g.N));
  return a.eval(X);
}

MatrixXcd weyl_dense_1d(const Symbol& a, const PhaseSpaceGrid& g) {
  const int N = g.N;
  MatrixXcd A(N, N);
  std::vector<cplx> row(static_cast<size_t>(N));
  const auto dims = g.fft_dims();
  for (int s = 0; s <= 2 * N - 2; ++s) {
    const double xbar = -g.L + 0.5 * s * g.dx();
    for (int i = 0; i < N; ++i) {
      row[size_t(i)] = sym_val_1d(a, xbar, g, i);
      check_finite(row[size_t(i)], "midpoint row");
    }
    fft::backward(row, dims);
    const int jlo = std::max(0, s - N + 1), jhi = std::min(N - 1, s);
    for (int j = jlo; j <= jhi; ++j) {
      const int k = s - j;
      A(j, k) = row[size_t(mod_n(j - k, N))] / double(N);
    }
  }
  return A;
}

MatrixXcd weyl_dense_2d(const Symbol& a, const PhaseSpaceGrid& g) {
  const int N = g.N;
  const size_t P = g.points();
  MatrixXcd A(P, P);
  std::vector<cplx> fgrid(size_t(N) * N);
  const auto dims = g.fft_dims();
  double X[4];
  for (int s1 = 0; s1 <= 2 * N - 2; ++s1) {
    X[0] = -g.L + 0.5 * s1 * g.dx();
    for (int s2 = 0; s2 <= 2 * N - 2; ++s2) {
      X[1] = -g.L + 0.5 * s2 * g.dx();
      for (int i1 = 0; i1 < N; ++i1) {
        // Nyquist symmetrization per momentum axis
        const int reps1 = (i1 == N / 2) ? 2 : 1;
        for (int i2 = 0; i2 < N; ++i2) {
          const int reps2 = (i2 == N / 2) ? 2 : 1;
          cplx acc = 0.0;
          for (int r1 = 0; r1 < reps1; ++r1)
            for (int r2 = 0; r2 < reps2; ++r2) {
              X[2] = (reps1 == 2) ? g.xi_node(r1 == 0 ? -N / 2 : N / 2)
                                  : g.xi_node(fft_m(i1, N));
              X[3] = (reps2 == 2) ? g.xi_node(r2 == 0 ? -N / 2 : N / 2)
                                  : g.xi_node(fft_m(i2, N));
              acc += a.eval(X);
            }
          fgrid[size_t(i1) * N + i2] = acc / double(reps1 * reps2);
        }
      }
      check_finite(fgrid[0], "midpoint sheet");
      fft::backward(fgrid, dims);
      const double inv = 1.0 / double(N) / double(N);
      const int j1lo = std::max(0, s1 - N + 1), j1hi = std::min(N - 1, s1);
      const int j2lo = std::max(0, s2 - N + 1), j2hi = std::min(N - 1, s2);
      for (int j1 = j1lo; j1 <= j1hi; ++j1) {
        const int k1 = s1 - j1;
        const int d1 = mod_n(j1 - k1, N);
        for (int j2 = j2lo; j2 <= j2hi; ++j2) {
          const int k2 = s2 - j2;
          A(size_t(j1) * N + j2, size_t(k1) * N + k2) =
              fgrid[size_t(d1) * N + mod_n(j2 - k2, N)] * inv;
        }
      }
    }
  }
  return A;
}

}  // namespace

OperatorMatrix weyl_quantize(const Symbol& a, const PhaseSpaceGrid& grid) {
  if (a.dim() != grid.n) fail(SC_ERR_ARGUMENT, "weyl_quantize: dimension mismatch");
  if (grid.n == 2 && grid.N > 64)
    fail(SC_ERR_RESOURCE,
         "dense midpoint-fft in 2D is limited to N <= 64 per axis; "
         "use a Schrodinger path for larger grids");
  OperatorMatrix op;
  op.grid = grid;
  op.method = "midpoint-fft";
  op.symbol_desc = a.desc();
  op.dense = std::make_shared<const MatrixXcd>(
      grid.n == 1 ? weyl_dense_1d(a, grid) : weyl_dense_2d(a, grid));
  return op;
}

// ---- Schrodinger fast paths -------------------------------------------------

namespace {

VectorXcd potential_diag(const Symbol& vw, const PhaseSpaceGrid& g) {
  if (vw.is_poly()) {
    for (int j = 0; j < g.n; ++j)
      if (vw.poly->depends_on_slot(g.n + j))
        fail(SC_ERR_PRECONDITION, "schrodinger potential must depend on x only");
  }
  VectorXcd diag(g.points());
  double X[4] = {0, 0, 0, 0};
  if (g.n == 1) {
    for (int j = 0; j < g.N; ++j) {
      X[0] = g.x_node(j);
      diag(j) = vw.eval(X);
      check_finite(diag(j), "potential");
    }
  } else {
    for (int j1 = 0; j1 < g.N; ++j1) {
      X[0] = g.x_node(j1);
      for (int j2 = 0; j2 < g.N; ++j2) {
        X[1] = g.x_node(j2);
        diag(size_t(j1) * g.N + j2) = vw.eval(X);
        check_finite(diag(size_t(j1) * g.N + j2), "potential");
      }
    }
  }
  return diag;
}

// 1D spectral kinetic matrix: circulant with symbol xi_m^2
MatrixXcd spectral_kinetic_1d(const PhaseSpaceGrid& g) {
  const int N = g.N;
  std::vector<cplx> mult(static_cast<size_t>(N));
  for (int i = 0; i < N; ++i) {
    double xi = g.xi_node(fft_m(i, N));
    mult[size_t(i)] = xi * xi;
  }
  fft::backward(mult, {N});
  MatrixXcd K(N, N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) K(j, k) = mult[size_t(mod_n(j - k, N))] / double(N);
  return K;
}

// FD coefficients for u'' (central, order 2m), index 0 = diagonal
const std::vector<double>& fd_weights(int order) {
  static const std::vector<double> w2 = {-2.0, 1.0};
  static const std::vector<double> w4 = {-5.0 / 2, 4.0 / 3, -1.0 / 12};
  static const std::vector<double> w6 = {-49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
  static const std::vector<double> w8 = {-205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315,
                                         -1.0 / 560};
  switch (order) {
    case 2: return w2;
    case 4: return w4;
    case 6: return w6;
    case 8: return w8;
    default: fail(SC_ERR_ARGUMENT, "fd order must be 2, 4, 6 or 8");
  }
}

SparseC fd_operator(const VectorXcd& diag, const PhaseSpaceGrid& g, int order) {
  const int N = g.N;
  const auto& w = fd_weights(order);
  const double scale = -g.h * g.h / (g.dx() * g.dx());  // -h^2 d^2/dx^2
  std::vector<Eigen::Triplet<cplx>> trip;
  const size_t P = g.points();
  trip.reserve(P * (1 + 2 * (w.size() - 1) * size_t(g.n)));
  auto add_axis = [&](int axis) {
    if (g.n == 1) {
      for (int j = 0; j < N; ++j) {
        trip.emplace_back(j, j, scale * w[0]);
        for (size_t r = 1; r < w.size(); ++r) {
          trip.emplace_back(j, mod_n(j + int(r), N), scale * w[r]);
          trip.emplace_back(j, mod_n(j - int(r), N), scale * w[r]);
        }
      }
    } else {
      for (int j1 = 0; j1 < N; ++j1)
        for (int j2 = 0; j2 < N; ++j2) {
          const int row = j1 * N + j2;
          trip.emplace_back(row, row, scale * w[0]);
          for (size_t r = 1; r < w.size(); ++r) {
            int cp, cm;
            if (axis == 0) {
              cp = mod_n(j1 + int(r), N) * N + j2;
              cm = mod_n(j1 - int(r), N) * N + j2;
            } else {
              cp = j1 * N + mod_n(j2 + int(r), N);
              cm = j1 * N + mod_n(j2 - int(r), N);
            }
            trip.emplace_back(row, cp, scale * w[r]);
            trip.emplace_back(row, cm, scale * w[r]);
          }
        }
    }
  };
  for (int axis = 0; axis < g.n; ++axis) add_axis(axis);
  for (int j = 0; j < int(P); ++j) trip.emplace_back(j, j, diag(j));
  SparseC A(P, P);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

}  // namespace

OperatorMatrix quantize_schrodinger(const Symbol& vw, const PhaseSpaceGrid& grid,
                                    const std::string& variant) {
  if (vw.dim() != grid.n) fail(SC_ERR_ARGUMENT, "quantize_schrodinger: dimension mismatch");
  VectorXcd diag = potential_diag(vw, grid);
  OperatorMatrix op;
  op.grid = grid;
  op.symbol_desc = "|xi|^2 + " + vw.desc();

  if (variant == "spectral") {
    op.method = "schrodinger-spectral";
    MatrixXcd K1 = spectral_kinetic_1d(grid);
    if (grid.n == 1) {
      MatrixXcd A = K1;
      A.diagonal() += diag;
      op.dense = std::make_shared<const MatrixXcd>(std::move(A));
    } else {
      if (grid.N > 64)
        fail(SC_ERR_RESOURCE, "dense 2D spectral path limited to N <= 64 per axis");
      const int N = grid.N;
      MatrixXcd A = MatrixXcd::Zero(grid.points(), grid.points());
      for (int j1 = 0; j1 < N; ++j1)
        for (int k1 = 0; k1 < N; ++k1)
          for (int j2 = 0; j2 < N; ++j2) A(size_t(j1) * N + j2, size_t(k1) * N + j2) += K1(j1, k1);
      for (int j1 = 0; j1 < N; ++j1)
        for (int j2 = 0; j2 < N; ++j2)
          for (int k2 = 0; k2 < N; ++k2) A(size_t(j1) * N + j2, size_t(j1) * N + k2) += K1(j2, k2);
      A.diagonal() += diag;
      op.dense = std::make_shared<const MatrixXcd>(std::move(A));
    }
    return op;
  }

  if (variant == "spectral-mf") {
    op.method = "schrodinger-spectral-mf";
    const PhaseSpaceGrid g = grid;
    VectorXcd mult(g.points());
    if (g.n == 1) {
      for (int i = 0; i < g.N; ++i) {
        double xi = g.xi_node(fft_m(i, g.N));
        mult(i) = xi * xi;
      }
    } else {
      for (int i1 = 0; i1 < g.N; ++i1)
        for (int i2 = 0; i2 < g.N; ++i2) {
          double a = g.xi_node(fft_m(i1, g.N)), b = g.xi_node(fft_m(i2, g.N));
          mult(size_t(i1) * g.N + i2) = a * a + b * b;
        }
    }
    op.applyfn = [g, mult, diag](const VectorXcd& u) {
      std::vector<cplx> buf(u.data(), u.data() + u.size());
      fft::forward(buf, g.fft_dims());
      for (size_t i = 0; i < buf.size(); ++i) buf[i] *= mult(long(i));
      fft::backward(buf, g.fft_dims());
      VectorXcd out(u.size());
      const double inv = 1.0 / double(g.points());
      for (long i = 0; i < u.size(); ++i) out(i) = buf[size_t(i)] * inv + diag(i) * u(i);
      return out;
    };
    return op;
  }

  if (variant.rfind("fd", 0) == 0) {
    int order = std::stoi(variant.substr(2));
    op.method = "schrodinger-fd" + std::to_string(order);
    op.sparse = std::make_shared<const SparseC>(fd_operator(diag, grid, order));
    return op;
  }
  fail(SC_ERR_ARGUMENT, "unknown schrodinger variant '" + variant + "'");
}

// ---- cutoff quantization ----------------------------------------------------

OperatorMatrix cutoff_quantize(const Symbol& chi, double scale, const PhaseSpaceGrid& grid) {
  if (scale <= 0) fail(SC_ERR_ARGUMENT, "cutoff scale must be positive");
  if (scale < 2.0 * std::max(grid.dx(), grid.dxi()))
    fail(SC_ERR_SCALE,
         strf("unresolvable microlocal scale: s=%.3g under 2*max(dx=%.3g, dxi=%.3g)",
              scale, grid.dx(), grid.dxi()));
  symbols::CallableSymbol scaled;
  scaled.dim = chi.dim();
  scaled.desc = chi.desc() + strf(" at scale %.6g", scale);
  const Symbol base = chi;
  const double s = scale;
  const int d = 2 * chi.dim();
  scaled.f = [base, s, d](const double* X) {
    double Y[4];
    for (int i = 0; i < d; ++i) Y[i] = X[i] / s;
    return base.eval(Y);
  };
  OperatorMatrix op = weyl_quantize(Symbol::of(std::move(scaled)), grid);
  op.norm_estimate = operator_norm_estimate(op);
  return op;
}

double operator_norm_estimate(const OperatorMatrix& A, int iters) {
  if (A.is_matrix_free())
    fail(SC_ERR_ARGUMENT, "norm estimate needs an assembled matrix");
  Rng rng(0x5eedcafeULL);
  VectorXcd v(A.rows());
  for (long i = 0; i < v.size(); ++i) v(i) = rng.cnormalish();
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < iters; ++it) {
    VectorXcd w = A.apply(v);
    VectorXcd z = A.is_dense() ? VectorXcd(A.dense->adjoint() * w)
                               : VectorXcd(A.sparse->adjoint() * w);
    sigma = std::sqrt(z.norm());
    if (z.norm() == 0.0) return 0.0;
    v = z / z.norm();
  }
  return sigma;
}

// ---- rescaling and band-limited evaluation ----------------------------------

PhaseSpaceGrid rescaled_grid(const PhaseSpaceGrid& g, const ScalingParams& sp) {
  sp.validate();
  return PhaseSpaceGrid(g.n, g.L / std::sqrt(sp.eps()), g.N, sp.h_tilde);
}

namespace {

// spectrum extended to m = -N/2..N/2 with the Nyquist weight split
std::vector<cplx> extended_spectrum_1d(const VectorXcd& u, int N) {
  std::vector<cplx> buf(u.data(), u.data() + u.size());
  fft::forward(buf, {N});
  std::vector<cplx> ext(size_t(N) + 1);
  for (int t = 0; t <= N; ++t) {
    int m = t - N / 2;
    cplx c = buf[size_t(mod_n(m, N))] / double(N);
    if (m == -N / 2 || m == N / 2) c *= 0.5;
    ext[size_t(t)] = c;
  }
  return ext;
}

Eigen::MatrixXcd eval_matrix(const PhaseSpaceGrid& g, const std::vector<double>& pts) {
  const int N = g.N;
  Eigen::MatrixXcd E(pts.size(), N + 1);
  for (size_t p = 0; p < pts.size(); ++p)
    for (int t = 0; t <= N; ++t) {
      double m = double(t - N / 2);
      double phase = M_PI * m * (pts[p] + g.L) / g.L;
      E(long(p), t) = cplx(std::cos(phase), std::sin(phase));
    }
  return E;
}

}  // namespace

VectorXcd trig_eval_tensor(const VectorXcd& u, const PhaseSpaceGrid& g,
                           const std::vector<std::vector<double>>& pts) {
  if (int(pts.size()) != g.n) fail(SC_ERR_ARGUMENT, "trig_eval_tensor: need pts per axis");
  for (const auto& axis : pts)
    for (double x : axis)
      if (std::abs(x) > g.L * (1.0 + 1e-12))
        fail(SC_ERR_SCALE, "interpolation out of range");
  const int N = g.N;
  if (g.n == 1) {
    auto ext = extended_spectrum_1d(u, N);
    Eigen::MatrixXcd E = eval_matrix(g, pts[0]);
    Eigen::Map<const VectorXcd> ev(ext.data(), long(ext.size()));
    return E * ev;
  }
  // 2D: extended spectral matrix, then E1 * S * E2^T
  std::vector<cplx> buf(u.data(), u.data() + u.size());
  fft::forward(buf, g.fft_dims());
  Eigen::MatrixXcd S(N + 1, N + 1);
  const double inv = 1.0 / double(g.points());
  for (int t1 = 0; t1 <= N; ++t1) {
    int m1 = t1 - N / 2;
    double w1 = (m1 == -N / 2 || m1 == N / 2) ? 0.5 : 1.0;
    for (int t2 = 0; t2 <= N; ++t2) {
      int m2 = t2 - N / 2;
      double w2 = (m2 == -N / 2 || m2 == N / 2) ? 0.5 : 1.0;
      S(t1, t2) = buf[size_t(mod_n(m1, N)) * N + size_t(mod_n(m2, N))] * (inv * w1 * w2);
    }
  }
  Eigen::MatrixXcd E1 = eval_matrix(g, pts[0]);
  Eigen::MatrixXcd E2 = eval_matrix(g, pts[1]);
  Eigen::MatrixXcd R = E1 * S * E2.transpose();
  VectorXcd out(long(pts[0].size() * pts[1].size()));
  for (size_t p1 = 0; p1 < pts[0].size(); ++p1)
    for (size_t p2 = 0; p2 < pts[1].size(); ++p2)
      out(long(p1 * pts[1].size() + p2)) = R(long(p1), long(p2));
  return out;
}

VectorXcd rescale_state(const VectorXcd& u, const PhaseSpaceGrid& src,
                        const PhaseSpaceGrid& dst, double eps, int direction) {
  if (eps <= 0 || eps > 1.0 + 1e-12) fail(SC_ERR_ARGUMENT, "rescale: need 0 < eps <= 1");
  if (src.n != dst.n) fail(SC_ERR_ARGUMENT, "rescale: dimension mismatch");
  const double se = std::sqrt(eps);
  const double amp = std::pow(eps, direction * src.n / 4.0);
  const double ratio = direction > 0 ? se : 1.0 / se;
  // out(y_j) = amp * u(ratio * y_j)
  if (std::abs(ratio * dst.L - src.L) < 1e-12 * src.L && src.N == dst.N)
    return amp * u;  // commensurate grids: pure relabeling
  if (ratio * dst.L > src.L * (1.0 + 1e-12))
    fail(SC_ERR_SCALE, "interpolation out of range: target box maps outside source box");
  std::vector<std::vector<double>> pts(size_t(src.n));
  for (int a = 0; a < src.n; ++a) {
    pts[size_t(a)].resize(size_t(dst.N));
    for (int j = 0; j < dst.N; ++j) pts[size_t(a)][size_t(j)] = ratio * dst.x_node(j);
  }
  return amp * trig_eval_tensor(u, src, pts);
}

double conjugation_check(const Symbol& a, const ScalingParams& sp,
                         const PhaseSpaceGrid& grid_h, const PhaseSpaceGrid& grid_ht) {
  sp.validate();
  const double eps = sp.eps();
  OperatorMatrix A = weyl_quantize(a, grid_h);
  symbols::CallableSymbol at;
  at.dim = a.dim();
  at.desc = a.desc() + " (rescaled)";
  const Symbol base = a;
  const double se = std::sqrt(eps);
  const int d = 2 * a.dim();
  at.f = [base, se, d](const double* X) {
    double Y[4];
    for (int i = 0; i < d; ++i) Y[i] = se * X[i];
    return base.eval(Y);
  };
  OperatorMatrix At = weyl_quantize(Symbol::of(std::move(at)), grid_ht);

  // fixed test-vector set: two Gaussians and one band-limited noise vector
  std::vector<VectorXcd> tests;
  const double w0 = std::sqrt(grid_h.h);
  for (double scale : {1.0, 1.4}) {
    VectorXcd v(grid_h.points());
    if (grid_h.n == 1) {
      for (int j = 0; j < grid_h.N; ++j) {
        double x = grid_h.x_node(j) - (scale > 1.0 ? 0.05 * grid_h.L : 0.0);
        v(j) = std::exp(-x * x / (2.0 * scale * scale * w0 * w0));
      }
    } else {
      for (int j1 = 0; j1 < grid_h.N; ++j1)
        for (int j2 = 0; j2 < grid_h.N; ++j2) {
          double x1 = grid_h.x_node(j1) - (scale > 1.0 ? 0.05 * grid_h.L : 0.0);
          double x2 = grid_h.x_node(j2);
          v(size_t(j1) * grid_h.N + j2) =
              std::exp(-(x1 * x1 + x2 * x2) / (2.0 * scale * scale * w0 * w0));
        }
    }
    tests.push_back(normalized(v, grid_h));
  }
  {
    Rng rng(0xc0ffeeULL);
    std::vector<cplx> spec(grid_h.points(), cplx(0, 0));
    const int N = grid_h.N, band = std::max(2, N / 8);
    if (grid_h.n == 1) {
      for (int i = 0; i < N; ++i)
        if (std::abs(fft_m(i, N)) <= band) spec[size_t(i)] = rng.cnormalish();
    } else {
      for (int i1 = 0; i1 < N; ++i1)
        for (int i2 = 0; i2 < N; ++i2)
          if (std::abs(fft_m(i1, N)) <= band && std::abs(fft_m(i2, N)) <= band)
            spec[size_t(i1) * N + i2] = rng.cnormalish();
    }
    fft::backward(spec, grid_h.fft_dims());
    VectorXcd v = Eigen::Map<VectorXcd>(spec.data(), long(spec.size()));
    tests.push_back(normalized(v, grid_h));
  }

  double worst = 0.0;
  for (const auto& u : tests) {
    VectorXcd lhs = A.apply(u);
    VectorXcd uu = rescale_state(u, grid_h, grid_ht, eps, +1);
    VectorXcd rhs = rescale_state(At.apply(uu), grid_ht, grid_h, eps, -1);
    worst = std::max(worst, l2_norm(lhs - rhs, grid_h));
  }
  return worst;
}

// ---- matrix-free polynomial Weyl apply --------------------------------------

VectorXcd apply_weyl_poly(const symbols::PolySymbol& p, double arg_scale,
                          const PhaseSpaceGrid& grid, const VectorXcd& u) {
  if (p.dim() != grid.n) fail(SC_ERR_ARGUMENT, "apply_weyl_poly: dimension mismatch");
  if (p.has_formal_h())
    fail(SC_ERR_PRECONDITION, "apply_weyl_poly: substitute a numeric h first");
  if (arg_scale <= 0) fail(SC_ERR_ARGUMENT, "apply_weyl_poly: bad argument scale");
  const int n = grid.n, N = grid.N;
  const size_t P = grid.points();
  if (size_t(u.size()) != P) fail(SC_ERR_ARGUMENT, "apply_weyl_poly: vector length");

  struct Mono {
    cplx c;
    int g[2] = {0, 0};  // x exponents
    int d[2] = {0, 0};  // xi exponents
  };
  std::vector<Mono> monos;
  for (const auto& [e, coef] : p.terms()) {
    Mono m;
    int deg = 0;
    for (int j = 0; j < n; ++j) {
      m.g[j] = int(e[size_t(j)]);
      m.d[j] = int(e[size_t(n + j)]);
      deg += m.g[j] + m.d[j];
    }
    m.c = coef.to_cplx() * std::pow(1.0 / arg_scale, deg);
    monos.push_back(m);
  }

  auto key_of = [](const int* r) { return r[0] * 64 + r[1]; };
  auto xpow_vec = [&](const int* pw) {
    VectorXcd v(static_cast<long>(P));
    if (n == 1) {
      for (int j = 0; j < N; ++j) v(j) = std::pow(grid.x_node(j), pw[0]);
    } else {
      for (int j1 = 0; j1 < N; ++j1) {
        double a = std::pow(grid.x_node(j1), pw[0]);
        for (int j2 = 0; j2 < N; ++j2)
          v(long(j1) * N + j2) = a * std::pow(grid.x_node(j2), pw[1]);
      }
    }
    return v;
  };

  // forward spectra of x^pow * u, keyed by the x power
  std::map<int, std::vector<cplx>> fwd;
  auto fwd_of = [&](const int* pw) -> const std::vector<cplx>& {
    int key = key_of(pw);
    auto it = fwd.find(key);
    if (it != fwd.end()) return it->second;
    VectorXcd xv = xpow_vec(pw);
    std::vector<cplx> buf(static_cast<size_t>(P));
    for (size_t i = 0; i < P; ++i) buf[i] = xv(long(i)) * u(long(i));
    fft::forward(buf, grid.fft_dims());
    return fwd.emplace(key, std::move(buf)).first->second;
  };

  auto binom = [](int a, int b) {
    double r = 1;
    for (int i = 0; i < b; ++i) r = r * double(a - i) / double(i + 1);
    return r;
  };

  // accumulate spectra grouped by the left x power r, then one inverse FFT per r
  std::map<int, std::vector<cplx>> grouped;
  for (const auto& m : monos) {
    double half = std::pow(0.5, m.g[0] + m.g[1]);
    std::vector<cplx> ximult(static_cast<size_t>(P));
    if (n == 1) {
      for (int i = 0; i < N; ++i) ximult[size_t(i)] = std::pow(grid.xi_node(fft_m(i, N)), m.d[0]);
    } else {
      for (int i1 = 0; i1 < N; ++i1) {
        double a = std::pow(grid.xi_node(fft_m(i1, N)), m.d[0]);
        for (int i2 = 0; i2 < N; ++i2)
          ximult[size_t(i1) * N + i2] = a * std::pow(grid.xi_node(fft_m(i2, N)), m.d[1]);
      }
    }
    int r[2];
    for (r[0] = 0; r[0] <= m.g[0]; ++r[0])
      for (r[1] = 0; r[1] <= (n == 2 ? m.g[1] : 0); ++r[1]) {
        int rem[2] = {m.g[0] - r[0], n == 2 ? m.g[1] - r[1] : 0};
        const auto& spec = fwd_of(rem);
        cplx wgt = m.c * half * binom(m.g[0], r[0]) * (n == 2 ? binom(m.g[1], r[1]) : 1.0);
        auto& acc = grouped[key_of(r)];
        if (acc.empty()) acc.assign(P, cplx(0, 0));
        for (size_t i = 0; i < P; ++i) acc[i] += wgt * ximult[i] * spec[i];
      }
  }

  VectorXcd out = VectorXcd::Zero(long(P));
  const double inv = 1.0 / double(P);
  for (auto& [key, spec] : grouped) {
    fft::backward(spec, grid.fft_dims());
    int r[2] = {key / 64, key % 64};
    VectorXcd xv = xpow_vec(r);
    for (size_t i = 0; i < P; ++i) out(long(i)) += xv(long(i)) * spec[i] * inv;
  }
  return out;
}

// ---- persistence -------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'S', 'C', 'O', 'P', '0', '1', '\n', '\0'};
}

void save_operator(const OperatorMatrix& A, const std::string& path) {
  if (A.is_matrix_free()) fail(SC_ERR_ARGUMENT, "cannot save a matrix-free operator");
  nlohmann::json h;
  h["schema_version"] = 1;
  h["method"] = A.method;
  h["symbol_desc"] = A.symbol_desc;
  h["grid"] = {{"n", A.grid.n}, {"L", A.grid.L}, {"N", A.grid.N}, {"h", A.grid.h}};
  h["storage"] = A.is_dense() ? "dense" : "sparse";
  h["rows"] = A.rows();
  h["norm_estimate"] = A.norm_estimate;
  if (A.is_sparse()) h["nnz"] = A.sparse->nonZeros();
  std::string header = h.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) fail(SC_ERR_IO, "cannot open for writing: " + path);
  f.write(kMagic, 8);
  uint64_t hl = header.size();
  f.write(reinterpret_cast<const char*>(&hl), 8);
  f.write(header.data(), long(header.size()));
  if (A.is_dense()) {
    f.write(reinterpret_cast<const char*>(A.dense->data()),
            long(sizeof(cplx)) * A.dense->size());
  } else {
    const SparseC& S = *A.sparse;
    std::vector<int64_t> outer(S.outerIndexPtr(), S.outerIndexPtr() + S.outerSize() + 1);
    std::vector<int64_t> inner(S.innerIndexPtr(), S.innerIndexPtr() + S.nonZeros());
    f.write(reinterpret_cast<const char*>(outer.data()), long(outer.size() * 8));
    f.write(reinterpret_cast<const char*>(inner.data()), long(inner.size() * 8));
    f.write(reinterpret_cast<const char*>(S.valuePtr()), long(sizeof(cplx)) * S.nonZeros());
  }
  if (!f) fail(SC_ERR_IO, "write failed: " + path);
}

OperatorMatrix load_operator(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(SC_ERR_IO, "cannot open: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0) fail(SC_ERR_IO, "bad operator file magic");
  uint64_t hl = 0;
  f.read(reinterpret_cast<char*>(&hl), 8);
  std::string header(hl, '\0');
  f.read(header.data(), long(hl));
  nlohmann::json h = nlohmann::json::parse(header);
  OperatorMatrix A;
  A.method = h["method"];
  A.symbol_desc = h["symbol_desc"];
  A.grid = PhaseSpaceGrid(h["grid"]["n"], h["grid"]["L"], h["grid"]["N"], h["grid"]["h"]);
  A.norm_estimate = h["norm_estimate"];
  const size_t rows = h["rows"];
  if (rows != A.grid.points()) fail(SC_ERR_IO, "operator file row count mismatch");
  if (h["storage"] == "dense") {
    MatrixXcd M(rows, rows);
    f.read(reinterpret_cast<char*>(M.data()), long(sizeof(cplx) * rows * rows));
    if (!f) fail(SC_ERR_IO, "truncated operator file");
    A.dense = std::make_shared<const MatrixXcd>(std::move(M));
  } else {
    const size_t nnz = h["nnz"];
    std::vector<int64_t> outer(rows + 1), inner(nnz);
    std::vector<cplx> vals(nnz);
    f.read(reinterpret_cast<char*>(outer.data()), long(outer.size() * 8));
    f.read(reinterpret_cast<char*>(inner.data()), long(inner.size() * 8));
    f.read(reinterpret_cast<char*>(vals.data()), long(sizeof(cplx) * nnz));
    if (!f) fail(SC_ERR_IO, "truncated operator file");
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(nnz);
    for (size_t col = 0; col < rows; ++col)
      for (int64_t k = outer[col]; k < outer[col + 1]; ++k)
        trip.emplace_back(int(inner[size_t(k)]), int(col), vals[size_t(k)]);
    SparseC S(rows, rows);
    S.setFromTriplets(trip.begin(), trip.end());
    S.makeCompressed();
    A.sparse = std::make_shared<const SparseC>(std::move(S));
  }
  return A;
}

}  // namespace semiclass::quantize

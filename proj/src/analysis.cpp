#include "analysis.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

#include "fft.hpp"

namespace semiclass::analysis {

using quantize::l2_norm;
using quantize::trig_eval_tensor;

double lp_norm_grid(const VectorXcd& u, const PhaseSpaceGrid& g, double p) {
  if (p < 2.0) fail(SC_ERR_ARGUMENT, "lp_norm_grid: p must be >= 2");
  if (size_t(u.size()) != g.points()) fail(SC_ERR_ARGUMENT, "lp_norm_grid: length mismatch");
  if (std::isinf(p)) return u.cwiseAbs().maxCoeff();
  double acc = 0.0;
  for (long i = 0; i < u.size(); ++i) acc += std::pow(std::abs(u(i)), p);
  return std::pow(acc * g.weight(), 1.0 / p);
}

double sup_norm_refined(const VectorXcd& u, const PhaseSpaceGrid& g) {
  long imax = 0;
  double best = -1.0;
  for (long i = 0; i < u.size(); ++i)
    if (std::abs(u(i)) > best) {
      best = std::abs(u(i));
      imax = i;
    }
  double c[2] = {0.0, 0.0};
  if (g.n == 1) {
    c[0] = g.x_node(int(imax));
  } else {
    c[0] = g.x_node(int(imax / g.N));
    c[1] = g.x_node(int(imax % g.N));
  }
  // successive local zooms of the trig interpolant around the running argmax
  double width = g.dx();
  const int pts = 9;
  for (int round = 0; round < 6; ++round) {
    std::vector<std::vector<double>> axes(size_t(g.n));
    for (int a = 0; a < g.n; ++a) {
      for (int i = 0; i < pts; ++i) {
        double x = c[a] + width * (2.0 * i / (pts - 1) - 1.0);
        x = std::clamp(x, -g.L, g.L);
        axes[size_t(a)].push_back(x);
      }
    }
    VectorXcd vals = trig_eval_tensor(u, g, axes);
    long vmax = 0;
    double vbest = -1.0;
    for (long i = 0; i < vals.size(); ++i)
      if (std::abs(vals(i)) > vbest) {
        vbest = std::abs(vals(i));
        vmax = i;
      }
    best = std::max(best, vbest);
    if (g.n == 1) {
      c[0] = axes[0][size_t(vmax)];
    } else {
      c[0] = axes[0][size_t(vmax / pts)];
      c[1] = axes[1][size_t(vmax % pts)];
    }
    width /= 6.0;
  }
  return best;
}

double theoretical_exponent(int n, double p) {
  if (p < 2.0) fail(SC_ERR_ARGUMENT, "theoretical_exponent: p must be >= 2");
  if (std::isinf(p)) return n / 4.0;
  return n / 4.0 - n / (2.0 * p);
}

double ktz_exponent(int n, double p) {
  if (p < 2.0) fail(SC_ERR_ARGUMENT, "ktz_exponent: p must be >= 2");
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  if (n == 2) return std::isinf(p) ? 0.5 : 0.5 - 1.0 / p;
  const double pc = 2.0 * n / double(n - 2);
  if (std::isinf(p)) return (n - 1) / 2.0;
  if (p >= pc) return (n - 1) / 2.0 - double(n) / p;
  return n / 4.0 - n / (2.0 * p);
}

FitResult fit_exponent(const std::vector<double>& h, const std::vector<double>& norms) {
  if (h.size() != norms.size() || h.size() < 2)
    fail(SC_ERR_ARGUMENT, "fit_exponent: need matching lists with >= 2 points");
  const size_t m = h.size();
  double sx = 0, sy = 0;
  std::vector<double> X(m), Y(m);
  for (size_t i = 0; i < m; ++i) {
    if (h[i] <= 0 || norms[i] <= 0) fail(SC_ERR_ARGUMENT, "fit_exponent: nonpositive data");
    X[i] = std::log(h[i]);
    Y[i] = std::log(norms[i]);
    sx += X[i];
    sy += Y[i];
  }
  const double mx = sx / double(m), my = sy / double(m);
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
  }
  const double slope = sxy / sxx;
  double ss = 0;
  for (size_t i = 0; i < m; ++i) {
    double r = Y[i] - my - slope * (X[i] - mx);
    ss += r * r;
  }
  FitResult fr;
  fr.delta_hat = -slope;
  fr.stderr_ = m > 2 ? std::sqrt(ss / double(m - 2) / sxx) : 0.0;
  fr.points_used = m;
  return fr;
}

ScalingReport scaling_sweep(const std::string& desc,
                            const std::vector<SweepState>& states,
                            const std::vector<double>& p_list, double fit_tol,
                            const std::function<double(double, double)>* oracle) {
  if (states.empty()) fail(SC_ERR_ARGUMENT, "scaling_sweep: empty state list");
  double hmin = states.front().h, hmax = hmin;
  for (const auto& st : states) {
    hmin = std::min(hmin, st.h);
    hmax = std::max(hmax, st.h);
  }
  if (states.size() < 5 || hmax < 16.0 * hmin * (1.0 - 1e-12))
    fail(SC_ERR_PRECONDITION,
         "scaling_sweep needs at least 5 h values spanning a factor of 16");
  ScalingReport rep;
  rep.operator_desc = desc;
  rep.n = states.front().grid.n;
  rep.fit_tol = fit_tol;
  rep.diagnostic_only = rep.n < 2;

  // usable = above the grid's resolvable floor
  std::vector<size_t> usable;
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i].h >= states[i].grid.h_floor()) usable.push_back(i);
  // deterministic rule: drop the largest usable h (pre-asymptotic) when 5+ remain
  size_t skip = states.size();
  if (usable.size() >= 5) {
    skip = usable.front();
    for (size_t i : usable)
      if (states[i].h > states[skip].h) skip = i;
  }
  rep.fit_rule = strf("fit uses h >= grid floor%s; %zu of %zu rows",
                      usable.size() >= 5 ? ", largest h dropped" : "",
                      usable.size() - (skip < states.size() ? 1 : 0), states.size());

  for (double p : p_list) {
    std::vector<double> hs, ns;
    for (size_t i = 0; i < states.size(); ++i) {
      const auto& st = states[i];
      ScalingRow row;
      row.h = st.h;
      row.p = p;
      row.norm = std::isinf(p) ? sup_norm_refined(st.u, st.grid)
                               : lp_norm_grid(st.u, st.grid, p);
      row.oracle_norm = oracle ? (*oracle)(st.h, p) : std::numeric_limits<double>::quiet_NaN();
      row.lambda = st.lambda;
      row.residual = st.residual;
      rep.rows.push_back(row);
      bool use = st.h >= st.grid.h_floor() && i != skip;
      if (use) {
        hs.push_back(st.h);
        ns.push_back(row.norm);
      }
    }
    if (hs.size() < 4)
      fail(SC_ERR_PRECONDITION, "scaling fit over fewer than 4 usable points");
    FitResult fr = fit_exponent(hs, ns);
    PFit pf;
    pf.p = p;
    pf.delta_hat = fr.delta_hat;
    pf.stderr_ = fr.stderr_;
    pf.theoretical = theoretical_exponent(rep.n, p);
    pf.ktz = ktz_exponent(rep.n, p);
    pf.points_used = fr.points_used;
    pf.pass = std::abs(pf.delta_hat - pf.theoretical) <= fit_tol;
    rep.fits.push_back(pf);
  }
  return rep;
}

// ---- Hermitian minimum eigenvalue -------------------------------------------

namespace {

// rough smallest Ritz value by Lanczos with full reorthogonalization
double lanczos_rough_min(const Eigen::MatrixXcd& H, int steps) {
  const long n = H.rows();
  steps = int(std::min<long>(steps, n));
  std::vector<VectorXcd> V;
  Rng rng(0x1a2b3c4dULL);
  VectorXcd v(n);
  for (long i = 0; i < n; ++i) v(i) = rng.cnormalish();
  v.normalize();
  V.push_back(v);
  std::vector<double> alpha, beta;
  int built = 0;
  for (int j = 0; j < steps; ++j) {
    VectorXcd w = H * V[size_t(j)];
    double aj = std::real(V[size_t(j)].dot(w));
    alpha.push_back(aj);
    built = j + 1;
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) w -= V[size_t(i)] * V[size_t(i)].dot(w);
    double b = w.norm();
    if (j + 1 == steps || b < 1e-12) break;
    beta.push_back(b);
    V.push_back(w / b);
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(built, built);
  for (int j = 0; j < built; ++j) {
    T(j, j) = alpha[size_t(j)];
    if (j + 1 < built) T(j, j + 1) = T(j + 1, j) = beta[size_t(j)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

std::pair<double, VectorXcd> hermitian_min_eig(const Eigen::MatrixXcd& H) {
  const long n = H.rows();
  if (n <= 1024) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    return {es.eigenvalues()(0), es.eigenvectors().col(0)};
  }
  // Lanczos estimate, then shifted-LLT inverse iteration pinned just below it
  double rough = lanczos_rough_min(H, 90);
  double scale = H.cwiseAbs().maxCoeff();
  double gap = std::max(1e-10 * scale, 1e-4 * std::abs(rough));
  Eigen::LLT<Eigen::MatrixXcd> llt;
  double sigma = rough - gap;
  bool ok = false;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXcd S = H;
    S.diagonal().array() -= sigma;
    llt.compute(S);
    if (llt.info() == Eigen::Success) {
      ok = true;
      break;
    }
    gap = std::max(4.0 * gap, 1e-6 * scale);
    sigma = rough - gap;
    if (attempt >= 4) sigma = -scale * std::pow(2.0, attempt - 3);  // brute retreat
  }
  if (!ok) fail(SC_ERR_CONVERGENCE, "hermitian_min_eig: shifted LLT failed");
  Rng rng(0x5ca1ab1eULL);
  VectorXcd v(n);
  for (long i = 0; i < n; ++i) v(i) = rng.cnormalish();
  v.normalize();
  double lam = rough, prev = 1e300;
  for (int it = 0; it < 400 && std::abs(lam - prev) > 1e-13 * (1.0 + std::abs(lam)); ++it) {
    VectorXcd w = llt.solve(v);
    double rho = std::real(v.dot(w));  // Rayleigh quotient of (H - sigma)^{-1}
    prev = lam;
    lam = sigma + 1.0 / rho;
    v = w / w.norm();
  }
  return {lam, v};
}

double garding_min_eig(const OperatorMatrix& A) {
  if (!A.is_dense()) fail(SC_ERR_ARGUMENT, "garding_min_eig: dense operator required");
  Eigen::MatrixXcd H = 0.5 * (*A.dense + A.dense->adjoint());
  return hermitian_min_eig(H).first;
}

GardingReport garding_check(const symbols::Symbol& a,
                            const std::function<PhaseSpaceGrid(double)>& grid_of,
                            const std::vector<double>& h_list, double stability_tol) {
  GardingReport rep;
  for (double h : h_list) {
    PhaseSpaceGrid g = grid_of(h);
    OperatorMatrix A = quantize::weyl_quantize(a, g);
    double m = garding_min_eig(A);
    // sampled symbol infimum over the midpoint/momentum grid box
    double inf_a = std::numeric_limits<double>::infinity();
    double X[4] = {0, 0, 0, 0};
    const int M = 160;
    if (g.n == 1) {
      for (int i = 0; i <= M; ++i)
        for (int j = 0; j <= M; ++j) {
          X[0] = -g.L + 2.0 * g.L * i / M;
          X[1] = -g.xi_max() + 2.0 * g.xi_max() * j / M;
          inf_a = std::min(inf_a, a.eval(X).real());
        }
    } else {
      const int M2 = 24;
      for (int i1 = 0; i1 <= M2; ++i1)
        for (int i2 = 0; i2 <= M2; ++i2)
          for (int j1 = 0; j1 <= M2; ++j1)
            for (int j2 = 0; j2 <= M2; ++j2) {
              X[0] = -g.L + 2.0 * g.L * i1 / M2;
              X[1] = -g.L + 2.0 * g.L * i2 / M2;
              X[2] = -g.xi_max() + 2.0 * g.xi_max() * j1 / M2;
              X[3] = -g.xi_max() + 2.0 * g.xi_max() * j2 / M2;
              inf_a = std::min(inf_a, a.eval(X).real());
            }
    }
    GardingRow row;
    row.h = h;
    row.min_eig = m;
    row.sym_min = inf_a;
    row.margin_rate = (m - inf_a) / h;
    rep.rows.push_back(row);
    rep.c_literal = std::max(rep.c_literal, std::max(0.0, -m) / h);
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : rep.rows) {
    lo = std::min(lo, r.margin_rate);
    hi = std::max(hi, r.margin_rate);
  }
  const double ref = std::max({std::abs(lo), std::abs(hi), 1e-12});
  rep.variation = (hi - lo) / ref;
  bool bound_ok = true;
  for (const auto& r : rep.rows)
    if (r.min_eig < -std::max(rep.c_literal, 1e-12) * r.h * (1.0 + 1e-9)) bound_ok = false;
  rep.pass = rep.variation <= stability_tol && bound_ok;
  return rep;
}

AprioriResult apriori_check(const OperatorMatrix& P, cplx lambda,
                            const symbols::Symbol& chi, const ScalingParams& sp) {
  sp.validate();
  if (!P.is_dense()) fail(SC_ERR_ARGUMENT, "apriori_check: dense operator required");
  const double eps = sp.eps();
  Eigen::MatrixXcd H = 0.5 * (*P.dense + P.dense->adjoint());
  H.diagonal().array() -= lambda.real();
  {
    OperatorMatrix Q = quantize::cutoff_quantize(chi, std::sqrt(eps), P.grid);
    H += (0.5 * eps) * (*Q.dense + Q.dense->adjoint());
  }
  auto [m, vec] = hermitian_min_eig(H);
  AprioriResult res;
  res.h = sp.h;
  res.eps = eps;
  res.min_eig = m;
  res.positive = m > 0.0;
  res.c_tilde = m > 0.0 ? eps / m : std::numeric_limits<double>::infinity();
  res.witness = vec;
  return res;
}

double microlocal_mass(const VectorXcd& u, const symbols::Symbol& psi, double delta,
                       double h, const PhaseSpaceGrid& g) {
  if (!(delta > 0.0 && delta < 0.5)) fail(SC_ERR_ARGUMENT, "microlocal_mass: delta in (0,1/2)");
  OperatorMatrix Q = quantize::cutoff_quantize(psi, std::pow(h, delta), g);
  return l2_norm(u - Q.apply(u), g);
}

double gradient_bound_worst_ratio(const std::function<double(const double*)>& f,
                                  int dim, double radius, int n_samples) {
  if (dim < 1 || dim > 4) fail(SC_ERR_ARGUMENT, "gradient_bound: dim 1..4");
  auto pts = halton_box(dim, n_samples, radius);
  const double step = 1e-4 * std::max(1.0, radius / 10.0);
  std::vector<double> grads2(pts.size()), vals(pts.size());
  double hess_sup = 0.0;
  std::vector<double> X(static_cast<size_t>(dim));
  for (size_t s = 0; s < pts.size(); ++s) {
    const auto& P = pts[s];
    vals[s] = f(P.data());
    double g2 = 0.0;
    Eigen::MatrixXd Hm(dim, dim);
    for (int i = 0; i < dim; ++i) {
      X = P;
      X[size_t(i)] += step;
      double fp = f(X.data());
      X[size_t(i)] -= 2 * step;
      double fm = f(X.data());
      double gi = (fp - fm) / (2 * step);
      g2 += gi * gi;
      Hm(i, i) = (fp - 2 * vals[s] + fm) / (step * step);
      for (int j = i + 1; j < dim; ++j) {
        X = P;
        X[size_t(i)] += step;
        X[size_t(j)] += step;
        double fpp = f(X.data());
        X[size_t(j)] -= 2 * step;
        double fpm = f(X.data());
        X[size_t(i)] -= 2 * step;
        double fmm = f(X.data());
        X[size_t(j)] += 2 * step;
        double fmp = f(X.data());
        Hm(i, j) = Hm(j, i) = (fpp - fpm - fmp + fmm) / (4 * step * step);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hm, Eigen::EigenvaluesOnly);
    hess_sup = std::max(hess_sup, es.eigenvalues().cwiseAbs().maxCoeff());
    grads2[s] = g2;
  }
  if (hess_sup <= 0) return 0.0;
  double worst = 0.0;
  for (size_t s = 0; s < pts.size(); ++s) {
    if (vals[s] < 1e-14) continue;  // the bound degenerates at the zero set
    worst = std::max(worst, grads2[s] / (2.0 * hess_sup * vals[s]));
  }
  return worst;
}

double qn_bound_value(const symbols::PolySymbol& q, int N, const ScalingParams& sp,
                      const PhaseSpaceGrid& g, const VectorXcd& u) {
  sp.validate();
  if (N < 0 || N > 4) fail(SC_ERR_ARGUMENT, "qn_bound_value: N in 0..4");
  if (N == 0) return l2_norm(u, g);
  symbols::PolySymbol qn = q.pow(N);
  return l2_norm(quantize::apply_weyl_poly(qn, std::sqrt(sp.eps()), g, u), g);
}

std::vector<DerivRow> derivative_bounds(const VectorXcd& u, const PhaseSpaceGrid& g,
                                        double h, int K) {
  if (K < 0 || K > 3) fail(SC_ERR_ARGUMENT, "derivative_bounds: K in 0..3");
  const int n = g.n, N = g.N;
  const double sh = std::sqrt(h);
  auto fft_m = [N](int i) { return i <= N / 2 - 1 ? i : i - N; };

  // all (alpha, beta) with |alpha+beta| <= K, canonical order
  std::vector<DerivRow> rows;
  std::vector<std::array<int, 2>> multis;
  for (int a0 = 0; a0 <= K; ++a0)
    for (int a1 = 0; a1 <= (n == 2 ? K - a0 : 0); ++a1) multis.push_back({a0, a1});
  for (const auto& al : multis)
    for (const auto& be : multis) {
      if (al[0] + al[1] + be[0] + be[1] > K) continue;
      // spectral derivative: (sqrt(h) d_x)^beta multiplies (i xi_m / sqrt(h))^beta
      std::vector<cplx> buf(u.data(), u.data() + u.size());
      fft::forward(buf, g.fft_dims());
      if (n == 1) {
        for (int i = 0; i < N; ++i)
          buf[size_t(i)] *= std::pow(cplx(0, g.xi_node(fft_m(i)) / sh), be[0]);
      } else {
        for (int i1 = 0; i1 < N; ++i1)
          for (int i2 = 0; i2 < N; ++i2)
            buf[size_t(i1) * N + i2] *=
                std::pow(cplx(0, g.xi_node(fft_m(i1)) / sh), be[0]) *
                std::pow(cplx(0, g.xi_node(fft_m(i2)) / sh), be[1]);
      }
      fft::backward(buf, g.fft_dims());
      const double inv = 1.0 / double(g.points());
      double best = 0.0;
      if (n == 1) {
        for (int j = 0; j < N; ++j) {
          double wgt = std::pow(g.x_node(j) / sh, al[0]);
          best = std::max(best, std::abs(wgt * buf[size_t(j)] * inv));
        }
      } else {
        for (int j1 = 0; j1 < N; ++j1)
          for (int j2 = 0; j2 < N; ++j2) {
            double wgt = std::pow(g.x_node(j1) / sh, al[0]) *
                         std::pow(g.x_node(j2) / sh, al[1]);
            best = std::max(best, std::abs(wgt * buf[size_t(j1) * N + j2] * inv));
          }
      }
      DerivRow row;
      row.alpha = al;
      row.beta = be;
      row.value = best;
      row.noise_floor = best < 1e-12;
      rows.push_back(row);
    }
  return rows;
}

}  // namespace semiclass::analysis

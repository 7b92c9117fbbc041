#include "hermite.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <mutex>

namespace semiclass::hermite {

double hermite_fn(int k, double y) {
  if (k < 0) fail(SC_ERR_ARGUMENT, "hermite_fn: negative index");
  if (y * y > 1400.0) return 0.0;  // overflow guard deep in the Gaussian tail
  double p0 = std::pow(M_PI, -0.25) * std::exp(-0.5 * y * y);
  if (k == 0) return p0;
  double pm = p0, pc = std::sqrt(2.0) * y * p0;
  for (int j = 1; j < k; ++j) {
    double pn = std::sqrt(2.0 / (j + 1.0)) * y * pc - std::sqrt(j / (j + 1.0)) * pm;
    pm = pc;
    pc = pn;
  }
  return pc;
}

double oscillator_eigenvalue(const std::vector<int>& alpha, double h) {
  if (h < 0) fail(SC_ERR_ARGUMENT, "oscillator_eigenvalue: h must be >= 0");
  int total = 0;
  for (int a : alpha) {
    if (a < 0) fail(SC_ERR_ARGUMENT, "oscillator_eigenvalue: negative index");
    total += a;
  }
  return (2.0 * total + double(alpha.size())) * h;
}

double OscillatorState::eval(const double* x) const {
  const double sh = std::sqrt(h);
  double v = std::pow(h, -n() / 4.0);
  for (int j = 0; j < n(); ++j) v *= hermite_fn(alpha[size_t(j)], x[j] / sh);
  return v;
}

namespace {

// adaptive Simpson on [a,b] to absolute tolerance
double simpson(const std::function<double(double)>& f, double a, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

// int |phi_k|^p over R (truncated at |y| <= 12: the tail is < 1e-30).
// Unit panels keep the oscillatory peaks visible to the adaptive probes; odd
// phi_k vanish at 0 and would fool a single whole-interval pass.
double axis_moment(int k, double p) {
  auto f = [k, p](double y) { return std::pow(std::abs(hermite_fn(k, y)), p); };
  double acc = 0.0;
  for (int m = -12; m < 12; ++m) acc += integrate(f, double(m), double(m + 1), 1e-11);
  return acc;
}

// sup |phi_k| via a 1e-3 grid refined by golden-section around the max
double axis_sup(int k) {
  const double R = std::sqrt(2.0 * k + 1.0) + 2.0;
  double best = 0.0, bestx = 0.0;
  for (double y = -R; y <= R; y += 1e-3) {
    double v = std::abs(hermite_fn(k, y));
    if (v > best) {
      best = v;
      bestx = y;
    }
  }
  double a = bestx - 2e-3, b = bestx + 2e-3;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  for (int it = 0; it < 80; ++it) {
    if (std::abs(hermite_fn(k, c)) > std::abs(hermite_fn(k, d))) {
      b = d;
    } else {
      a = c;
    }
    c = b - gr * (b - a);
    d = a + gr * (b - a);
  }
  return std::max(best, std::abs(hermite_fn(k, 0.5 * (a + b))));
}

std::mutex g_cache_mutex;

double axis_constant(int k, double p) {
  // (int |phi_k|^p)^{1/p} for finite p, sup |phi_k| for p = inf
  static std::map<std::pair<int, double>, double> cache;
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto key = std::make_pair(k, p);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  double v = std::isinf(p) ? axis_sup(k) : std::pow(axis_moment(k, p), 1.0 / p);
  cache.emplace(key, v);
  return v;
}

}  // namespace

double lp_constant(const std::vector<int>& alpha, double p) {
  if (p < 2.0) fail(SC_ERR_ARGUMENT, "lp norms defined for p >= 2");
  if (alpha.empty() || int(alpha.size()) > 4)
    fail(SC_ERR_ARGUMENT, "alpha must have 1..4 components");
  for (int a : alpha)
    if (a < 0 || a > 20) fail(SC_ERR_ARGUMENT, "alpha components must be in 0..20");
  if (p == 2.0) return 1.0;  // exact by normalization
  double c = 1.0;
  for (int a : alpha) c *= axis_constant(a, p);
  return c;
}

double lp_exponent(int n, double p) {
  if (p < 2.0) fail(SC_ERR_ARGUMENT, "lp norms defined for p >= 2");
  if (std::isinf(p)) return -n / 4.0;
  return n / (2.0 * p) - n / 4.0;
}

double lp_norm_exact(const std::vector<int>& alpha, double h, double p) {
  if (h <= 0) fail(SC_ERR_ARGUMENT, "lp_norm_exact: h must be positive");
  return lp_constant(alpha, p) * std::pow(h, lp_exponent(int(alpha.size()), p));
}

Eigen::VectorXcd sample_state(const std::vector<int>& alpha, double h,
                              const quantize::PhaseSpaceGrid& g) {
  if (int(alpha.size()) != g.n) fail(SC_ERR_ARGUMENT, "sample_state: alpha arity != grid.n");
  OscillatorState st{alpha, h};
  Eigen::VectorXcd u(g.points());
  double x[2];
  if (g.n == 1) {
    for (int j = 0; j < g.N; ++j) {
      x[0] = g.x_node(j);
      u(j) = st.eval(x);
    }
  } else {
    for (int j1 = 0; j1 < g.N; ++j1) {
      x[0] = g.x_node(j1);
      for (int j2 = 0; j2 < g.N; ++j2) {
        x[1] = g.x_node(j2);
        u(long(j1) * g.N + j2) = st.eval(x);
      }
    }
  }
  return u;
}

}  // namespace semiclass::hermite

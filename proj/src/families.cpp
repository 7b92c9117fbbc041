#include "families.hpp"

#include <cmath>

namespace semiclass::families {

double bump(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

double smoothstep_down(double r, double r0, double r1) {
  if (r <= r0) return 1.0;
  if (r >= r1) return 0.0;
  auto theta = [](double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; };
  double t = (r - r0) / (r1 - r0);
  return theta(1.0 - t) / (theta(1.0 - t) + theta(t));
}

namespace {

double vee(const double* x, int n) {  // V = |x|^2 + 0.3 x1^3 bump(x1)
  double v = 0;
  for (int j = 0; j < n; ++j) v += x[j] * x[j];
  return v + 0.3 * x[0] * x[0] * x[0] * bump(x[0]);
}

double dub(const double* x) {  // W = 0.2 x1^2 tanh(x1)
  return 0.2 * x[0] * x[0] * std::tanh(x[0]);
}

PolySymbol oscillator_poly(int n) {
  PolySymbol p(n);
  for (int s = 0; s < 2 * n; ++s) {
    symbols::Expo e(size_t(2 * n + 1), 0);
    e[size_t(s)] = 2;
    p.add_term(e, CRat(1));
  }
  return p;
}

}  // namespace

bool is_known_family(const std::string& name) {
  return name == "oscillator" || name == "complex_perturbed" ||
         name == "complex_perturbed_1d" || name == "sin_perturbed" ||
         name == "oscillator_complex";
}

bool has_schrodinger_form(const std::string& name) {
  return name == "oscillator" || name == "complex_perturbed" ||
         name == "complex_perturbed_1d";
}

Symbol full_symbol(const std::string& name, int dim) {
  const int n = dim;
  if (name == "oscillator") return Symbol::of(oscillator_poly(n));
  if (name == "oscillator_complex") {
    // xi^2 + (1 + i/10) x^2, one-dimensional complex oscillator
    if (n != 1) fail(SC_ERR_ARGUMENT, "oscillator_complex is one-dimensional");
    return Symbol::of(symbols::parse("xi^2 + x^2 + 0.1i*x^2", 1));
  }
  if (name == "complex_perturbed" || name == "complex_perturbed_1d") {
    CallableSymbol cs;
    cs.dim = n;
    if (name == "complex_perturbed_1d") {
      if (n != 1) fail(SC_ERR_ARGUMENT, "complex_perturbed_1d is one-dimensional");
      cs.desc = "xi^2 + x^2 + 0.2i*x^2*tanh(x)";
      cs.f = [](const double* X) {
        double x = X[0], xi = X[1];
        return cplx(xi * xi + x * x, 0.2 * x * x * std::tanh(x));
      };
    } else {
      cs.desc = "|xi|^2 + |x|^2 + 0.3*x1^3*bump(x1) + 0.2i*x1^2*tanh(x1)";
      const int nn = n;
      cs.f = [nn](const double* X) {
        double k2 = 0;
        for (int j = 0; j < nn; ++j) k2 += X[nn + j] * X[nn + j];
        return cplx(k2 + vee(X, nn), dub(X));
      };
    }
    return Symbol::of(std::move(cs));
  }
  if (name == "sin_perturbed") {
    // |X|^2 + (1 + sin(x1) sin(xi1))/2: real, nonnegative, bounded curvature
    CallableSymbol cs;
    cs.dim = n;
    cs.desc = "|X|^2 + 0.5*sin(x1)*sin(xi1) + 0.5";
    const int nn = n;
    cs.f = [nn](const double* X) {
      double r2 = 0;
      for (int j = 0; j < 2 * nn; ++j) r2 += X[j] * X[j];
      return cplx(r2 + 0.5 * std::sin(X[0]) * std::sin(X[nn]) + 0.5, 0.0);
    };
    return Symbol::of(std::move(cs));
  }
  fail(SC_ERR_ARGUMENT, "unknown symbol family '" + name + "'");
}

Symbol potential_symbol(const std::string& name, int dim) {
  const int n = dim;
  if (name == "oscillator") {
    PolySymbol p(n);
    for (int s = 0; s < n; ++s) {
      symbols::Expo e(size_t(2 * n + 1), 0);
      e[size_t(s)] = 2;
      p.add_term(e, CRat(1));
    }
    return Symbol::of(p);
  }
  if (name == "complex_perturbed") {
    CallableSymbol cs;
    cs.dim = n;
    cs.desc = "|x|^2 + 0.3*x1^3*bump(x1) + 0.2i*x1^2*tanh(x1)";
    const int nn = n;
    cs.f = [nn](const double* X) { return cplx(vee(X, nn), dub(X)); };
    return Symbol::of(std::move(cs));
  }
  if (name == "complex_perturbed_1d") {
    if (n != 1) fail(SC_ERR_ARGUMENT, "complex_perturbed_1d is one-dimensional");
    CallableSymbol cs;
    cs.dim = 1;
    cs.desc = "x^2 + 0.2i*x^2*tanh(x)";
    cs.f = [](const double* X) {
      double x = X[0];
      return cplx(x * x, 0.2 * x * x * std::tanh(x));
    };
    return Symbol::of(std::move(cs));
  }
  fail(SC_ERR_ARGUMENT, "family '" + name + "' has no Schrodinger form");
}

PolySymbol quadratic_model(const std::string& name, int dim) {
  if (name == "oscillator" || name == "complex_perturbed" ||
      name == "complex_perturbed_1d")
    return symbols::quadratic_part(full_symbol(name, dim));
  if (name == "oscillator_complex")
    return symbols::parse("xi^2 + x^2 + 0.1i*x^2", 1);
  fail(SC_ERR_ARGUMENT, "family '" + name + "' has no double characteristic at 0");
}

namespace {

Symbol radial_cutoff(int dim, double r0, double r1, const std::string& desc) {
  CallableSymbol cs;
  cs.dim = dim;
  cs.desc = desc;
  const int d = 2 * dim;
  cs.f = [d, r0, r1](const double* X) {
    double r2 = 0;
    for (int j = 0; j < d; ++j) r2 += X[j] * X[j];
    return cplx(smoothstep_down(std::sqrt(r2), r0, r1), 0.0);
  };
  return Symbol::of(std::move(cs));
}

}  // namespace

Symbol chi_cutoff(int dim) { return radial_cutoff(dim, 1.0, 2.0, "chi(|X|), 1 to 2"); }
Symbol psi_cutoff(int dim) { return radial_cutoff(dim, 2.0, 3.0, "psi(|X|), 2 to 3"); }

}  // namespace semiclass::families

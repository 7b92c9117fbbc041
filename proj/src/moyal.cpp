#include "moyal.hpp"

#include <algorithm>

namespace semiclass::moyal {

namespace {

// All multi-indices over n axes of weight w.
void enum_multi(int n, int w, std::vector<uint32_t>& cur, int axis,
                std::vector<std::vector<uint32_t>>& out) {
  if (axis == n - 1) {
    cur[axis] = uint32_t(w);
    out.push_back(cur);
    return;
  }
  for (int k = 0; k <= w; ++k) {
    cur[axis] = uint32_t(k);
    enum_multi(n, w - k, cur, axis + 1, out);
  }
}

std::vector<std::vector<uint32_t>> multi_indices(int n, int w) {
  std::vector<std::vector<uint32_t>> out;
  std::vector<uint32_t> cur(n, 0);
  enum_multi(n, w, cur, 0, out);
  return out;
}

Rat factorial(int k) {
  Rat f(1);
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

Rat multi_factorial(const std::vector<uint32_t>& a) {
  Rat f(1);
  for (uint32_t v : a) f *= factorial(int(v));
  return f;
}

PolySymbol multi_derivative(const PolySymbol& p, const std::vector<uint32_t>& alpha,
                            int slot0) {
  PolySymbol d = p;
  for (size_t j = 0; j < alpha.size(); ++j)
    for (uint32_t k = 0; k < alpha[j]; ++k) d = d.derivative(slot0 + int(j));
  return d;
}

}  // namespace

PolySymbol sigma_power_term(const PolySymbol& a, const PolySymbol& b, int k) {
  if (a.dim() != b.dim()) fail(SC_ERR_ARGUMENT, "sigma_power_term: dimension mismatch");
  if (k < 1) fail(SC_ERR_ARGUMENT, "sigma_power_term: k must be >= 1");
  const int n = a.dim();
  PolySymbol acc(n);
  const Rat kfac = factorial(k);
  for (int wa = 0; wa <= k; ++wa) {
    const int wb = k - wa;
    for (const auto& alpha : multi_indices(n, wa)) {
      PolySymbol da = multi_derivative(a, alpha, n);  // d_xi^alpha
      if (da.is_zero()) continue;
      for (const auto& beta : multi_indices(n, wb)) {
        PolySymbol dab = multi_derivative(da, beta, 0);  // d_x^beta
        if (dab.is_zero()) continue;
        PolySymbol db = multi_derivative(multi_derivative(b, alpha, 0), beta, n);
        if (db.is_zero()) continue;
        Rat coef = kfac / (multi_factorial(alpha) * multi_factorial(beta));
        if (wa % 2 == 1) coef = -coef;
        acc = acc + (dab * db).scaled(CRat(coef));
      }
    }
  }
  return acc;
}

StarExpansion star_expansion(const PolySymbol& a, const PolySymbol& b) {
  StarExpansion ex;
  const int kmax = std::max(0, std::min(a.degree_xxi(), b.degree_xxi()));
  ex.terms.emplace_back(0, a * b);
  // (i/2)^k / k!, with the h^k power attached by the caller
  CRat ipow(1);
  Rat kfac(1);
  for (int k = 1; k <= kmax; ++k) {
    ipow = ipow * CRat::i_unit();
    kfac *= k;
    PolySymbol t = sigma_power_term(a, b, k);
    Rat scale = Rat(1) / (kfac * Rat(mpz_class(1) << k));
    ex.terms.emplace_back(k, t.scaled(ipow * CRat(scale)));
  }
  return ex;
}

PolySymbol star_product(const PolySymbol& a, const PolySymbol& b) {
  // inputs may already carry h (iterated products stay exact)
  StarExpansion ex = star_expansion(a, b);
  const int n = a.dim();
  PolySymbol acc(n);
  for (const auto& [k, term] : ex.terms) {
    PolySymbol hk = PolySymbol::variable(n, 2 * n).pow(k);
    acc = acc + term * hk;
  }
  return acc;
}

PolySymbol star_product(const PolySymbol& a, const PolySymbol& b, const CRat& h) {
  return star_product(a, b).substitute_h(h);
}

PolySymbol star_commutator(const PolySymbol& a, const PolySymbol& b) {
  return star_product(a, b) - star_product(b, a);
}

PolySymbol star_commutator(const PolySymbol& a, const PolySymbol& b, const CRat& h) {
  return star_commutator(a, b).substitute_h(h);
}

PolySymbol poisson_bracket(const PolySymbol& a, const PolySymbol& b) {
  if (a.dim() != b.dim()) fail(SC_ERR_ARGUMENT, "poisson_bracket: dimension mismatch");
  const int n = a.dim();
  PolySymbol acc(n);
  for (int j = 0; j < n; ++j) {
    acc = acc + a.derivative(n + j) * b.derivative(j);
    acc = acc - a.derivative(j) * b.derivative(n + j);
  }
  return acc;
}

}  // namespace semiclass::moyal

#pragma once

// Phase-space symbols.  PolySymbol is an exact multivariate polynomial in
// (x_1..x_n, xi_1..xi_n) and the formal parameter h, with complex rational
// coefficients and canonical sorted-term storage.  CallableSymbol wraps
// non-polynomial symbols (cutoffs, tanh-type potentials) behind a plain
// evaluator.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rational.hpp"
#include "util.hpp"

namespace semiclass::symbols {

// Exponent vector: x_1..x_n, xi_1..xi_n, then h (slot 2n).
using Expo = std::vector<uint32_t>;

class PolySymbol {
 public:
  explicit PolySymbol(int dim) : dim_(dim) {
    if (dim < 1 || dim > 4) fail(SC_ERR_ARGUMENT, "PolySymbol: dim must be in 1..4");
  }
  static PolySymbol constant(int dim, const CRat& c);
  // slot in [0, 2n]: x_j = j, xi_j = n+j, h = 2n
  static PolySymbol variable(int dim, int slot);

  int dim() const { return dim_; }
  int nslots() const { return 2 * dim_ + 1; }
  const std::map<Expo, CRat>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Expo& e, const CRat& c);

  PolySymbol operator-() const;
  PolySymbol operator+(const PolySymbol& o) const;
  PolySymbol operator-(const PolySymbol& o) const;
  PolySymbol operator*(const PolySymbol& o) const;
  PolySymbol scaled(const CRat& c) const;
  PolySymbol pow(int k) const;
  bool operator==(const PolySymbol& o) const {
    return dim_ == o.dim_ && terms_ == o.terms_;
  }

  PolySymbol derivative(int slot) const;
  PolySymbol conjugated() const;  // conjugate coefficients; h stays real formal
  PolySymbol substitute_h(const CRat& h) const;

  // Total degree in the (x, xi) slots only; -1 for the zero polynomial.
  int degree_xxi() const;
  int max_h_power() const;
  bool has_formal_h() const { return max_h_power() > 0; }
  bool depends_on_slot(int slot) const;

  cplx eval(const double* X, double h = 0.0) const;  // X has length 2n
  CRat eval_exact(const std::vector<CRat>& X, const CRat& h) const;

  CRat value_at0() const;
  std::vector<CRat> gradient_at0() const;               // length 2n
  std::vector<std::vector<CRat>> hessian_at0() const;   // 2n x 2n, symmetric

  std::string str() const;
  std::string json() const;

 private:
  int dim_;
  std::map<Expo, CRat> terms_;  // no zero coefficients stored
};

struct CallableSymbol {
  int dim = 1;
  std::string desc;
  std::function<cplx(const double*)> f;  // argument has length 2n
};

// Tagged union handed across module boundaries and the C API.
struct Symbol {
  std::optional<PolySymbol> poly;
  std::optional<CallableSymbol> call;

  static Symbol of(PolySymbol p) { return Symbol{std::move(p), std::nullopt}; }
  static Symbol of(CallableSymbol c) { return Symbol{std::nullopt, std::move(c)}; }

  bool is_poly() const { return poly.has_value(); }
  int dim() const { return poly ? poly->dim() : call->dim; }
  std::string desc() const { return poly ? poly->str() : call->desc; }
  cplx eval(const double* X) const;  // rejects polynomials carrying formal h
};

// Expression grammar: variables x1..xn, xi1..xin (x/xi aliases when n == 1),
// h; operators + - * ^; decimal and imaginary literals parsed as exact
// rationals.
PolySymbol parse(const std::string& expr, int dim);

// q(X) = 1/2 p''(0) X.X; requires |p(0)|, |grad p(0)| <= 1e-8.  Exact Hessian
// for polynomials, central differences (step 1e-4) for callables.
PolySymbol quadratic_part(const Symbol& p);

// r = p - q with q = quadratic_part(p); exact for polynomials.  Spot-checks
// r(X) = O(|X|^3) at |X| = 1e-2, 1e-3.
Symbol remainder_part(const Symbol& p, const PolySymbol& q);

struct AssumptionReport {
  bool nonneg_real_part = false;
  double worst_re_violation = 0.0;        // min sampled Re p (negative = witness)
  std::vector<double> worst_re_point;
  double ellipticity_constant = 0.0;      // min Re p / <X>^2 over |X| >= radius/2
  bool zero_set_ok = false;               // Re p > 0 at sampled X != 0
  std::vector<std::vector<cplx>> hessian; // p''(0), 2n x 2n
  double re_q_min_eig = 0.0;              // min eig of the form matrix of Re q
  double lower_bound_C = 0.0;             // max |X|^2 / Re p(X) over samples
  double radius = 0.0;
  int n_samples = 0;

  bool all_passed() const {
    return nonneg_real_part && zero_set_ok && ellipticity_constant > 0.0 &&
           re_q_min_eig > 0.0;
  }
  std::string json() const;
};

// Deterministic Halton sampling over [-radius, radius]^{2n}; never throws on
// a failing symbol, the report carries the failed flags.
AssumptionReport check_assumptions(const Symbol& p, double radius, int n_samples);

// Hessian of a callable at 0 by central differences (step 1e-4).
std::vector<std::vector<cplx>> fd_hessian_at0(const Symbol& p, double step = 1e-4);

}  // namespace semiclass::symbols

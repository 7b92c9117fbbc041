#pragma once

// Exact Weyl-symbol composition on polynomials.  The bidifferential operator
// sigma(D)^k and the star product are computed over Q(i) with h kept as a
// formal variable, so the algebraic identities (termination, associativity,
// vanishing star commutators of a quadratic with its powers) are exact.
//
// Conventions, pinned by tests:
//   sigma^k(a,b) = sum_{|alpha|+|beta|=k} (-1)^{|alpha|} k!/(alpha! beta!)
//                  (d_xi^alpha d_x^beta a)(d_x^alpha d_xi^beta b)
//   a # b        = sum_k (1/k!) (ih/2)^k sigma^k(a,b)
//   {a,b}        = sum_j (d_xi_j a)(d_x_j b) - (d_x_j a)(d_xi_j b),  {xi,x} = 1
//   sigma^1(a,b) = -{a,b}, hence a#b - b#a = (h/i){a,b} + odd terms k >= 3.

#include <vector>

#include "polysymbol.hpp"

namespace semiclass::moyal {

using symbols::PolySymbol;

// The k-th bidifferential term; k >= 1.
PolySymbol sigma_power_term(const PolySymbol& a, const PolySymbol& b, int k);

struct StarExpansion {
  std::vector<std::pair<int, PolySymbol>> terms;  // (order k, (1/k!)(i/2)^k sigma^k term, no h factor)
  bool h_symbolic = true;
};

// Per-order expansion terms; terminates at k = min(deg a, deg b).
StarExpansion star_expansion(const PolySymbol& a, const PolySymbol& b);

// Exact terminating star product with formal h.
PolySymbol star_product(const PolySymbol& a, const PolySymbol& b);
// Same with a numeric (real) h substituted.
PolySymbol star_product(const PolySymbol& a, const PolySymbol& b, const CRat& h);

PolySymbol star_commutator(const PolySymbol& a, const PolySymbol& b);
PolySymbol star_commutator(const PolySymbol& a, const PolySymbol& b, const CRat& h);

PolySymbol poisson_bracket(const PolySymbol& a, const PolySymbol& b);

}  // namespace semiclass::moyal

#pragma once

// Shipped symbol families and cutoff profiles.  The perturbed family keeps
// globally bounded second derivatives: the cubic bump confines the V
// perturbation to |x1| <= 1 so ellipticity at infinity survives, and
// x1^2 tanh(x1) has bounded W''.

#include "polysymbol.hpp"

namespace semiclass::families {

using symbols::CallableSymbol;
using symbols::PolySymbol;
using symbols::Symbol;

// smooth bump on (-1,1): exp(1 - 1/(1-t^2)), value 1 at t = 0
double bump(double t);

// smooth transition: 1 for r <= r0, 0 for r >= r1
double smoothstep_down(double r, double r0, double r1);

// full phase-space symbol of the family (for assumptions / quantization)
Symbol full_symbol(const std::string& name, int dim);

// x-only potential V + iW for the Schrodinger paths; null when the family is
// not of Schrodinger form
bool has_schrodinger_form(const std::string& name);
Symbol potential_symbol(const std::string& name, int dim);

// quadratic model at the double characteristic (exact polynomial)
PolySymbol quadratic_model(const std::string& name, int dim);

// cutoffs chi (1 on |X|<=1, supported in |X|<=2) and psi (1 on |X|<=2,
// supported in |X|<=3)
Symbol chi_cutoff(int dim);
Symbol psi_cutoff(int dim);

bool is_known_family(const std::string& name);

}  // namespace semiclass::families

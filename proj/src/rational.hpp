#pragma once

// Exact complex rational coefficients (GMP).  Symbol algebra and the Moyal
// expansion run over Q(i) so the algebraic identities hold exactly, not just
// to rounding; doubles only appear when a symbol is evaluated on a grid.

#include <gmpxx.h>

#include <complex>
#include <string>

namespace semiclass {

using Rat = mpq_class;

inline Rat rat_of_double(double x) { return Rat(x); }  // exact (doubles are dyadic)

// mpq_class(num, den) does not canonicalize; always build fractions here
inline Rat frac(long num, long den) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline double rat_to_double(const Rat& r) { return r.get_d(); }

struct CRat {
  Rat re, im;

  CRat() : re(0), im(0) {}
  CRat(long r) : re(r), im(0) {}
  CRat(const Rat& r) : re(r), im(0) {}
  CRat(const Rat& r, const Rat& i) : re(r), im(i) {}

  static CRat i_unit() { return CRat(Rat(0), Rat(1)); }
  static CRat from_cplx(std::complex<double> z) {
    return CRat(rat_of_double(z.real()), rat_of_double(z.imag()));
  }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  CRat conj() const { return CRat(re, -im); }
  std::complex<double> to_cplx() const { return {re.get_d(), im.get_d()}; }

  CRat operator-() const { return CRat(-re, -im); }
  CRat& operator+=(const CRat& o) { re += o.re; im += o.im; return *this; }
  CRat& operator-=(const CRat& o) { re -= o.re; im -= o.im; return *this; }

  friend CRat operator+(CRat a, const CRat& b) { return a += b; }
  friend CRat operator-(CRat a, const CRat& b) { return a -= b; }
  friend CRat operator*(const CRat& a, const CRat& b) {
    return CRat(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
  }
  friend bool operator==(const CRat& a, const CRat& b) {
    return a.re == b.re && a.im == b.im;
  }
};

inline std::string rat_str(const Rat& r) { return r.get_str(); }

}  // namespace semiclass

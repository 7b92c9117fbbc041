#include "polysymbol.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace semiclass::symbols {

PolySymbol PolySymbol::constant(int dim, const CRat& c) {
  PolySymbol p(dim);
  p.add_term(Expo(2 * dim + 1, 0), c);
  return p;
}

PolySymbol PolySymbol::variable(int dim, int slot) {
  PolySymbol p(dim);
  if (slot < 0 || slot > 2 * dim) fail(SC_ERR_ARGUMENT, "variable: slot out of range");
  Expo e(2 * dim + 1, 0);
  e[slot] = 1;
  p.add_term(e, CRat(1));
  return p;
}

void PolySymbol::add_term(const Expo& e, const CRat& c) {
  if (int(e.size()) != nslots()) fail(SC_ERR_INTERNAL, "add_term: exponent arity");
  if (c.is_zero()) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

PolySymbol PolySymbol::operator-() const {
  PolySymbol r(dim_);
  for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
  return r;
}

PolySymbol PolySymbol::operator+(const PolySymbol& o) const {
  if (dim_ != o.dim_) fail(SC_ERR_ARGUMENT, "symbol dimensions differ");
  PolySymbol r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

PolySymbol PolySymbol::operator-(const PolySymbol& o) const { return *this + (-o); }

PolySymbol PolySymbol::operator*(const PolySymbol& o) const {
  if (dim_ != o.dim_) fail(SC_ERR_ARGUMENT, "symbol dimensions differ");
  PolySymbol r(dim_);
  Expo e(nslots());
  for (const auto& [ea, ca] : terms_)
    for (const auto& [eb, cb] : o.terms_) {
      for (int i = 0; i < nslots(); ++i) e[i] = ea[i] + eb[i];
      r.add_term(e, ca * cb);
    }
  return r;
}

PolySymbol PolySymbol::scaled(const CRat& c) const {
  PolySymbol r(dim_);
  if (c.is_zero()) return r;
  for (const auto& [e, co] : terms_) r.terms_.emplace(e, co * c);
  return r;
}

PolySymbol PolySymbol::pow(int k) const {
  if (k < 0) fail(SC_ERR_ARGUMENT, "pow: negative exponent");
  PolySymbol r = constant(dim_, CRat(1));
  for (int i = 0; i < k; ++i) r = r * (*this);
  return r;
}

PolySymbol PolySymbol::derivative(int slot) const {
  PolySymbol r(dim_);
  for (const auto& [e, c] : terms_) {
    if (e[slot] == 0) continue;
    Expo d = e;
    d[slot] -= 1;
    r.add_term(d, c * CRat(long(e[slot])));
  }
  return r;
}

PolySymbol PolySymbol::conjugated() const {
  PolySymbol r(dim_);
  for (const auto& [e, c] : terms_) r.terms_.emplace(e, c.conj());
  return r;
}

PolySymbol PolySymbol::substitute_h(const CRat& h) const {
  PolySymbol r(dim_);
  const int hs = 2 * dim_;
  for (const auto& [e, c] : terms_) {
    CRat f = c;
    for (uint32_t k = 0; k < e[hs]; ++k) f = f * h;
    Expo d = e;
    d[hs] = 0;
    r.add_term(d, f);
  }
  return r;
}

int PolySymbol::degree_xxi() const {
  int deg = -1;
  for (const auto& [e, c] : terms_) {
    int d = 0;
    for (int i = 0; i < 2 * dim_; ++i) d += int(e[i]);
    deg = std::max(deg, d);
  }
  return deg;
}

int PolySymbol::max_h_power() const {
  int m = 0;
  for (const auto& [e, c] : terms_) m = std::max(m, int(e[2 * dim_]));
  return m;
}

bool PolySymbol::depends_on_slot(int slot) const {
  for (const auto& [e, c] : terms_)
    if (e[slot] > 0) return true;
  return false;
}

cplx PolySymbol::eval(const double* X, double h) const {
  cplx acc = 0.0;
  for (const auto& [e, c] : terms_) {
    double mono = 1.0;
    for (int i = 0; i < 2 * dim_; ++i)
      for (uint32_t k = 0; k < e[i]; ++k) mono *= X[i];
    for (uint32_t k = 0; k < e[2 * dim_]; ++k) mono *= h;
    acc += c.to_cplx() * mono;
  }
  return acc;
}

CRat PolySymbol::eval_exact(const std::vector<CRat>& X, const CRat& h) const {
  CRat acc;
  for (const auto& [e, c] : terms_) {
    CRat mono(1);
    for (int i = 0; i < 2 * dim_; ++i)
      for (uint32_t k = 0; k < e[i]; ++k) mono = mono * X[size_t(i)];
    for (uint32_t k = 0; k < e[2 * dim_]; ++k) mono = mono * h;
    acc += c * mono;
  }
  return acc;
}

CRat PolySymbol::value_at0() const {
  auto it = terms_.find(Expo(nslots(), 0));
  return it == terms_.end() ? CRat() : it->second;
}

std::vector<CRat> PolySymbol::gradient_at0() const {
  std::vector<CRat> g(2 * dim_);
  for (int i = 0; i < 2 * dim_; ++i) {
    Expo e(nslots(), 0);
    e[i] = 1;
    auto it = terms_.find(e);
    if (it != terms_.end()) g[i] = it->second;
  }
  return g;
}

std::vector<std::vector<CRat>> PolySymbol::hessian_at0() const {
  std::vector<std::vector<CRat>> H(2 * dim_, std::vector<CRat>(2 * dim_));
  for (int i = 0; i < 2 * dim_; ++i)
    for (int j = i; j < 2 * dim_; ++j) {
      Expo e(nslots(), 0);
      e[i] += 1;
      e[j] += 1;
      auto it = terms_.find(e);
      CRat c = it == terms_.end() ? CRat() : it->second;
      if (i == j) c = c * CRat(2);  // d^2/dx^2 of x^2 term
      H[i][j] = c;
      H[j][i] = c;
    }
  return H;
}

// ---- printing ------------------------------------------------------------

namespace {

std::string coeff_str(const CRat& c, bool* parenthesized) {
  *parenthesized = false;
  auto frac = [](const Rat& r) { return rat_str(r); };
  if (c.im == 0) {
    const Rat& r = c.re;
    if (r.get_den() == 1) return frac(r);
    *parenthesized = true;
    return "(" + frac(r) + ")";
  }
  if (c.re == 0) {
    const Rat& b = c.im;
    if (b == 1) return "i";
    if (b == -1) return "-i";
    if (b.get_den() == 1) return frac(b) + "i";
    *parenthesized = true;
    std::string num = b.get_num().get_str();
    std::string den = b.get_den().get_str();
    if (num == "1") return "(i/" + den + ")";
    if (num == "-1") return "(-i/" + den + ")";
    return "(" + num + "i/" + den + ")";
  }
  *parenthesized = true;
  std::string im = frac(c.im < 0 ? Rat(-c.im) : c.im);
  return "(" + frac(c.re) + (c.im < 0 ? "-" : "+") + im + "i)";
}

std::string mono_str(const Expo& e, int n) {
  std::ostringstream os;
  bool first = true;
  auto put = [&](const std::string& v, uint32_t p) {
    if (p == 0) return;
    if (!first) os << "*";
    first = false;
    os << v;
    if (p > 1) os << "^" << p;
  };
  for (int j = 0; j < n; ++j) put("x" + std::to_string(j + 1), e[j]);
  for (int j = 0; j < n; ++j) put("xi" + std::to_string(j + 1), e[n + j]);
  put("h", e[2 * n]);
  return os.str();
}

int total_degree(const Expo& e) {
  int d = 0;
  for (uint32_t p : e) d += int(p);
  return d;
}

}  // namespace

std::string PolySymbol::str() const {
  if (terms_.empty()) return "0";
  // display order: descending total degree, then the canonical map order
  std::vector<const std::pair<const Expo, CRat>*> ts;
  for (const auto& t : terms_) ts.push_back(&t);
  std::stable_sort(ts.begin(), ts.end(), [](auto* a, auto* b) {
    int da = total_degree(a->first), db = total_degree(b->first);
    if (da != db) return da > db;
    return a->first > b->first;  // x-heavy monomials first within a degree
  });
  std::ostringstream os;
  bool first = true;
  for (auto* t : ts) {
    const auto& [e, c] = *t;
    std::string mono = mono_str(e, dim_);
    bool paren = false;
    CRat cc = c;
    bool neg_pullout = false;
    if (!first && cc.im == 0 && cc.re < 0) {
      neg_pullout = true;
      cc = -cc;
    }
    std::string cs = coeff_str(cc, &paren);
    if (!first) os << (neg_pullout ? " - " : " + ");
    if (mono.empty()) {
      os << cs;
    } else if (cs == "1") {
      os << mono;
    } else if (cs == "-1") {
      os << "-" << mono;
    } else if (paren) {
      os << cs << mono;  // e.g. (i/2)h
    } else {
      os << cs << "*" << mono;
    }
    first = false;
  }
  return os.str();
}

std::string PolySymbol::json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["text"] = str();
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [e, c] : terms_) {
    nlohmann::json t;
    t["exp"] = std::vector<uint32_t>(e.begin(), e.begin() + 2 * dim_);
    t["h"] = e[2 * dim_];
    t["re"] = rat_str(c.re);
    t["im"] = rat_str(c.im);
    terms.push_back(t);
  }
  j["terms"] = terms;
  return j.dump();
}

cplx Symbol::eval(const double* X) const {
  if (poly) {
    if (poly->has_formal_h())
      fail(SC_ERR_PRECONDITION, "symbol carries formal h; substitute a value first");
    return poly->eval(X, 0.0);
  }
  return call->f(X);
}

// ---- parser ---------------------------------------------------------------

namespace {

struct Parser {
  const std::string& s;
  size_t pos = 0;
  int dim;

  explicit Parser(const std::string& str, int d) : s(str), dim(d) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(uint8_t(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  [[noreturn]] void err(const std::string& msg) {
    fail(SC_ERR_PARSE, "symbol parse error at position " + std::to_string(pos) + ": " + msg);
  }

  PolySymbol expr() {
    bool neg = false;
    if (eat('-'))
      neg = true;
    else
      eat('+');
    PolySymbol acc = term();
    if (neg) acc = -acc;
    while (true) {
      if (eat('+'))
        acc = acc + term();
      else if (eat('-'))
        acc = acc - term();
      else
        break;
    }
    return acc;
  }

  PolySymbol term() {
    PolySymbol acc = factor();
    while (eat('*')) acc = acc * factor();
    return acc;
  }

  PolySymbol factor() {
    PolySymbol base = atom();
    if (eat('^')) {
      skip_ws();
      size_t start = pos;
      while (pos < s.size() && std::isdigit(uint8_t(s[pos]))) ++pos;
      if (pos == start) err("expected integer exponent after '^'");
      base = base.pow(std::stoi(s.substr(start, pos - start)));
    }
    return base;
  }

  PolySymbol atom() {
    skip_ws();
    if (eat('(')) {
      PolySymbol inner = expr();
      if (!eat(')')) err("missing ')'");
      return inner;
    }
    if (eat('-')) return -atom();
    char c = peek();
    if (std::isdigit(uint8_t(c)) || c == '.') return number();
    if (std::isalpha(uint8_t(c))) return name();
    err("expected number, variable or '('");
  }

  PolySymbol number() {
    size_t start = pos;
    while (pos < s.size() && (std::isdigit(uint8_t(s[pos])) || s[pos] == '.')) ++pos;
    size_t mant_end = pos;
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
      size_t save = pos;
      ++pos;
      if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
      if (pos < s.size() && std::isdigit(uint8_t(s[pos]))) {
        while (pos < s.size() && std::isdigit(uint8_t(s[pos]))) ++pos;
      } else {
        pos = save;  // "e" belongs to something else
      }
    }
    Rat val = decimal_to_rat(s.substr(start, pos - start), mant_end - start);
    bool imag = false;
    if (pos < s.size() && s[pos] == 'i' &&
        !(pos + 1 < s.size() && std::isalnum(uint8_t(s[pos + 1])))) {
      imag = true;
      ++pos;
    }
    CRat c = imag ? CRat(Rat(0), val) : CRat(val);
    return PolySymbol::constant(dim, c);
  }

  Rat decimal_to_rat(const std::string& tok, size_t mant_len) {
    std::string mant = tok.substr(0, mant_len);
    long expo = 0;
    if (mant_len < tok.size()) expo = std::stol(tok.substr(mant_len + 1));
    auto dot = mant.find('.');
    std::string digits = mant;
    long frac = 0;
    if (dot != std::string::npos) {
      frac = long(mant.size() - dot - 1);
      digits = mant.substr(0, dot) + mant.substr(dot + 1);
    }
    if (digits.empty() || digits.find('.') != std::string::npos) err("bad numeric literal");
    Rat r(mpz_class(digits), 1);
    long net = expo - frac;
    mpz_class p10 = 1;
    for (long k = 0; k < std::labs(net); ++k) p10 *= 10;
    if (net >= 0)
      r *= Rat(p10);
    else
      r /= Rat(p10);
    r.canonicalize();
    return r;
  }

  PolySymbol name() {
    size_t start = pos;
    while (pos < s.size() && std::isalnum(uint8_t(s[pos]))) ++pos;
    std::string id = s.substr(start, pos - start);
    if (id == "i") return PolySymbol::constant(dim, CRat::i_unit());
    if (id == "h") return PolySymbol::variable(dim, 2 * dim);
    auto indexed = [&](const std::string& base) -> int {
      if (id.size() <= base.size() || id.compare(0, base.size(), base) != 0) return -1;
      for (size_t k = base.size(); k < id.size(); ++k)
        if (!std::isdigit(uint8_t(id[k]))) return -1;
      return std::stoi(id.substr(base.size()));
    };
    int k = indexed("xi");
    if (k >= 1) {
      if (k > dim) err("variable " + id + " exceeds dimension " + std::to_string(dim));
      return PolySymbol::variable(dim, dim + k - 1);
    }
    k = indexed("x");
    if (k >= 1) {
      if (k > dim) err("variable " + id + " exceeds dimension " + std::to_string(dim));
      return PolySymbol::variable(dim, k - 1);
    }
    if (id == "xi") {
      if (dim != 1) err("use xi1..xi" + std::to_string(dim) + " when dim > 1");
      return PolySymbol::variable(dim, 1);
    }
    if (id == "x") {
      if (dim != 1) err("use x1..x" + std::to_string(dim) + " when dim > 1");
      return PolySymbol::variable(dim, 0);
    }
    err("unknown identifier '" + id + "'");
  }
};

}  // namespace

PolySymbol parse(const std::string& expr, int dim) {
  Parser p(expr, dim);
  PolySymbol out = p.expr();
  p.skip_ws();
  if (p.pos != expr.size()) p.err("trailing input");
  return out;
}

// ---- double characteristic machinery ---------------------------------------

std::vector<std::vector<cplx>> fd_hessian_at0(const Symbol& p, double step) {
  const int d = 2 * p.dim();
  std::vector<double> X(d, 0.0);
  auto at = [&](int i, double si, int j, double sj) {
    std::fill(X.begin(), X.end(), 0.0);
    X[i] += si * step;
    X[j] += sj * step;
    return p.eval(X.data());
  };
  std::vector<std::vector<cplx>> H(d, std::vector<cplx>(d));
  std::fill(X.begin(), X.end(), 0.0);
  cplx f0 = p.eval(X.data());
  for (int i = 0; i < d; ++i) {
    H[i][i] = (at(i, 1, i, 0) - 2.0 * f0 + at(i, -1, i, 0)) / (step * step);
    for (int j = i + 1; j < d; ++j) {
      H[i][j] = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) /
                (4.0 * step * step);
      H[j][i] = H[i][j];
    }
  }
  return H;
}

PolySymbol quadratic_part(const Symbol& p) {
  const int n = p.dim();
  const int d = 2 * n;
  const double tol = 1e-8;

  if (p.is_poly()) {
    const PolySymbol& pp = *p.poly;
    if (pp.has_formal_h())
      fail(SC_ERR_PRECONDITION, "quadratic_part: symbol carries formal h");
    if (std::abs(pp.value_at0().to_cplx()) > tol)
      fail(SC_ERR_PRECONDITION, "not doubly characteristic at 0: p(0) != 0");
    for (const CRat& g : pp.gradient_at0())
      if (std::abs(g.to_cplx()) > tol)
        fail(SC_ERR_PRECONDITION, "not doubly characteristic at 0: grad p(0) != 0");
    auto H = pp.hessian_at0();
    PolySymbol q(n);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (H[i][j].is_zero()) continue;
        Expo e(2 * n + 1, 0);
        e[i] += 1;
        e[j] += 1;
        q.add_term(e, H[i][j] * CRat(Rat(1, 2)));
      }
    return q;
  }

  std::vector<double> X(d, 0.0);
  if (std::abs(p.eval(X.data())) > tol)
    fail(SC_ERR_PRECONDITION, "not doubly characteristic at 0: p(0) != 0");
  const double step = 1e-4;
  for (int i = 0; i < d; ++i) {
    // fourth-order stencil so cubic terms do not alias into the gradient
    auto at = [&](double s) {
      std::fill(X.begin(), X.end(), 0.0);
      X[i] = s;
      return p.eval(X.data());
    };
    cplx g = (-at(2 * step) + 8.0 * at(step) - 8.0 * at(-step) + at(-2 * step)) /
             (12.0 * step);
    if (std::abs(g) > tol)
      fail(SC_ERR_PRECONDITION, "not doubly characteristic at 0: grad p(0) != 0");
  }
  auto H = fd_hessian_at0(p, step);  // truncation error O(step^2)
  PolySymbol q(n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      cplx hij = 0.5 * (H[i][j] + H[j][i]);  // symmetrize rounding noise
      if (hij == cplx(0.0)) continue;
      Expo e(2 * n + 1, 0);
      e[i] += 1;
      e[j] += 1;
      q.add_term(e, CRat::from_cplx(hij) * CRat(Rat(1, 2)));
    }
  return q;
}

Symbol remainder_part(const Symbol& p, const PolySymbol& q) {
  if (p.dim() != q.dim()) fail(SC_ERR_ARGUMENT, "remainder_part: dimension mismatch");
  Symbol r;
  if (p.is_poly()) {
    r = Symbol::of(*p.poly - q);
  } else {
    CallableSymbol cs;
    cs.dim = p.dim();
    cs.desc = p.desc() + " - quadratic part";
    CallableSymbol pc = *p.call;
    PolySymbol qq = q;
    cs.f = [pc, qq](const double* X) { return pc.f(X) - qq.eval(X); };
    r = Symbol::of(std::move(cs));
  }
  // r must vanish to third order; probe a few fixed directions
  const int d = 2 * p.dim();
  Rng rng(0x9e3779b9u);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<double> dir(d);
    double nrm = 0;
    for (auto& v : dir) {
      v = rng.sym();
      nrm += v * v;
    }
    nrm = std::sqrt(nrm);
    double prev = 0;
    for (double t : {1e-2, 1e-3}) {
      std::vector<double> X(d);
      for (int i = 0; i < d; ++i) X[i] = t * dir[i] / nrm;
      double ratio = std::abs(r.eval(X.data())) / (t * t * t);
      if (t == 1e-3 && ratio > 10.0 * std::max(1.0, prev) + 1e-6)
        fail(SC_ERR_PRECONDITION,
             "remainder_part: r(X)/|X|^3 grows near 0; q is not the Hessian model");
      prev = ratio;
    }
  }
  return r;
}

AssumptionReport check_assumptions(const Symbol& p, double radius, int n_samples) {
  if (radius <= 0 || n_samples < 1) fail(SC_ERR_ARGUMENT, "check_assumptions: bad sampling");
  const int n = p.dim();
  const int d = 2 * n;
  AssumptionReport rep;
  rep.radius = radius;
  rep.n_samples = n_samples;

  auto pts = halton_box(d, n_samples, radius);
  double min_re = std::numeric_limits<double>::infinity();
  std::vector<double> min_pt(d, 0.0);
  double min_ratio_ell = std::numeric_limits<double>::infinity();
  double max_C = 0.0;
  bool zero_ok = true;
  const double ball = 1e-6;
  const double onset = radius / 2.0;  // expects radius >= 2C

  for (const auto& X : pts) {
    double r2 = 0;
    for (double v : X) r2 += v * v;
    const double ax = std::sqrt(r2);
    const double re = p.eval(X.data()).real();
    if (re < min_re) {
      min_re = re;
      min_pt = X;
    }
    if (ax >= onset) min_ratio_ell = std::min(min_ratio_ell, re / (1.0 + r2));
    if (ax > ball) {
      if (re <= 0.0) zero_ok = false;
      if (re > 0.0) max_C = std::max(max_C, r2 / re);
    }
  }

  rep.nonneg_real_part = min_re >= -1e-12;
  rep.worst_re_violation = min_re;
  rep.worst_re_point = min_pt;
  rep.ellipticity_constant = min_ratio_ell;
  rep.zero_set_ok = zero_ok;
  rep.lower_bound_C = max_C;

  if (p.is_poly()) {
    auto H = p.poly->hessian_at0();
    rep.hessian.assign(d, std::vector<cplx>(d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) rep.hessian[i][j] = H[i][j].to_cplx();
  } else {
    rep.hessian = fd_hessian_at0(p);
  }
  Eigen::MatrixXd ReQ(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      ReQ(i, j) = 0.25 * (rep.hessian[i][j].real() + rep.hessian[j][i].real());
  // Re q(X) = X . ReQ X with ReQ = Re p''(0)/2
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ReQ, Eigen::EigenvaluesOnly);
  rep.re_q_min_eig = es.eigenvalues().minCoeff();
  return rep;
}

std::string AssumptionReport::json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["nonneg_real_part"] = nonneg_real_part;
  j["worst_re_violation"] = worst_re_violation;
  j["worst_re_point"] = worst_re_point;
  j["ellipticity_constant"] = ellipticity_constant;
  j["zero_set_ok"] = zero_set_ok;
  j["re_q_min_eig"] = re_q_min_eig;
  j["lower_bound_C"] = lower_bound_C;
  j["radius"] = radius;
  j["n_samples"] = n_samples;
  j["all_passed"] = all_passed();
  nlohmann::json H = nlohmann::json::array();
  for (const auto& row : hessian) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& z : row) r.push_back({z.real(), z.imag()});
    H.push_back(r);
  }
  j["hessian"] = H;
  return j.dump(2);
}

}  // namespace semiclass::symbols

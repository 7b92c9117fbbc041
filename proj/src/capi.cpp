// extern-C surface over the C++ core: opaque handles, status codes, and a
// thread-local error message.  Every entry point traps exceptions and maps
// them to sc_status values.

#include "semiclass/semiclass.h"

#include <cmath>
#include <cstring>
#include <string>

#include "analysis.hpp"
#include "eigensolve.hpp"
#include "experiment.hpp"
#include "families.hpp"
#include "hermite.hpp"
#include "json.hpp"
#include "moyal.hpp"
#include "polysymbol.hpp"
#include "quantize.hpp"
#include "util.hpp"

using namespace semiclass;

struct sc_symbol {
  symbols::Symbol sym;
};
struct sc_grid {
  quantize::PhaseSpaceGrid g;
};
struct sc_operator {
  quantize::OperatorMatrix op;
};
struct sc_eigs {
  std::vector<eig::EigenPair> pairs;
  quantize::PhaseSpaceGrid grid;
};

namespace {

thread_local std::string t_last_error;

sc_status set_error(sc_status code, const std::string& msg) {
  t_last_error = msg;
  return code;
}

template <typename F>
sc_status guarded(F&& f) {
  try {
    f();
    return SC_OK;
  } catch (const Error& e) {
    return set_error(e.code, e.what());
  } catch (const std::exception& e) {
    return set_error(SC_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

sc_status need(bool ok, const char* what) {
  if (!ok) throw Error(SC_ERR_ARGUMENT, std::string("null or invalid argument: ") + what);
  return SC_OK;
}

Eigen::VectorXcd from_ri(const double* in, size_t points) {
  Eigen::VectorXcd v(static_cast<long>(points));
  for (size_t i = 0; i < points; ++i) v(long(i)) = cplx(in[2 * i], in[2 * i + 1]);
  return v;
}

void to_ri(const Eigen::VectorXcd& v, double* out) {
  for (long i = 0; i < v.size(); ++i) {
    out[2 * i] = v(i).real();
    out[2 * i + 1] = v(i).imag();
  }
}

const symbols::PolySymbol& require_poly(const sc_symbol* s, const char* what) {
  if (!s->sym.is_poly())
    throw Error(SC_ERR_PRECONDITION,
                std::string(what) + " requires a polynomial symbol");
  return *s->sym.poly;
}

}  // namespace

extern "C" {

const char* sc_version(void) { return "semiclass 1.0.0"; }

const char* sc_last_error(void) { return t_last_error.c_str(); }

void sc_string_free(char* s) { std::free(s); }

/* ---- symbols ---- */

sc_status sc_symbol_parse(const char* expr, int dim, sc_symbol** out) {
  return guarded([&] {
    need(expr && out, "sc_symbol_parse");
    *out = new sc_symbol{symbols::Symbol::of(symbols::parse(expr, dim))};
  });
}

sc_status sc_symbol_family(const char* name, int dim, sc_symbol** out) {
  return guarded([&] {
    need(name && out, "sc_symbol_family");
    *out = new sc_symbol{families::full_symbol(name, dim)};
  });
}

sc_status sc_symbol_family_potential(const char* name, int dim, sc_symbol** out) {
  return guarded([&] {
    need(name && out, "sc_symbol_family_potential");
    *out = new sc_symbol{families::potential_symbol(name, dim)};
  });
}

void sc_symbol_free(sc_symbol* s) { delete s; }

sc_status sc_symbol_print(const sc_symbol* s, char** out) {
  return guarded([&] {
    need(s && out, "sc_symbol_print");
    *out = dup_string(s->sym.desc());
  });
}

sc_status sc_symbol_to_json(const sc_symbol* s, char** out) {
  return guarded([&] {
    need(s && out, "sc_symbol_to_json");
    if (s->sym.is_poly()) {
      *out = dup_string(s->sym.poly->json());
    } else {
      nlohmann::json j;
      j["dim"] = s->sym.dim();
      j["callable"] = s->sym.desc();
      *out = dup_string(j.dump());
    }
  });
}

sc_status sc_symbol_quadratic_part(const sc_symbol* p, sc_symbol** out) {
  return guarded([&] {
    need(p && out, "sc_symbol_quadratic_part");
    *out = new sc_symbol{symbols::Symbol::of(symbols::quadratic_part(p->sym))};
  });
}

sc_status sc_symbol_remainder_part(const sc_symbol* p, sc_symbol** out) {
  return guarded([&] {
    need(p && out, "sc_symbol_remainder_part");
    auto q = symbols::quadratic_part(p->sym);
    *out = new sc_symbol{symbols::remainder_part(p->sym, q)};
  });
}

sc_status sc_symbol_check_assumptions(const sc_symbol* p, double radius, int n_samples,
                                      char** json_out) {
  return guarded([&] {
    need(p && json_out, "sc_symbol_check_assumptions");
    auto rep = symbols::check_assumptions(p->sym, radius, n_samples);
    *json_out = dup_string(rep.json());
  });
}

/* ---- moyal ---- */

sc_status sc_moyal_star(const sc_symbol* a, const sc_symbol* b, int substitute_h,
                        double h_value, sc_symbol** out) {
  return guarded([&] {
    need(a && b && out, "sc_moyal_star");
    auto r = moyal::star_product(require_poly(a, "star product"),
                                 require_poly(b, "star product"));
    if (substitute_h) r = r.substitute_h(CRat(rat_of_double(h_value)));
    *out = new sc_symbol{symbols::Symbol::of(std::move(r))};
  });
}

sc_status sc_moyal_commutator(const sc_symbol* a, const sc_symbol* b, int substitute_h,
                              double h_value, sc_symbol** out) {
  return guarded([&] {
    need(a && b && out, "sc_moyal_commutator");
    auto r = moyal::star_commutator(require_poly(a, "star commutator"),
                                    require_poly(b, "star commutator"));
    if (substitute_h) r = r.substitute_h(CRat(rat_of_double(h_value)));
    *out = new sc_symbol{symbols::Symbol::of(std::move(r))};
  });
}

sc_status sc_moyal_poisson(const sc_symbol* a, const sc_symbol* b, sc_symbol** out) {
  return guarded([&] {
    need(a && b && out, "sc_moyal_poisson");
    auto r = moyal::poisson_bracket(require_poly(a, "poisson bracket"),
                                    require_poly(b, "poisson bracket"));
    *out = new sc_symbol{symbols::Symbol::of(std::move(r))};
  });
}

/* ---- grids and quantization ---- */

sc_status sc_grid_create(int n, double half_width, int points_per_axis, double h,
                         sc_grid** out) {
  return guarded([&] {
    need(out != nullptr, "sc_grid_create");
    *out = new sc_grid{quantize::PhaseSpaceGrid(n, half_width, points_per_axis, h)};
  });
}

void sc_grid_free(sc_grid* g) { delete g; }

size_t sc_grid_points(const sc_grid* g) { return g ? g->g.points() : 0; }

double sc_grid_h_floor(const sc_grid* g) { return g ? g->g.h_floor() : 0.0; }

sc_status sc_quantize_weyl(const sc_symbol* a, const sc_grid* g, sc_operator** out) {
  return guarded([&] {
    need(a && g && out, "sc_quantize_weyl");
    *out = new sc_operator{quantize::weyl_quantize(a->sym, g->g)};
  });
}

sc_status sc_quantize_schrodinger(const sc_symbol* vw, const sc_grid* g,
                                  const char* variant, sc_operator** out) {
  return guarded([&] {
    need(vw && g && variant && out, "sc_quantize_schrodinger");
    *out = new sc_operator{quantize::quantize_schrodinger(vw->sym, g->g, variant)};
  });
}

sc_status sc_quantize_cutoff(const sc_symbol* chi, double scale, const sc_grid* g,
                             sc_operator** out) {
  return guarded([&] {
    need(chi && g && out, "sc_quantize_cutoff");
    *out = new sc_operator{quantize::cutoff_quantize(chi->sym, scale, g->g)};
  });
}

void sc_operator_free(sc_operator* a) { delete a; }

sc_status sc_operator_apply(const sc_operator* a, const double* in_ri, double* out_ri) {
  return guarded([&] {
    need(a && in_ri && out_ri, "sc_operator_apply");
    to_ri(a->op.apply(from_ri(in_ri, a->op.rows())), out_ri);
  });
}

sc_status sc_operator_stats(const sc_operator* a, char** json_out) {
  return guarded([&] {
    need(a && json_out, "sc_operator_stats");
    nlohmann::json j;
    j["method"] = a->op.method;
    j["symbol_desc"] = a->op.symbol_desc;
    j["rows"] = a->op.rows();
    j["grid"] = {{"n", a->op.grid.n}, {"L", a->op.grid.L}, {"N", a->op.grid.N},
                 {"h", a->op.grid.h}};
    j["storage"] = a->op.is_dense() ? "dense" : (a->op.is_sparse() ? "sparse" : "matrix-free");
    if (a->op.norm_estimate >= 0) j["norm_estimate"] = a->op.norm_estimate;
    if (a->op.is_dense()) {
      double scale = a->op.dense->cwiseAbs().maxCoeff();
      double defect = (*a->op.dense - a->op.dense->adjoint()).cwiseAbs().maxCoeff();
      j["hermiticity_defect"] = scale > 0 ? defect / scale : 0.0;
    }
    if (a->op.is_sparse()) j["nnz"] = a->op.sparse->nonZeros();
    *json_out = dup_string(j.dump());
  });
}

sc_status sc_operator_save(const sc_operator* a, const char* path) {
  return guarded([&] {
    need(a && path, "sc_operator_save");
    quantize::save_operator(a->op, path);
  });
}

sc_status sc_operator_load(const char* path, sc_operator** out) {
  return guarded([&] {
    need(path && out, "sc_operator_load");
    *out = new sc_operator{quantize::load_operator(path)};
  });
}

/* ---- eigensolve ---- */

sc_status sc_eigs_near(const sc_operator* a, double target_re, double target_im, int k,
                       sc_eigs** out) {
  return guarded([&] {
    need(a && out, "sc_eigs_near");
    auto pairs = eig::eigs_near(a->op, cplx(target_re, target_im), k);
    *out = new sc_eigs{std::move(pairs), a->op.grid};
  });
}

sc_status sc_ground_cluster(const sc_operator* a, double C, double h, sc_eigs** out) {
  return guarded([&] {
    need(a && out, "sc_ground_cluster");
    auto pairs = eig::ground_cluster(a->op, C, h);
    *out = new sc_eigs{std::move(pairs), a->op.grid};
  });
}

void sc_eigs_free(sc_eigs* e) { delete e; }

int sc_eigs_count(const sc_eigs* e) { return e ? int(e->pairs.size()) : 0; }

sc_status sc_eigs_get(const sc_eigs* e, int i, double* lam_re, double* lam_im,
                      double* residual, int* multiplicity_hint) {
  return guarded([&] {
    need(e && i >= 0 && i < int(e->pairs.size()), "sc_eigs_get");
    const auto& p = e->pairs[size_t(i)];
    if (lam_re) *lam_re = p.lam.real();
    if (lam_im) *lam_im = p.lam.imag();
    if (residual) *residual = p.residual;
    if (multiplicity_hint) *multiplicity_hint = p.multiplicity_hint;
  });
}

sc_status sc_eigs_vector(const sc_eigs* e, int i, size_t points, double* out_ri) {
  return guarded([&] {
    need(e && out_ri && i >= 0 && i < int(e->pairs.size()), "sc_eigs_vector");
    need(points == size_t(e->pairs[size_t(i)].vec.size()), "sc_eigs_vector: length");
    to_ri(e->pairs[size_t(i)].vec, out_ri);
  });
}

sc_status sc_eigs_save(const sc_eigs* e, const char* path) {
  return guarded([&] {
    need(e && path, "sc_eigs_save");
    eig::save_pairs(e->pairs, e->grid, path);
  });
}

sc_status sc_eigs_load(const char* path, sc_eigs** out) {
  return guarded([&] {
    need(path && out, "sc_eigs_load");
    auto [pairs, grid] = eig::load_pairs(path);
    *out = new sc_eigs{std::move(pairs), grid};
  });
}

sc_status sc_quadratic_model_spectrum(const sc_symbol* q, double C, char** json_out) {
  return guarded([&] {
    need(q && json_out, "sc_quadratic_model_spectrum");
    auto model = eig::quadratic_model_spectrum(require_poly(q, "quadratic model"), C);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& m : model)
      rows.push_back({{"mu_re", m.mu.real()}, {"mu_im", m.mu.imag()},
                      {"multiplicity", m.multiplicity}});
    nlohmann::json j;
    j["C"] = C;
    j["eigenvalues"] = rows;
    *json_out = dup_string(j.dump());
  });
}

/* ---- oscillator oracle ---- */

double sc_oscillator_eigenvalue(const int* alpha, int n, double h) {
  if (!alpha || n < 1) return std::nan("");
  std::vector<int> a(alpha, alpha + n);
  try {
    return hermite::oscillator_eigenvalue(a, h);
  } catch (...) {
    return std::nan("");
  }
}

sc_status sc_oscillator_lp_norm(const int* alpha, int n, double h, double p, double* out) {
  return guarded([&] {
    need(alpha && out && n >= 1, "sc_oscillator_lp_norm");
    *out = hermite::lp_norm_exact(std::vector<int>(alpha, alpha + n), h, p);
  });
}

sc_status sc_oscillator_sample(const int* alpha, int n, double h, const sc_grid* g,
                               double* out_ri) {
  return guarded([&] {
    need(alpha && g && out_ri && n == g->g.n, "sc_oscillator_sample");
    to_ri(hermite::sample_state(std::vector<int>(alpha, alpha + n), h, g->g), out_ri);
  });
}

/* ---- runner ---- */

sc_status sc_run_config_file(const char* path, const char* output_override,
                             char** summary_json, int* all_passed) {
  return guarded([&] {
    need(path != nullptr, "sc_run_config_file");
    auto cfg = runner::ExperimentConfig::from_file(path);
    auto res = runner::run_experiment(cfg, output_override ? output_override : "");
    if (summary_json) *summary_json = dup_string(res.summary_json);
    if (all_passed) *all_passed = res.all_passed ? 1 : 0;
  });
}

sc_status sc_run_config_json(const char* config_json, const char* output_override,
                             char** summary_json, int* all_passed) {
  return guarded([&] {
    need(config_json != nullptr, "sc_run_config_json");
    auto cfg = runner::ExperimentConfig::from_json_text(config_json);
    auto res = runner::run_experiment(cfg, output_override ? output_override : "");
    if (summary_json) *summary_json = dup_string(res.summary_json);
    if (all_passed) *all_passed = res.all_passed ? 1 : 0;
  });
}

}  // extern "C"

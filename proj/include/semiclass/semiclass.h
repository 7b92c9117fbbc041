#ifndef SEMICLASS_H
#define SEMICLASS_H

/*
 * C interface to the semiclass library: a numerical laboratory for
 * semiclassical Weyl quantization of complex-valued phase-space symbols with
 * double characteristics, spectra of the resulting non-self-adjoint
 * operators, and L^p scaling checks on their ground states.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return SC_OK on success; on failure they return an error code and
 * sc_last_error() gives a message for the calling thread.  Strings returned
 * through char** are heap-allocated and must be released with
 * sc_string_free().  Complex vectors cross the boundary as interleaved
 * (re,im) double arrays of length 2*points.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sc_status {
  SC_OK = 0,
  SC_ERR_ARGUMENT = 1,     /* bad flag/parameter/handle */
  SC_ERR_PARSE = 2,        /* expression or config did not parse/validate */
  SC_ERR_PRECONDITION = 3, /* operation precondition violated */
  SC_ERR_NYQUIST = 4,      /* grid cannot represent the requested momenta */
  SC_ERR_SCALE = 5,        /* unresolvable microlocal scale / out of range */
  SC_ERR_CONVERGENCE = 6,  /* iterative solver did not reach tolerance */
  SC_ERR_RESOURCE = 7,     /* request exceeds the desk-scale ceilings */
  SC_ERR_IO = 8,           /* file read/write failure */
  SC_ERR_INTERNAL = 9
} sc_status;

typedef struct sc_symbol sc_symbol;     /* polynomial or callable phase-space symbol */
typedef struct sc_grid sc_grid;         /* uniform position grid with FFT-dual momenta */
typedef struct sc_operator sc_operator; /* discretized Weyl operator */
typedef struct sc_eigs sc_eigs;         /* eigenvalue cluster with vectors */

const char* sc_version(void);
const char* sc_last_error(void);
void sc_string_free(char* s);

/* ---- symbols ---------------------------------------------------------- */

/* Grammar: variables x1..xn, xi1..xin (x, xi accepted when n = 1), formal h;
 * operators + - * ^; decimal literals, imaginary literals like 0.5i or i.
 * Coefficients are kept as exact rationals. */
sc_status sc_symbol_parse(const char* expr, int dim, sc_symbol** out);

/* Built-in families: "oscillator", "complex_perturbed", "complex_perturbed_1d",
 * "sin_perturbed", "oscillator_complex". */
sc_status sc_symbol_family(const char* name, int dim, sc_symbol** out);

/* The x-only potential V + iW of a Schrodinger-form family (for the
 * sc_quantize_schrodinger fast paths). */
sc_status sc_symbol_family_potential(const char* name, int dim, sc_symbol** out);

void sc_symbol_free(sc_symbol* s);
sc_status sc_symbol_print(const sc_symbol* s, char** out);
sc_status sc_symbol_to_json(const sc_symbol* s, char** out);

/* Quadratic Hessian model at the double characteristic and the cubic
 * remainder; both require value and gradient at 0 to vanish (tol 1e-8). */
sc_status sc_symbol_quadratic_part(const sc_symbol* p, sc_symbol** out);
sc_status sc_symbol_remainder_part(const sc_symbol* p, sc_symbol** out);

/* Deterministic low-discrepancy sampling of the standing assumptions
 * (nonnegative real part, ellipticity at infinity, isolated zero, positive
 * definite Re q).  Returns a JSON report; never fails on a bad symbol, the
 * report carries the failed flags. */
sc_status sc_symbol_check_assumptions(const sc_symbol* p, double radius,
                                      int n_samples, char** json_out);

/* ---- Moyal star product (polynomial symbols) -------------------------- */

/* substitute_h = 0 keeps h as a formal variable of the result. */
sc_status sc_moyal_star(const sc_symbol* a, const sc_symbol* b,
                        int substitute_h, double h_value, sc_symbol** out);
sc_status sc_moyal_commutator(const sc_symbol* a, const sc_symbol* b,
                              int substitute_h, double h_value, sc_symbol** out);
sc_status sc_moyal_poisson(const sc_symbol* a, const sc_symbol* b, sc_symbol** out);

/* ---- grids and quantization ------------------------------------------- */

sc_status sc_grid_create(int n, double half_width, int points_per_axis,
                         double h, sc_grid** out);
void sc_grid_free(sc_grid* g);
size_t sc_grid_points(const sc_grid* g);
double sc_grid_h_floor(const sc_grid* g);

/* Midpoint-FFT discretization of the semiclassical Weyl quantization. */
sc_status sc_quantize_weyl(const sc_symbol* a, const sc_grid* g, sc_operator** out);

/* Fast path for -h^2 Laplacian + V + iW; vw must depend on x only.
 * variant: "spectral", "fd2", "fd4", "fd6", "fd8". */
sc_status sc_quantize_schrodinger(const sc_symbol* vw, const sc_grid* g,
                                  const char* variant, sc_operator** out);

/* Weyl quantization of chi(X/scale) for a compactly supported cutoff. */
sc_status sc_quantize_cutoff(const sc_symbol* chi, double scale,
                             const sc_grid* g, sc_operator** out);

void sc_operator_free(sc_operator* a);
sc_status sc_operator_apply(const sc_operator* a, const double* in_ri, double* out_ri);
sc_status sc_operator_stats(const sc_operator* a, char** json_out);
sc_status sc_operator_save(const sc_operator* a, const char* path);
sc_status sc_operator_load(const char* path, sc_operator** out);

/* ---- eigenvalue clusters ---------------------------------------------- */

/* k eigenpairs nearest the target, each with a verified residual;
 * deterministic ordering (|lam-target|, then Im, then Re ascending). */
sc_status sc_eigs_near(const sc_operator* a, double target_re, double target_im,
                       int k, sc_eigs** out);

/* Every eigenvalue with |lam| < C*h (k grown until exhausted). */
sc_status sc_ground_cluster(const sc_operator* a, double C, double h, sc_eigs** out);

void sc_eigs_free(sc_eigs* e);
int sc_eigs_count(const sc_eigs* e);
sc_status sc_eigs_get(const sc_eigs* e, int i, double* lam_re, double* lam_im,
                      double* residual, int* multiplicity_hint);
/* out_ri must hold 2*points doubles. */
sc_status sc_eigs_vector(const sc_eigs* e, int i, size_t points, double* out_ri);
sc_status sc_eigs_save(const sc_eigs* e, const char* path);
sc_status sc_eigs_load(const char* path, sc_eigs** out);

/* Eigenvalues of Op_1^w(q) in D(0,C) for a quadratic symbol q with positive
 * definite real part, clustered with multiplicities.  JSON table. */
sc_status sc_quadratic_model_spectrum(const sc_symbol* q, double C, char** json_out);

/* ---- harmonic-oscillator oracle --------------------------------------- */

double sc_oscillator_eigenvalue(const int* alpha, int n, double h);
/* p >= 2; pass INFINITY for the sup norm. */
sc_status sc_oscillator_lp_norm(const int* alpha, int n, double h, double p,
                                double* out);
sc_status sc_oscillator_sample(const int* alpha, int n, double h,
                               const sc_grid* g, double* out_ri);

/* ---- experiment runner ------------------------------------------------ */

/* Executes the checks requested by a JSON experiment config, writing
 * CSV/JSON/SVG artifacts into the config's output directory.  all_passed is
 * set to 1 iff every requested verdict passed. */
sc_status sc_run_config_file(const char* path, const char* output_override,
                             char** summary_json, int* all_passed);
sc_status sc_run_config_json(const char* config_json, const char* output_override,
                             char** summary_json, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* SEMICLASS_H */

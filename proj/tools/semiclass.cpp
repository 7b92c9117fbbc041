// Command-line front end.  Everything goes through the C API in
// semiclass/semiclass.h; this translation unit never touches the C++ core
// directly.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "semiclass/semiclass.h"

namespace {

using nlohmann::json;

[[noreturn]] void die(sc_status st, const std::string& context) {
  std::fprintf(stderr, "error (%s, status %d): %s\n", context.c_str(), int(st),
               sc_last_error());
  std::exit(2);
}

void check(sc_status st, const std::string& context) {
  if (st != SC_OK) die(st, context);
}

std::vector<int> parse_alpha(const std::string& s) {
  std::vector<int> a;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    a.push_back(std::stoi(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return a;
}

double parse_pvalue(const std::string& s) {
  if (s == "inf" || s == "infinity") return INFINITY;
  return std::stod(s);
}

struct SymbolArgs {
  std::string family;
  std::string expr;
  int n = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--family", family, "built-in symbol family");
    cmd->add_option("--expr", expr, "symbol expression (x1.., xi1.., h)");
    cmd->add_option("--n", n, "spatial dimension (1 or 2)")->check(CLI::Range(1, 2));
  }
  // schrodinger_form: fetch the family's x-only potential instead of the
  // full phase-space symbol (the fast paths add the |xi|^2 part themselves)
  sc_symbol* make(bool schrodinger_form = false) const {
    sc_symbol* s = nullptr;
    if (!family.empty()) {
      check(schrodinger_form ? sc_symbol_family_potential(family.c_str(), n, &s)
                             : sc_symbol_family(family.c_str(), n, &s),
            "symbol family");
    } else if (!expr.empty()) {
      check(sc_symbol_parse(expr.c_str(), n, &s), "symbol parse");
    } else {
      std::fprintf(stderr, "error: provide --family or --expr\n");
      std::exit(2);
    }
    return s;
  }
};

int run_config(const std::string& path, const std::string& out) {
  char* summary = nullptr;
  int ok = 0;
  sc_status st = sc_run_config_file(path.c_str(), out.empty() ? nullptr : out.c_str(),
                                    &summary, &ok);
  if (st != SC_OK) die(st, "run");
  std::printf("%s\n", summary);
  sc_string_free(summary);
  return ok ? 0 : 1;
}

int run_inline_config(const json& cfg) {
  char* summary = nullptr;
  int ok = 0;
  std::string text = cfg.dump();
  sc_status st = sc_run_config_json(text.c_str(), nullptr, &summary, &ok);
  if (st != SC_OK) die(st, "run");
  std::printf("%s\n", summary);
  sc_string_free(summary);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiclass: semiclassical Weyl quantization laboratory"};
  app.require_subcommand(1);
  // --h is the semiclassical parameter throughout; keep help on --help only
  app.set_help_flag("--help", "print help");

  // ---- run ----
  auto* run = app.add_subcommand("run", "execute an experiment config (JSON)");
  run->set_help_flag("--help", "print help");
  std::string cfg_path, out_dir;
  int run_jobs = 0;
  run->add_option("--config", cfg_path, "path to the experiment config")->required();
  run->add_option("--out", out_dir, "override the output directory");
  run->add_option("--jobs", run_jobs, "parallel sweep cells (overrides the config)");

  // ---- moyal ----
  auto* my = app.add_subcommand("moyal", "star products / commutators of symbols");
  my->set_help_flag("--help", "print help");
  std::string a_expr, b_expr;
  int my_n = 1;
  bool my_comm = false, my_poisson = false, my_json = false;
  double my_h = 0.0;
  bool my_subst = false;
  my->add_option("--a", a_expr, "left symbol expression")->required();
  my->add_option("--b", b_expr, "right symbol expression")->required();
  my->add_option("--n", my_n, "spatial dimension")->check(CLI::Range(1, 2));
  my->add_flag("--commutator", my_comm, "star commutator a#b - b#a");
  my->add_flag("--poisson", my_poisson, "Poisson bracket {a,b}");
  my->add_option("--h", my_h, "substitute a numeric h")->each([&](const std::string&) {
    my_subst = true;
  });
  my->add_flag("--json", my_json, "emit the exact coefficient JSON");

  // ---- oracle ----
  auto* orc = app.add_subcommand("oracle", "harmonic-oscillator closed forms");
  orc->set_help_flag("--help", "print help");
  std::string orc_alpha = "0", orc_p = "inf";
  double orc_h = 0.1;
  bool orc_csv = false;
  int orc_digits = 5;
  orc->add_option("--alpha", orc_alpha, "multi-index, e.g. 0,0")->required();
  orc->add_option("--h", orc_h, "semiclassical parameter");
  orc->add_option("--p", orc_p, "Lebesgue exponent (or 'inf')");
  orc->add_option("--digits", orc_digits, "significant digits to print");
  orc->add_flag("--csv", orc_csv, "print eigenvalue, C_alpha and L^p table as CSV");

  // ---- quantize ----
  auto* qz = app.add_subcommand("quantize", "discretize Op_h^w(a) and print stats");
  qz->set_help_flag("--help", "print help");
  SymbolArgs qz_sym;
  qz_sym.attach(qz);
  double qz_L = 10.0, qz_h = 0.1;
  int qz_N = 256;
  std::string qz_method = "midpoint-fft", qz_save;
  qz->add_option("--L", qz_L, "box half-width");
  qz->add_option("--N", qz_N, "grid points per axis");
  qz->add_option("--h", qz_h, "semiclassical parameter");
  qz->add_option("--method", qz_method,
                 "midpoint-fft | spectral | spectral-mf | fd2|fd4|fd6|fd8 "
                 "(non-midpoint methods treat the symbol as V+iW)");
  qz->add_option("--save", qz_save, "cache the operator to a file");

  // ---- spectrum ----
  auto* sp = app.add_subcommand("spectrum", "eigenvalue cluster near 0");
  sp->set_help_flag("--help", "print help");
  SymbolArgs sp_sym;
  sp_sym.attach(sp);
  double sp_L = 10.0, sp_h = 0.05, sp_C = 5.0;
  int sp_N = 256;
  std::string sp_method = "midpoint-fft";
  sp->add_option("--L", sp_L, "box half-width");
  sp->add_option("--N", sp_N, "grid points per axis");
  sp->add_option("--h", sp_h, "semiclassical parameter");
  sp->add_option("--C", sp_C, "cluster disc |lambda| < C h");
  sp->add_option("--method", sp_method, "operator discretization (as in quantize)");

  // ---- scaling ----
  auto* sc = app.add_subcommand("scaling", "L^p scaling sweep with exponent fits");
  sc->set_help_flag("--help", "print help");
  SymbolArgs sc_sym;
  sc_sym.attach(sc);
  double sc_L = 4.0, sc_ht = 0.5, sc_fit = 0.05, sc_C = 3.0;
  int sc_N = 128, sc_kmin = 1, sc_kmax = 6;
  std::vector<std::string> sc_p = {"2", "4", "inf"};
  std::string sc_out = "out", sc_variant = "auto";
  sc->add_option("--L", sc_L, "box half-width");
  sc->add_option("--N", sc_N, "grid points per axis");
  sc->add_option("--htilde", sc_ht, "largest h of the sweep");
  sc->add_option("--kmin", sc_kmin, "first dyadic step");
  sc->add_option("--kmax", sc_kmax, "last dyadic step");
  sc->add_option("--p-list", sc_p, "Lebesgue exponents");
  sc->add_option("--fit-tol", sc_fit, "exponent verdict tolerance");
  sc->add_option("--C", sc_C, "ground-cluster constant");
  sc->add_option("--variant", sc_variant, "operator discretization");
  sc->add_option("--out", sc_out, "output directory");

  // ---- garding ----
  auto* gd = app.add_subcommand("garding", "sharp Garding minimum-eigenvalue sweep");
  gd->set_help_flag("--help", "print help");
  SymbolArgs gd_sym;
  gd_sym.attach(gd);
  double gd_L = 10.0, gd_stab = 0.2;
  int gd_N = 256;
  std::vector<double> gd_h = {0.2, 0.1, 0.05, 0.025};
  std::string gd_out = "out";
  gd->add_option("--L", gd_L, "box half-width");
  gd->add_option("--N", gd_N, "grid points per axis");
  gd->add_option("--h-list", gd_h, "h values");
  gd->add_option("--stability", gd_stab, "allowed relative spread of the fitted constant");
  gd->add_option("--out", gd_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    if (run_jobs > 0) {
      // patch the config in memory and run it inline
      std::ifstream f(cfg_path);
      if (!f) {
        std::fprintf(stderr, "error: cannot open config %s\n", cfg_path.c_str());
        return 2;
      }
      json cfg = json::parse(f, nullptr, false);
      if (cfg.is_discarded()) {
        std::fprintf(stderr, "error: config %s is not valid JSON\n", cfg_path.c_str());
        return 2;
      }
      cfg["jobs"] = run_jobs;
      char* summary = nullptr;
      int ok = 0;
      sc_status st = sc_run_config_json(cfg.dump().c_str(),
                                        out_dir.empty() ? nullptr : out_dir.c_str(),
                                        &summary, &ok);
      if (st != SC_OK) die(st, "run");
      std::printf("%s\n", summary);
      sc_string_free(summary);
      return ok ? 0 : 1;
    }
    return run_config(cfg_path, out_dir);
  }

  if (*my) {
    sc_symbol *a = nullptr, *b = nullptr, *r = nullptr;
    check(sc_symbol_parse(a_expr.c_str(), my_n, &a), "parse --a");
    check(sc_symbol_parse(b_expr.c_str(), my_n, &b), "parse --b");
    if (my_poisson) {
      check(sc_moyal_poisson(a, b, &r), "poisson");
    } else if (my_comm) {
      check(sc_moyal_commutator(a, b, my_subst ? 1 : 0, my_h, &r), "commutator");
    } else {
      check(sc_moyal_star(a, b, my_subst ? 1 : 0, my_h, &r), "star");
    }
    char* text = nullptr;
    check(my_json ? sc_symbol_to_json(r, &text) : sc_symbol_print(r, &text), "print");
    std::printf("%s\n", text);
    sc_string_free(text);
    sc_symbol_free(a);
    sc_symbol_free(b);
    sc_symbol_free(r);
    return 0;
  }

  if (*orc) {
    auto alpha = parse_alpha(orc_alpha);
    const int n = int(alpha.size());
    if (orc_csv) {
      std::printf("alpha,h,lambda,p,C_alpha,lp_norm\n");
      for (double p : {2.0, 4.0, 6.0, double(INFINITY)}) {
        double norm = 0, c = 0;
        check(sc_oscillator_lp_norm(alpha.data(), n, orc_h, p, &norm), "oracle");
        check(sc_oscillator_lp_norm(alpha.data(), n, 1.0, p, &c), "oracle");
        std::printf("\"%s\",%.10g,%.10g,%s,%.10g,%.10g\n", orc_alpha.c_str(), orc_h,
                    sc_oscillator_eigenvalue(alpha.data(), n, orc_h),
                    std::isinf(p) ? "inf" : std::to_string(int(p)).c_str(), c, norm);
      }
    } else {
      double norm = 0;
      check(sc_oscillator_lp_norm(alpha.data(), n, orc_h, parse_pvalue(orc_p), &norm),
            "oracle");
      std::printf("%.*g\n", orc_digits, norm);
    }
    return 0;
  }

  if (*qz || *sp) {
    const bool is_sp = bool(*sp);
    SymbolArgs& sa = is_sp ? sp_sym : qz_sym;
    double L = is_sp ? sp_L : qz_L, h = is_sp ? sp_h : qz_h;
    int N = is_sp ? sp_N : qz_N;
    std::string method = is_sp ? sp_method : qz_method;
    sc_symbol* sym = sa.make(method != "midpoint-fft");
    sc_grid* g = nullptr;
    check(sc_grid_create(sa.n, L, N, h, &g), "grid");
    sc_operator* op = nullptr;
    if (method == "midpoint-fft") {
      check(sc_quantize_weyl(sym, g, &op), "quantize");
    } else {
      check(sc_quantize_schrodinger(sym, g, method.c_str(), &op), "quantize");
    }
    if (is_sp) {
      sc_eigs* e = nullptr;
      check(sc_ground_cluster(op, sp_C, h, &e), "spectrum");
      std::printf("lambda_re,lambda_im,residual,multiplicity_hint\n");
      for (int i = 0; i < sc_eigs_count(e); ++i) {
        double lr, li, res;
        int mult;
        check(sc_eigs_get(e, i, &lr, &li, &res, &mult), "spectrum row");
        std::printf("%.12g,%.12g,%.3g,%d\n", lr, li, res, mult);
      }
      sc_eigs_free(e);
    } else {
      char* stats = nullptr;
      check(sc_operator_stats(op, &stats), "stats");
      std::printf("%s\n", stats);
      sc_string_free(stats);
      if (!qz_save.empty()) check(sc_operator_save(op, qz_save.c_str()), "save");
    }
    sc_operator_free(op);
    sc_grid_free(g);
    sc_symbol_free(sym);
    return 0;
  }

  if (*sc) {
    json cfg;
    cfg["name"] = "cli_scaling";
    cfg["symbol"] = sc_sym.family.empty() ? json{{"expr", sc_sym.expr}}
                                          : json{{"family", sc_sym.family}};
    cfg["n"] = sc_sym.n;
    cfg["grid"] = {{"L", sc_L}, {"N", sc_N}, {"variant", sc_variant}};
    cfg["sweep"] = {{"h_tilde", sc_ht}, {"k_min", sc_kmin}, {"k_max", sc_kmax}};
    json ps = json::array();
    for (const auto& s : sc_p)
      ps.push_back(s == "inf" ? json("inf") : json(std::stod(s)));
    cfg["p_list"] = ps;
    cfg["checks"] = {"scaling"};
    cfg["tolerances"] = {{"fit_tol", sc_fit}, {"cluster_C", sc_C}};
    cfg["output_dir"] = sc_out;
    return run_inline_config(cfg);
  }

  if (*gd) {
    json cfg;
    cfg["name"] = "cli_garding";
    cfg["symbol"] = gd_sym.family.empty() ? json{{"expr", gd_sym.expr}}
                                          : json{{"family", gd_sym.family}};
    cfg["n"] = gd_sym.n;
    cfg["grid"] = {{"L", gd_L}, {"N", gd_N}, {"variant", "midpoint-fft"}};
    cfg["checks"] = {"garding"};
    cfg["tolerances"] = {{"garding_h", gd_h}, {"garding_stability", gd_stab}};
    cfg["output_dir"] = gd_out;
    return run_inline_config(cfg);
  }

  return 0;
}

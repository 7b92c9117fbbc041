#pragma once

// Configuration-driven experiment runner.  A JSON config names a symbol (a
// built-in family or an expression), a grid, an h-sweep and a set of checks;
// the runner executes them in dependency order (assumptions gate everything),
// writes CSV/JSON/SVG artifacts into <output_dir>/<name>-<confighash>/ and
// reports one verdict per check.  Reruns of an unchanged config are
// byte-identical and may reuse cached operator/eigenpair files.

#include <map>
#include <string>
#include <vector>

#include "util.hpp"

namespace semiclass::runner {

struct Tolerances {
  double fit_tol = 0.05;
  double cluster_C = 3.0;
  double spectrum_rel = 1e-3;         // informational; spectrum verdict is trend-based
  std::vector<double> garding_h = {0.2, 0.1, 0.05, 0.025};
  double garding_stability = 0.2;
  double apriori_c_max = 10.0;
  int apriori_k_max = 5;
  double apriori_L = 2.5;
  int apriori_N = 64;
  double microlocal_delta = 0.4;
  int microlocal_M = 2;
  std::vector<double> microlocal_h = {0.05, 0.025};
  double microlocal_L = 2.0;
  int microlocal_N = 96;
  int microlocal_dense_N = 64;
  double qn_factor = 2.0;
  std::vector<int> qn_powers = {1, 2};
  double deriv_factor = 2.0;
  int deriv_K = 2;
  double assumption_radius = 20.0;
  int assumption_samples = 4096;
};

struct ExperimentConfig {
  std::string name;
  std::string family;  // exactly one of family/expr is set
  std::string expr;
  int n = 1;
  double L = 10.0;
  int N = 256;
  std::string variant = "auto";  // auto | spectral | fd2..fd8 | midpoint-fft
  double h_tilde = 0.5;
  int k_min = 0;
  int k_max = 6;
  std::vector<double> p_list = {2.0};
  std::vector<std::string> checks;
  Tolerances tol;
  std::string output_dir = "out";
  uint64_t seed = 12345;
  int jobs = 1;

  std::vector<double> h_list() const;
  std::string canonical_json() const;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
};

struct RunResult {
  bool all_passed = false;
  std::string out_dir;
  std::string summary_json;
};

RunResult run_experiment(const ExperimentConfig& cfg, const std::string& output_override);

}  // namespace semiclass::runner

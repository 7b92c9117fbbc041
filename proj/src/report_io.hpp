#pragma once

// Artifact emission: CSV tables with %.17g round-trip formatting (byte-stable
// across reruns), a self-contained SVG log-log plot and a companion gnuplot
// script for the scaling reports.

#include <string>
#include <vector>

#include "analysis.hpp"

namespace semiclass::report {

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// columns: h,p,norm,oracle_norm,lambda_re,lambda_im,residual
std::string scaling_csv(const analysis::ScalingReport& rep);

// log-log plot: per-p point series, fitted line, theoretical slope, and the
// KTZ reference exponent as a dashed line
std::string scaling_svg(const analysis::ScalingReport& rep);

// gnuplot script rendering the same rows from scaling.csv
std::string scaling_gnuplot(const analysis::ScalingReport& rep, const std::string& csv_name);

uint64_t fnv1a(const std::string& data);
std::string hex16(uint64_t v);

}  // namespace semiclass::report

#include "report_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace semiclass::report {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(SC_ERR_IO, "cannot open for writing: " + path);
  f.write(content.data(), long(content.size()));
  if (!f) fail(SC_ERR_IO, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(SC_ERR_IO, "cannot open: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

uint64_t fnv1a(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex16(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {
std::string pstr(double p) { return std::isinf(p) ? "inf" : fmt_g17(p); }
}  // namespace

std::string scaling_csv(const analysis::ScalingReport& rep) {
  std::ostringstream os;
  os << "h,p,norm,oracle_norm,lambda_re,lambda_im,residual\n";
  for (const auto& r : rep.rows) {
    os << fmt_g17(r.h) << "," << pstr(r.p) << "," << fmt_g17(r.norm) << ","
       << (std::isnan(r.oracle_norm) ? "" : fmt_g17(r.oracle_norm)) << ","
       << fmt_g17(r.lambda.real()) << "," << fmt_g17(r.lambda.imag()) << ","
       << fmt_g17(r.residual) << "\n";
  }
  return os.str();
}

namespace {

struct Series {
  double p;
  std::vector<std::pair<double, double>> pts;  // (log10 h, log10 norm)
};

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};

}  // namespace

std::string scaling_svg(const analysis::ScalingReport& rep) {
  std::vector<Series> series;
  for (const auto& f : rep.fits) {
    Series s;
    s.p = f.p;
    for (const auto& r : rep.rows)
      if (r.p == f.p && r.norm > 0) s.pts.emplace_back(std::log10(r.h), std::log10(r.norm));
    series.push_back(s);
  }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (auto [x, y] : s.pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!(xmax > xmin)) {
    xmin -= 1;
    xmax += 1;
  }
  double ypad = 0.1 * std::max(1e-3, ymax - ymin);
  ymin -= ypad;
  ymax += ypad + 0.25 * std::max(1e-3, ymax - ymin);  // room for reference lines
  const double W = 720, H = 520, ml = 70, mr = 190, mt = 40, mb = 55;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << strf("<text x=\"%g\" y=\"24\" font-size=\"15\" font-family=\"sans-serif\">"
             "ground-state L^p norms vs h%s</text>\n",
             ml, rep.diagnostic_only ? " [diagnostic (outside theorem scope)]" : "");
  // axes
  os << strf("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml,
             H - mb, W - mr, H - mb);
  os << strf("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml, mt,
             ml, H - mb);
  os << strf("<text x=\"%g\" y=\"%g\" font-size=\"12\" font-family=\"sans-serif\">log10 h"
             "</text>\n", (ml + W - mr) / 2, H - 16.0);
  os << strf("<text x=\"16\" y=\"%g\" font-size=\"12\" font-family=\"sans-serif\" "
             "transform=\"rotate(-90 16 %g)\">log10 ||u||_p</text>\n", (mt + H - mb) / 2,
             (mt + H - mb) / 2);
  // ticks
  for (int t = int(std::ceil(xmin)); t <= int(std::floor(xmax)); ++t) {
    os << strf("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
               px(t), H - mb, px(t), H - mb + 5);
    os << strf("<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\">%d</text>\n", px(t), H - mb + 18, t);
  }
  for (int t = int(std::ceil(ymin)); t <= int(std::floor(ymax)); ++t) {
    os << strf("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
               ml - 5, py(t), ml, py(t));
    os << strf("<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"end\" "
               "font-family=\"sans-serif\">%d</text>\n", ml - 8, py(t) + 4, t);
  }

  int ci = 0;
  double ly = mt + 10;
  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const auto& fit = rep.fits[si];
    const char* col = kColors[ci++ % 6];
    for (auto [x, y] : s.pts)
      os << strf("<circle cx=\"%g\" cy=\"%g\" r=\"3.5\" fill=\"%s\"/>\n", px(x), py(y), col);
    // fitted line through the mean point with slope -delta_hat
    double mx = 0, my = 0;
    for (auto [x, y] : s.pts) {
      mx += x;
      my += y;
    }
    mx /= double(s.pts.size());
    my /= double(s.pts.size());
    auto line = [&](double slope, const char* dash, double width, const char* color) {
      double y0 = my + slope * (xmin - mx), y1 = my + slope * (xmax - mx);
      os << strf("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" "
                 "stroke-width=\"%g\"%s/>\n",
                 px(xmin), py(y0), px(xmax), py(y1), color, width,
                 dash[0] ? strf(" stroke-dasharray=\"%s\"", dash).c_str() : "");
    };
    line(-fit.delta_hat, "", 1.6, col);
    line(-fit.theoretical, "2,3", 1.2, col);
    if (!std::isnan(fit.ktz) && std::abs(fit.ktz - fit.theoretical) > 1e-12)
      line(-fit.ktz, "8,4", 1.0, "#777777");
    os << strf("<text x=\"%g\" y=\"%g\" font-size=\"11\" font-family=\"sans-serif\" "
               "fill=\"%s\">p=%s: fit %.4f, th %.4f%s</text>\n",
               W - mr + 10, ly, col, pstr(s.p).c_str(), fit.delta_hat, fit.theoretical,
               fit.pass ? "" : " [FAIL]");
    ly += 16;
  }
  os << strf("<text x=\"%g\" y=\"%g\" font-size=\"10\" font-family=\"sans-serif\" "
             "fill=\"#777777\">dashed grey: KTZ reference slope</text>\n", W - mr + 10, ly);
  os << "</svg>\n";
  return os.str();
}

std::string scaling_gnuplot(const analysis::ScalingReport& rep, const std::string& csv_name) {
  std::ostringstream os;
  os << "# gnuplot script for the scaling report (companion to the SVG)\n"
     << "set datafile separator ','\n"
     << "set logscale xy\nset xlabel 'h'\nset ylabel '||u||_p'\nset key left top\n";
  os << "plot ";
  bool first = true;
  for (const auto& f : rep.fits) {
    if (!first) os << ", \\\n     ";
    first = false;
    os << "'" << csv_name << "' using (strcol(2) eq '" << pstr(f.p)
       << "' ? $1 : NaN):3 with points title 'p=" << pstr(f.p) << "'";
  }
  os << "\n";
  return os.str();
}

}  // namespace semiclass::report

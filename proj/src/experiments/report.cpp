// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "plapdg/experiments.hpp"

namespace plapdg {

namespace {

std::string num(double v, const char* fmt = "%.12e") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

double error_of(const ConvergenceCell& c, ErrorKind e) {
  return e == ErrorKind::QuasiNorm ? c.quasi_norm_error : c.broken_norm_error;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

}  // namespace

std::string errors_csv(const ConvergenceReport& report) {
  std::ostringstream s;
  s << "example,p,r,h_or_r,quasi_norm_error,broken_norm_error,newton_iters,wall_ms\n";
  const bool h_study = report.config.kind == StudyKind::H;
  for (const ConvergenceCell& c : report.cells) {
    s << c.example << ',' << c.p.str() << ',' << c.r << ','
      << (h_study ? num(c.h, "%.12g") : std::to_string(c.r)) << ',';
    if (c.converged) {
      s << num(c.quasi_norm_error) << ',' << num(c.broken_norm_error);
    } else {
      s << "nan,nan";
    }
    s << ',' << c.newton_iters << ',' << num(c.wall_ms, "%.3f") << '\n';
  }
  return s.str();
}

std::string slopes_csv(const ConvergenceReport& report) {
  std::ostringstream s;
  s << "example,study,p,r,error,scale,points,slope,intercept,r_squared\n";
  for (const StudySlope& sl : report.slopes) {
    s << report.config.example << ',' << to_string(report.config.kind) << ',' << sl.p.str() << ',' << sl.r << ','
      << to_string(sl.error) << ',' << to_string(sl.scale) << ',' << sl.points << ',' << num(sl.fit.slope, "%.6f")
      << ',' << num(sl.fit.intercept, "%.6f") << ',' << num(sl.fit.r_squared, "%.6f") << '\n';
  }
  return s.str();
}

std::string report_svg(const ConvergenceReport& report, ErrorKind error) {
  const bool h_study = report.config.kind == StudyKind::H;
  struct Series {
    std::string label;
    std::vector<std::pair<double, double>> pts;  // plot coordinates: (log10 h or r, log10 e)
    std::optional<StudySlope> fit;
  };
  std::vector<Series> series;
  for (const ConvergenceCell& c : report.cells) {
    const double e = error_of(c, error);
    if (!c.converged || !(e > 0.0)) continue;
    const std::string label = "p=" + c.p.str() + (h_study ? ", r=" + std::to_string(c.r) : "");
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.label == label; });
    if (it == series.end()) {
      series.push_back({label, {}, report.slope(c.p, c.r, error)});
      it = series.end() - 1;
    }
    it->pts.emplace_back(h_study ? std::log10(c.h) : static_cast<double>(c.r), std::log10(e));
  }

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.pts) {
      x0 = first ? x : std::min(x0, x);
      x1 = first ? x : std::max(x1, x);
      y0 = first ? y : std::min(y0, y);
      y1 = first ? y : std::max(y1, y);
      first = false;
    }
  }
  if (x1 - x0 < 1e-9) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  y0 = std::floor(y0);
  y1 = std::ceil(y1);
  if (y1 - y0 < 1.0) y1 = y0 + 1.0;
  const double padx = 0.05 * (x1 - x0);
  x0 -= padx;
  x1 += padx;

  constexpr double W = 640, H = 480, L = 80, R = 180, T = 40, B = 60;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  auto f2 = [](double v) { return num(v, "%.2f"); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">Example " << report.config.example
    << ": " << to_string(error) << " error, " << (h_study ? "h-version" : "p-version") << "</text>\n";
  // frame, decade grid on y
  s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(y0); d <= static_cast<int>(y1); ++d) {
    s << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << f2(py(d)) << "\" y2=\"" << f2(py(d))
      << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << f2(py(d) + 4) << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  if (h_study) {
    for (const Series& ser : series) {
      for (const auto& pt : ser.pts) {
        const double x = pt.first;
        s << "<text x=\"" << f2(px(x)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
          << num(std::pow(10.0, x), "%.4g") << "</text>\n";
      }
      break;
    }
  } else {
    for (int r = static_cast<int>(std::ceil(x0)); r <= static_cast<int>(std::floor(x1)); ++r) {
      s << "<text x=\"" << f2(px(r)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << r << "</text>\n";
    }
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 20 << "\" text-anchor=\"middle\">"
    << (h_study ? "h (log scale)" : "polynomial degree r") << "</text>\n";
  s << "<text x=\"20\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << (T + H - B) / 2 << ")\">error (log scale)</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& ser = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    for (const auto& [x, y] : ser.pts) {
      s << "<circle cx=\"" << f2(px(x)) << "\" cy=\"" << f2(py(y)) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    }
    std::string legend = ser.label;
    if (ser.fit && ser.pts.size() >= 2) {
      // fitted line over the data range, mapped to log10 coordinates
      double xa = ser.pts.front().first, xb = xa;
      for (const auto& pt : ser.pts) {
        xa = std::min(xa, pt.first);
        xb = std::max(xb, pt.first);
      }
      const double ln10 = std::log(10.0);
      auto fy = [&](double x) {
        const double u = h_study ? x * ln10 : x;  // fit abscissa: ln h or r
        return (ser.fit->fit.intercept + ser.fit->fit.slope * u) / ln10;
      };
      s << "<line x1=\"" << f2(px(xa)) << "\" y1=\"" << f2(py(fy(xa))) << "\" x2=\"" << f2(px(xb)) << "\" y2=\""
        << f2(py(fy(xb))) << "\" stroke=\"" << color << "\" stroke-dasharray=\"5,3\"/>\n";
      legend += " (slope " + num(ser.fit->fit.slope, "%.2f") + ")";
    }
    const double ly = T + 10 + 18 * static_cast<double>(i);
    s << "<circle cx=\"" << W - R + 14 << "\" cy=\"" << ly << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    s << "<text x=\"" << W - R + 24 << "\" y=\"" << ly + 4 << "\">" << legend << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::vector<std::filesystem::path> emit_report(const ConvergenceReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    write_file(out_dir / name, text);
    written.push_back(out_dir / name);
  };
  put("errors.csv", errors_csv(report));
  put("slopes.csv", slopes_csv(report));
  put("config.json", config_to_json(report.config));
  const bool any = std::any_of(report.cells.begin(), report.cells.end(), [](const ConvergenceCell& c) { return c.converged; });
  if (any) {
    const std::string study(to_string(report.config.kind));
    for (ErrorKind e : {ErrorKind::QuasiNorm, ErrorKind::BrokenNorm}) {
      put("study_" + study + "_" + std::string(to_string(e)) + ".svg", report_svg(report, e));
    }
  }
  return written;
}

}  // namespace plapdg

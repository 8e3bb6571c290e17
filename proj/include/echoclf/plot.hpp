#pragma once

// SVG rendering of an ROC curve. The curve is drawn inside a group whose
// transform maps the unit square onto the plot area, so the polyline's
// coordinates are the (fpr, tpr) pairs themselves.

#include <ostream>
#include <string>

#include "echoclf/csv.hpp"
#include "echoclf/metrics.hpp"

namespace echoclf {

inline void write_roc_svg(const RocCurve& curve, const std::string& title, std::ostream& out) {
  constexpr int size = 360;
  constexpr int left = 70;
  constexpr int top = 40;
  const int width = left + size + 30;
  const int height = top + size + 70;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left + size / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"14\">" << title << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << size << "\" height=\"" << size
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double v = i * 0.25;
    const int px = left + i * size / 4;
    const int py = top + size - i * size / 4;
    out << "<text x=\"" << px << "\" y=\"" << top + size + 16 << "\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"11\">" << format_fixed(v, 2) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\" "
        << "font-family=\"sans-serif\" font-size=\"11\">" << format_fixed(v, 2) << "</text>\n";
  }
  out << "<text x=\"" << left + size / 2 << "\" y=\"" << top + size + 36
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">False positive rate</text>\n";
  out << "<text transform=\"translate(" << left - 44 << ',' << top + size / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">True positive rate</text>\n";

  out << "<g id=\"plot\" transform=\"translate(" << left << ',' << top + size << ") scale(" << size << ',' << -size
      << ")\">\n";
  out << "<line id=\"chance\" x1=\"0\" y1=\"0\" x2=\"1\" y2=\"1\" stroke=\"gray\" stroke-dasharray=\"4 4\" "
      << "vector-effect=\"non-scaling-stroke\"/>\n";
  out << "<polyline id=\"roc\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" "
      << "vector-effect=\"non-scaling-stroke\" points=\"";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (i) {
      out << ' ';
    }
    out << format_double(curve.points[i].fpr, 6) << ',' << format_double(curve.points[i].tpr, 6);
  }
  out << "\"/>\n</g>\n";
  out << "<text id=\"caption\" x=\"" << left + size / 2 << "\" y=\"" << top + size + 58
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">AUC = "
      << format_fixed(curve.auc, 4) << "</text>\n";
  out << "</svg>\n";
}

} // namespace echoclf

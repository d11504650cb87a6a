#include "ncpf/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ncpf/errors.hpp"
#include "ncpf/io.hpp"

namespace ncpf {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMarginLeft = 56.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 20.0;
constexpr double kMarginBottom = 40.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// round a span to a 1/2/5 grid step
double nice_step(double span, int target_ticks) {
  const double raw = span / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  if (r < 1.5) return mag;
  if (r < 3.5) return 2.0 * mag;
  if (r < 7.5) return 5.0 * mag;
  return 10.0 * mag;
}

}  // namespace

void write_state_plot_svg(const std::string& path, Index index_one_based,
                          const std::vector<double>& truth,
                          const std::vector<double>& estimate,
                          const std::vector<DensityColumn>& density) {
  require(!truth.empty() && truth.size() == estimate.size(),
          "plot: truth and estimate must be nonempty and equal length");
  require(density.empty() || density.size() == truth.size(),
          "plot: density column count mismatch");
  const int T = static_cast<int>(truth.size());

  double lo = 0.0, hi = 0.0;
  for (int t = 0; t < T; ++t) {
    lo = std::min({lo, truth[t], estimate[t]});
    hi = std::max({hi, truth[t], estimate[t]});
  }
  for (const auto& col : density)
    for (double v : col.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double t) {
    return kMarginLeft + (t - 1.0) / std::max(1, T - 1) * plot_w;
  };
  auto sy = [&](double v) {
    return kMarginTop + (hi - v) / (hi - lo) * plot_h;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (!density.empty()) {
    // weighted histogram per time column, shaded by relative mass
    const int bins = 48;
    const double bin_h = (hi - lo) / bins;
    const double col_w = plot_w / std::max(1, T - 1);
    for (int t = 0; t < T; ++t) {
      const auto& col = density[static_cast<std::size_t>(t)];
      if (col.values.empty()) continue;
      std::vector<double> mass(bins, 0.0);
      double total = 0.0;
      for (std::size_t i = 0; i < col.values.size(); ++i) {
        int b = static_cast<int>((col.values[i] - lo) / bin_h);
        b = std::clamp(b, 0, bins - 1);
        const double w = i < col.weights.size() ? col.weights[i] : 1.0;
        mass[static_cast<std::size_t>(b)] += w;
        total += w;
      }
      if (total <= 0.0) continue;
      const double peak = *std::max_element(mass.begin(), mass.end());
      for (int b = 0; b < bins; ++b) {
        const double m = mass[static_cast<std::size_t>(b)];
        if (m <= 0.0) continue;
        const double opacity = 0.75 * m / peak;
        const double x0 = sx(t + 1.0) - col_w / 2.0;
        const double y0 = sy(lo + (b + 1) * bin_h);
        svg << "<rect x=\"" << num(std::max(kMarginLeft, x0)) << "\" y=\""
            << num(y0) << "\" width=\"" << num(col_w) << "\" height=\""
            << num(plot_h / bins) << "\" fill=\"#888888\" fill-opacity=\""
            << num(opacity) << "\"/>\n";
      }
    }
  }

  // axes
  svg << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(sy(lo))
      << "\" x2=\"" << num(kWidth - kMarginRight) << "\" y2=\"" << num(sy(lo))
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(kMarginTop)
      << "\" x2=\"" << num(kMarginLeft) << "\" y2=\"" << num(sy(lo))
      << "\" stroke=\"black\"/>\n";
  const double ystep = nice_step(hi - lo, 6);
  for (double v = std::ceil(lo / ystep) * ystep; v <= hi; v += ystep) {
    svg << "<line x1=\"" << num(kMarginLeft - 4) << "\" y1=\"" << num(sy(v))
        << "\" x2=\"" << num(kMarginLeft) << "\" y2=\"" << num(sy(v))
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(kMarginLeft - 8) << "\" y=\"" << num(sy(v) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  const double xstep = std::max(1.0, nice_step(static_cast<double>(T), 8));
  for (double t = xstep; t <= T; t += xstep) {
    svg << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(sy(lo)) << "\" x2=\""
        << num(sx(t)) << "\" y2=\"" << num(sy(lo) + 4) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(sy(lo) + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  svg << "<text x=\"" << num(kMarginLeft + plot_w / 2) << "\" y=\""
      << num(kHeight - 8) << "\" font-size=\"12\" text-anchor=\"middle\">t"
      << "</text>\n";
  svg << "<text x=\"14\" y=\"" << num(kMarginTop + plot_h / 2)
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << num(kMarginTop + plot_h / 2) << ")\">state " << index_one_based
      << "</text>\n";

  auto polyline = [&](const std::vector<double>& series, const char* style) {
    svg << "<polyline fill=\"none\" " << style << " points=\"";
    for (int t = 0; t < T; ++t) {
      if (t) svg << ' ';
      svg << num(sx(t + 1.0)) << ',' << num(sy(series[static_cast<std::size_t>(t)]));
    }
    svg << "\"/>\n";
  };
  polyline(truth, "stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"");
  polyline(estimate, "stroke=\"#1f77b4\" stroke-width=\"1.5\"");

  svg << "</svg>\n";
  write_text_file(path, svg.str());
}

}  // namespace ncpf

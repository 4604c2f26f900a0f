#include "csense/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <vector>

namespace csense {

namespace {

struct Rgb {
  int r, g, b;
};

/// Three-stop gradient (dark violet -> teal -> yellow) on [0, 1].
Rgb rate_color(double v) {
  v = std::clamp(v, 0.0, 1.0);
  const Rgb lo{68, 1, 84}, mid{33, 145, 140}, hi{253, 231, 37};
  auto lerp = [](int a, int b, double t) {
    return static_cast<int>(std::lround(a + (b - a) * t));
  };
  if (v < 0.5) {
    const double t = v / 0.5;
    return {lerp(lo.r, mid.r, t), lerp(lo.g, mid.g, t), lerp(lo.b, mid.b, t)};
  }
  const double t = (v - 0.5) / 0.5;
  return {lerp(mid.r, hi.r, t), lerp(mid.g, hi.g, t), lerp(mid.b, hi.b, t)};
}

}  // namespace

void write_phase_heatmap_svg(std::ostream& out, const std::vector<PhaseCell>& cells,
                             const ScalingFit* fit) {
  std::set<Index> n_set, s_set;
  for (const auto& c : cells) {
    n_set.insert(c.rows);
    s_set.insert(c.sparsity);
  }
  const std::vector<Index> ns(n_set.begin(), n_set.end());
  const std::vector<Index> ss(s_set.begin(), s_set.end());
  std::map<Index, std::size_t> n_pos, s_pos;
  for (std::size_t i = 0; i < ns.size(); ++i) n_pos[ns[i]] = i;
  for (std::size_t i = 0; i < ss.size(); ++i) s_pos[ss[i]] = i;

  const double cell_w = 34, cell_h = 30, left = 70, top = 30, bottom = 55;
  const double width = left + cell_w * static_cast<double>(ns.size()) + 140;
  const double height =
      top + cell_h * static_cast<double>(ss.size()) + bottom;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"monospace\" font-size=\"11\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"18\">recovery success rate"
      << (cells.empty() ? "" : std::string(", N = ") + std::to_string(cells[0].ambient))
      << "</text>\n";

  // s rows are drawn smallest at the bottom.
  for (const auto& c : cells) {
    const double x = left + cell_w * static_cast<double>(n_pos[c.rows]);
    const double y =
        top + cell_h * static_cast<double>(ss.size() - 1 - s_pos[c.sparsity]);
    const Rgb col = rate_color(c.success_rate);
    out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w
        << "\" height=\"" << cell_h << "\" fill=\"rgb(" << col.r << ',' << col.g
        << ',' << col.b << ")\" stroke=\"white\" stroke-width=\"1\"/>\n";
  }

  for (std::size_t i = 0; i < ns.size(); ++i) {
    out << "<text x=\"" << left + cell_w * (static_cast<double>(i) + 0.5)
        << "\" y=\"" << top + cell_h * static_cast<double>(ss.size()) + 16
        << "\" text-anchor=\"middle\">" << ns[i] << "</text>\n";
  }
  out << "<text x=\"" << left + cell_w * static_cast<double>(ns.size()) / 2
      << "\" y=\"" << top + cell_h * static_cast<double>(ss.size()) + 38
      << "\" text-anchor=\"middle\">n (rows kept)</text>\n";
  for (std::size_t i = 0; i < ss.size(); ++i) {
    out << "<text x=\"" << left - 8 << "\" y=\""
        << top + cell_h * (static_cast<double>(ss.size() - 1 - i) + 0.65)
        << "\" text-anchor=\"end\">s=" << ss[i] << "</text>\n";
  }

  // 50% boundary overlay from the fit, drawn between grid columns by
  // linear interpolation in n.
  if (fit != nullptr) {
    auto x_of_n = [&](double n_star) {
      // position within the categorical n axis
      std::size_t k = 0;
      while (k + 1 < ns.size() && static_cast<double>(ns[k + 1]) < n_star) ++k;
      double frac = 0.5;
      if (k + 1 < ns.size() && ns[k + 1] != ns[k])
        frac = (n_star - static_cast<double>(ns[k])) /
               static_cast<double>(ns[k + 1] - ns[k]);
      return left + cell_w * (static_cast<double>(k) + std::clamp(frac, 0.0, 1.0) +
                              (n_star < static_cast<double>(ns[0]) ? -0.5 : 0.0));
    };
    std::string points;
    for (const auto& b : fit->boundaries) {
      if (!b.bracketed || !s_pos.count(b.sparsity)) continue;
      const double x = x_of_n(b.n_star);
      const double y =
          top + cell_h * (static_cast<double>(ss.size() - 1 - s_pos[b.sparsity]) + 0.5);
      points += std::to_string(x) + "," + std::to_string(y) + " ";
    }
    if (!points.empty()) {
      out << "<polyline points=\"" << points
          << "\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n";
    }
  }

  // color scale
  const double bar_x = left + cell_w * static_cast<double>(ns.size()) + 24;
  for (int i = 0; i <= 20; ++i) {
    const double v = 1.0 - static_cast<double>(i) / 20.0;
    const Rgb col = rate_color(v);
    out << "<rect x=\"" << bar_x << "\" y=\"" << top + i * 6 << "\" width=\"16\""
        << " height=\"6\" fill=\"rgb(" << col.r << ',' << col.g << ',' << col.b
        << ")\"/>\n";
  }
  out << "<text x=\"" << bar_x + 22 << "\" y=\"" << top + 8 << "\">1.0</text>\n";
  out << "<text x=\"" << bar_x + 22 << "\" y=\"" << top + 126 << "\">0.0</text>\n";
  out << "</svg>\n";
}

}  // namespace csense

#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "harvest/capr.hpp"

namespace harvest {

struct RenderOptions {
  double width_px = 800.0;
  double margin_px = 30.0;
};

namespace detail {

inline const char* crop_color(std::size_t k) {
  static const char* palette[] = {"#d4a017", "#e8d21d", "#8b5a2b", "#1f77b4", "#2ca02c", "#9467bd", "#e377c2", "#7f7f7f"};
  return palette[k % (sizeof palette / sizeof *palette)];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

/// SVG of depots (squares), fields (circles filled by crop) and one closed
/// polyline per active crop-tour. Elements carry the classes `depot`,
/// `field crop-k` and `tour crop-k`.
inline std::string render_plan_svg(const HarvestPlan& plan, const Instance& inst, const RenderOptions& opt = {}) {
  double minx = 0, maxx = 0, miny = 0, maxy = 0;
  bool any = false;
  auto extend = [&](const Point& p) {
    if (!any) {
      minx = maxx = p.x_km;
      miny = maxy = p.y_km;
      any = true;
    }
    minx = std::min(minx, p.x_km);
    maxx = std::max(maxx, p.x_km);
    miny = std::min(miny, p.y_km);
    maxy = std::max(maxy, p.y_km);
  };
  for (const auto& d : inst.depots) extend(d.position);
  for (const auto& f : inst.fields) extend(f.position);
  const double span = std::max({maxx - minx, maxy - miny, 1e-9});
  const double scale = (opt.width_px - 2 * opt.margin_px) / span;
  const double height = (maxy - miny) * scale + 2 * opt.margin_px;
  auto px = [&](const Point& p) { return opt.margin_px + (p.x_km - minx) * scale; };
  auto py = [&](const Point& p) { return height - opt.margin_px - (p.y_km - miny) * scale; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::num(opt.width_px) << "\" height=\""
    << detail::num(height) << "\" viewBox=\"0 0 " << detail::num(opt.width_px) << ' ' << detail::num(height) << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const int K = static_cast<int>(plan.tours.size());
  for (int k = 0; k < K; ++k) {
    const auto& t = plan.tours[static_cast<std::size_t>(k)];
    if (t.empty()) continue;
    std::vector<Point> pts;
    const bool anchored = plan.depot >= 0 && static_cast<std::size_t>(plan.depot) < inst.num_depots();
    if (anchored) pts.push_back(inst.depots[static_cast<std::size_t>(plan.depot)].position);
    for (int f : t) pts.push_back(inst.fields.at(static_cast<std::size_t>(f)).position);
    if (anchored) pts.push_back(inst.depots[static_cast<std::size_t>(plan.depot)].position);
    s << "<polyline class=\"tour crop-" << k << "\" fill=\"none\" stroke=\"" << detail::crop_color(static_cast<std::size_t>(k))
      << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) s << (i ? " " : "") << detail::num(px(pts[i])) << ',' << detail::num(py(pts[i]));
    s << "\"/>\n";
  }
  for (std::size_t l = 0; l < inst.num_fields(); ++l) {
    const int k = l < plan.assignment.size() ? plan.assignment[l] : -1;
    const auto& p = inst.fields[l].position;
    s << "<circle class=\"field" << (k >= 0 ? " crop-" + std::to_string(k) : std::string(" unserved")) << "\" cx=\""
      << detail::num(px(p)) << "\" cy=\"" << detail::num(py(p)) << "\" r=\"5\" fill=\""
      << (k >= 0 ? detail::crop_color(static_cast<std::size_t>(k)) : "#ffffff") << "\" stroke=\"black\"/>\n";
  }
  for (std::size_t d = 0; d < inst.num_depots(); ++d) {
    const auto& p = inst.depots[d].position;
    const bool basis = static_cast<int>(d) == plan.depot;
    s << "<rect class=\"depot\" x=\"" << detail::num(px(p) - 6) << "\" y=\"" << detail::num(py(p) - 6)
      << "\" width=\"12\" height=\"12\" fill=\"" << (basis ? "#d62728" : "#444444") << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace harvest

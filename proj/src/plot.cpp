#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadsim/experiment.hpp"
#include "quadsim/types.hpp"

namespace quadsim {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

struct Series {
  std::string label;
  std::string color;
  std::vector<double> values;
};

struct Panel {
  std::string title;
  std::string unit;
  std::vector<Series> series;
};

std::string polyline(const std::vector<double>& t,
                     const std::vector<double>& v, double t0, double t1,
                     double v0, double v1, double x, double y, double w,
                     double h, const std::string& color) {
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << color
     << "\" stroke-width=\"1.2\" points=\"";
  const double tspan = std::max(t1 - t0, 1e-12);
  const double vspan = std::max(v1 - v0, 1e-12);
  for (size_t i = 0; i < t.size(); ++i) {
    const double px = x + (t[i] - t0) / tspan * w;
    const double py = y + h - (v[i] - v0) / vspan * h;
    os << px << "," << py << " ";
  }
  os << "\"/>\n";
  return os.str();
}

}  // namespace

void plot_trace(const std::string& csv_path, const std::string& svg_path) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open trace file: " + csv_path);

  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("trace file is empty: " + csv_path);
  const auto names = split_csv(line);
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < names.size(); ++i) col[names[i]] = i;
  for (const char* required :
       {"time", "base_z", "quat_w", "quat_x", "quat_y", "quat_z", "vel_x",
        "contact_FL", "contact_FR", "contact_RL", "contact_RR"})
    if (!col.count(required))
      throw ConfigError(std::string("trace file missing column: ") + required);

  std::vector<double> t;
  Panel height{"base height", "m", {{"z", "#1f77b4", {}}}};
  Panel attitude{"attitude",
                 "deg",
                 {{"roll", "#d62728", {}}, {"pitch", "#2ca02c", {}}}};
  Panel speed{"forward velocity", "m/s", {{"vx", "#9467bd", {}}}};
  std::array<std::vector<int>, kNumLegs> contact;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != names.size()) continue;  // tolerate a truncated tail
    const auto num = [&](const char* name) {
      return std::stod(cells[col.at(name)]);
    };
    t.push_back(num("time"));
    height.series[0].values.push_back(num("base_z"));
    const Quat q(num("quat_w"), num("quat_x"), num("quat_y"), num("quat_z"));
    const Mat3 r = q.normalized().toRotationMatrix();
    attitude.series[0].values.push_back(
        rad2deg(std::atan2(r(2, 1), r(2, 2))));
    attitude.series[1].values.push_back(
        rad2deg(-std::asin(std::clamp(r(2, 0), -1.0, 1.0))));
    speed.series[0].values.push_back(num("vel_x"));
    const char* legs[kNumLegs] = {"contact_FL", "contact_FR", "contact_RL",
                                  "contact_RR"};
    for (int li = 0; li < kNumLegs; ++li)
      contact[li].push_back(static_cast<int>(num(legs[li])));
  }
  if (t.size() < 2) throw ConfigError("trace has fewer than two rows");

  const double width = 860, panel_h = 130, margin_l = 70, margin_r = 20;
  const double plot_w = width - margin_l - margin_r;
  const double t0 = t.front(), t1 = t.back();

  std::ostringstream svg;
  const double raster_h = 90;
  const double total_h = 3 * (panel_h + 30) + raster_h + 60;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << total_h << "\" font-family=\"sans-serif\""
      << " font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  double y = 20;
  for (const Panel& panel : {height, attitude, speed}) {
    double v0 = 1e300, v1 = -1e300;
    for (const Series& s : panel.series) {
      for (double v : s.values) {
        v0 = std::min(v0, v);
        v1 = std::max(v1, v);
      }
    }
    const double pad = std::max((v1 - v0) * 0.1, 1e-6);
    v0 -= pad;
    v1 += pad;
    svg << "<text x=\"" << margin_l << "\" y=\"" << y - 6 << "\">"
        << panel.title << " (" << panel.unit << ")</text>\n"
        << "<rect x=\"" << margin_l << "\" y=\"" << y << "\" width=\""
        << plot_w << "\" height=\"" << panel_h
        << "\" fill=\"none\" stroke=\"#ccc\"/>\n";
    svg << "<text x=\"" << margin_l - 6 << "\" y=\"" << y + 10
        << "\" text-anchor=\"end\">" << v1 << "</text>\n"
        << "<text x=\"" << margin_l - 6 << "\" y=\"" << y + panel_h
        << "\" text-anchor=\"end\">" << v0 << "</text>\n";
    double lx = margin_l + 8;
    for (const Series& s : panel.series) {
      svg << polyline(t, s.values, t0, t1, v0, v1, margin_l, y, plot_w,
                      panel_h, s.color);
      svg << "<text x=\"" << lx << "\" y=\"" << y + 14 << "\" fill=\""
          << s.color << "\">" << s.label << "</text>\n";
      lx += 50;
    }
    y += panel_h + 30;
  }

  // contact raster: one filled bar row per leg
  svg << "<text x=\"" << margin_l << "\" y=\"" << y - 6
      << "\">contact</text>\n";
  const double row_h = raster_h / kNumLegs;
  for (int li = 0; li < kNumLegs; ++li) {
    const double ry = y + li * row_h;
    svg << "<text x=\"" << margin_l - 6 << "\" y=\"" << ry + row_h * 0.7
        << "\" text-anchor=\"end\">" << to_string(kLegOrder[li])
        << "</text>\n";
    size_t i = 0;
    while (i < contact[li].size()) {
      if (!contact[li][i]) {
        ++i;
        continue;
      }
      size_t j = i;
      while (j < contact[li].size() && contact[li][j]) ++j;
      const double x0 = margin_l + (t[i] - t0) / (t1 - t0) * plot_w;
      const double x1 =
          margin_l + (t[std::min(j, t.size() - 1)] - t0) / (t1 - t0) * plot_w;
      svg << "<rect x=\"" << x0 << "\" y=\"" << ry + 2 << "\" width=\""
          << std::max(x1 - x0, 0.5) << "\" height=\"" << row_h - 4
          << "\" fill=\"#1f77b4\"/>\n";
      i = j;
    }
  }
  y += raster_h;
  svg << "<text x=\"" << margin_l << "\" y=\"" << y + 16 << "\">t = " << t0
      << " s</text>\n"
      << "<text x=\"" << width - margin_r << "\" y=\"" << y + 16
      << "\" text-anchor=\"end\">t = " << t1 << " s</text>\n"
      << "</svg>\n";

  std::ofstream out(svg_path);
  if (!out) throw ConfigError("cannot write svg file: " + svg_path);
  out << svg.str();
}

}  // namespace quadsim

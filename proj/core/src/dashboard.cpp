#include "autohedge/dashboard.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "autohedge/error.hpp"

namespace autohedge {

namespace {

constexpr double kWidth = 900.0;
constexpr double kPanelHeight = 180.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kGap = 30.0;

struct Series {
  std::string name;
  std::string colour;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void draw_panel(std::ostringstream& svg, const EpisodeTable& table, const Panel& panel, double y0) {
  const double plot_w = kWidth - kLeft - kRight;
  std::vector<std::vector<double>> data;
  std::vector<const Series*> shown;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : panel.series) {
    if (!table.has_column(s.name)) continue;
    auto col = table.column(s.name);
    for (double v : col) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    data.push_back(std::move(col));
    shown.push_back(&s);
  }
  if (!std::isfinite(lo)) {
    lo = -1.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const std::size_t n = table.size();
  auto x_of = [&](std::size_t i) {
    return kLeft + (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0);
  };
  auto y_of = [&](double v) { return y0 + kPanelHeight * (hi - v) / (hi - lo); };

  svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(y0) << "\" width=\"" << num(plot_w)
      << "\" height=\"" << num(kPanelHeight) << "\" fill=\"none\" stroke=\"#999\"/>\n";
  svg << "<text x=\"" << num(kLeft) << "\" y=\"" << num(y0 - 6) << "\" font-size=\"13\">"
      << escape(panel.title) << "</text>\n";
  svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y0 + 10)
      << "\" font-size=\"10\" text-anchor=\"end\">" << label(hi) << "</text>\n";
  svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y0 + kPanelHeight)
      << "\" font-size=\"10\" text-anchor=\"end\">" << label(lo) << "</text>\n";
  if (lo < 0.0 && hi > 0.0) {
    svg << "<line x1=\"" << num(kLeft) << "\" x2=\"" << num(kLeft + plot_w) << "\" y1=\""
        << num(y_of(0.0)) << "\" y2=\"" << num(y_of(0.0))
        << "\" stroke=\"#ccc\" stroke-dasharray=\"4,3\"/>\n";
  }

  for (std::size_t k = 0; k < data.size(); ++k) {
    svg << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << shown[k]->colour
        << "\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(data[k][i])) continue;
      if (!first) svg << ' ';
      svg << num(x_of(i)) << ',' << num(y_of(data[k][i]));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = y0 + 14.0 + 16.0 * static_cast<double>(k);
    svg << "<line x1=\"" << num(kWidth - kRight + 10) << "\" x2=\"" << num(kWidth - kRight + 28)
        << "\" y1=\"" << num(ly - 4) << "\" y2=\"" << num(ly - 4) << "\" stroke=\""
        << shown[k]->colour << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << num(kWidth - kRight + 32) << "\" y=\"" << num(ly)
        << "\" font-size=\"11\">" << escape(shown[k]->name) << "</text>\n";
  }
}

}  // namespace

std::string render_dashboard_svg(const EpisodeTable& table, const std::string& title) {
  std::vector<Panel> panels;
  if (table.has_column("portfolio_value")) {
    panels.push_back({"Prices", {{"mid1", "#1f77b4"}, {"mid2", "#ff7f0e"}, {"blended_mid", "#444"}}});
    panels.push_back({"Positions",
                      {{"client_pos", "#1f77b4"},
                       {"hedge1_pos", "#2ca02c"},
                       {"hedge2_pos", "#d62728"},
                       {"portfolio_value", "#9467bd"}}});
  } else {
    panels.push_back({"Prices",
                      {{"mid", "#444"},
                       {"client_bid", "#1f77b4"},
                       {"client_ask", "#aec7e8"},
                       {"hedge_bid", "#d62728"},
                       {"hedge_ask", "#ff9896"}}});
    panels.push_back(
        {"Positions", {{"client_pos", "#1f77b4"}, {"hedge_pos", "#2ca02c"}, {"net_pos", "#d62728"}}});
  }
  panels.push_back({"PNL",
                    {{"client_pnl", "#1f77b4"},
                     {"hedge_pnl", "#d62728"},
                     {"market_pnl", "#2ca02c"},
                     {"net_pnl", "#000"}}});
  panels.push_back({"Reward", {{"reward", "#9467bd"}, {"penalty", "#8c564b"}}});

  const double height =
      kTop + static_cast<double>(panels.size()) * (kPanelHeight + kGap) + 10.0;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(height) << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kLeft) << "\" y=\"20\" font-size=\"15\">" << escape(title)
      << "</text>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    draw_panel(svg, table, panels[p], kTop + 10.0 + static_cast<double>(p) * (kPanelHeight + kGap));
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_dashboard_svg(const EpisodeTable& table, const std::filesystem::path& path,
                         const std::string& title) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << render_dashboard_svg(table, title);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace autohedge

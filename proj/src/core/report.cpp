#include "core/report.hpp"

#include "core/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

namespace wmspde {

std::string fmt17(double x) { return fmt::format("{:.17g}", x); }

std::string errors_csv(std::span<const ConvergenceReport> reports) {
  std::string out = "axis,gamma,resolution,path_seed,error\n";
  for (const auto& r : reports)
    for (const auto& e : r.levels) {
      if (e.is_reference) continue;
      for (std::size_t i = 0; i < e.path_errors.size(); ++i)
        out += fmt::format("{},{},{},{},{}\n", to_string(r.axis), fmt17(r.gamma), fmt17(e.resolution), r.seeds.at(i),
                           fmt17(e.path_errors[i]));
    }
  return out;
}

std::string means_csv(std::span<const ConvergenceReport> reports) {
  std::string out = "axis,gamma,level,time_steps,resolution,mean_error,saturated,reference\n";
  for (const auto& r : reports)
    for (const auto& e : r.levels)
      out += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(r.axis), fmt17(r.gamma), e.level, e.time_steps,
                         fmt17(e.resolution), fmt17(e.mean_error), e.saturated ? 1 : 0, e.is_reference ? 1 : 0);
  return out;
}

std::string summary_csv(std::span<const ConvergenceReport> reports) {
  std::string out = "axis,dim,gamma,paths,fitted_rate,theoretical_rate\n";
  for (const auto& r : reports)
    out += fmt::format("{},{},{},{},{},{}\n", to_string(r.axis), r.dim, fmt17(r.gamma), r.paths, fmt17(r.fitted_rate),
                       fmt17(r.theoretical_rate));
  return out;
}

std::string vector_dump(const Vector& v) {
  std::string out;
  out.reserve(static_cast<std::size_t>(v.size()) * 25);
  for (Index i = 0; i < v.size(); ++i) out += fmt::format("{:.17g}\n", v(i));
  return out;
}

namespace {

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (v > 0.0 && std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  bool empty() const { return !(lo <= hi); }
};

// Decade-aligned log10 bounds.
std::pair<int, int> decades(const Range& r) {
  if (r.empty()) return {-1, 0};
  int lo = static_cast<int>(std::floor(std::log10(r.lo)));
  int hi = static_cast<int>(std::ceil(std::log10(r.hi)));
  if (hi == lo) ++hi;
  return {lo, hi};
}

}  // namespace

std::string loglog_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       std::span<const PlotSeries> series, std::span<const ReferenceLine> lines) {
  constexpr double W = 640, H = 480, left = 80, right = 170, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  Range xr, yr;
  for (const auto& s : series) {
    for (double x : s.x) xr.add(x);
    for (double y : s.y) yr.add(y);
  }
  const auto [xd0, xd1] = decades(xr);
  for (const auto& l : lines)
    for (double x : {xr.lo, xr.hi})
      if (!xr.empty()) yr.add(l.anchor_y * std::pow(x / l.anchor_x, l.rate));
  const auto [yd0, yd1] = decades(yr);

  auto px = [&](double x) { return left + (std::log10(x) - xd0) / (xd1 - xd0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (std::log10(y) - yd0) / (yd1 - yd0)) * ph; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      W, H, W, H);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
  out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", left + pw / 2,
                     escape_xml(title));

  // Grid and tick labels at every decade.
  for (int d = xd0; d <= xd1; ++d) {
    const double x = px(std::pow(10.0, d));
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{}\" x2=\"{:.2f}\" y2=\"{}\" stroke=\"#ddd\"/>\n", x, top, x, top + ph);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">1e{}</text>\n", x, top + ph + 18, d);
  }
  for (int d = yd0; d <= yd1; ++d) {
    const double y = py(std::pow(10.0, d));
    out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", left, y, left + pw, y);
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">1e{}</text>\n", left - 6, y + 4, d);
  }
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left, top,
                     pw, ph);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2, H - 16,
                     escape_xml(xlabel));
  out += fmt::format("<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
                     top + ph / 2, top + ph / 2, escape_xml(ylabel));

  double legend_y = top + 10;
  auto legend = [&](const std::string& label, const std::string& color, bool dashed) {
    out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"{}/>\n",
                       left + pw + 12, legend_y, left + pw + 36, legend_y, color,
                       dashed ? " stroke-dasharray=\"6,4\"" : "");
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", left + pw + 42, legend_y + 4, escape_xml(label));
    legend_y += 18;
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (xr.empty()) break;
    const std::string color = kPalette[i % kPalette.size()];
    const double y0 = l.anchor_y * std::pow(xr.lo / l.anchor_x, l.rate);
    const double y1 = l.anchor_y * std::pow(xr.hi / l.anchor_x, l.rate);
    out += fmt::format(
        "<line class=\"reference\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
        "stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n",
        px(xr.lo), py(y0), px(xr.hi), py(y1), color);
    legend(l.label, color, true);
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color = kPalette[i % kPalette.size()];
    std::string points;
    for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
      if (!(s.x[j] > 0.0 && s.y[j] > 0.0)) continue;
      points += fmt::format("{:.2f},{:.2f} ", px(s.x[j]), py(s.y[j]));
      out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(s.x[j]), py(s.y[j]), color);
    }
    out += fmt::format("<polyline class=\"series\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       points, color);
    legend(s.label, color, false);
  }
  out += "</svg>\n";
  return out;
}

void convergence_plot_data(std::span<const ConvergenceReport> reports, std::vector<PlotSeries>& series,
                           std::vector<ReferenceLine>& lines) {
  for (const auto& r : reports) {
    PlotSeries s;
    s.label = fmt::format("gamma = {}", r.gamma);
    for (const auto& e : r.levels) {
      if (e.is_reference) continue;
      s.x.push_back(e.resolution);
      s.y.push_back(e.mean_error);
    }
    if (s.x.empty()) continue;
    ReferenceLine l;
    l.label = fmt::format("rate {}", r.theoretical_rate);
    l.rate = r.theoretical_rate;
    l.anchor_x = s.x.front();
    l.anchor_y = s.y.front();
    series.push_back(std::move(s));
    lines.push_back(l);
  }
}

std::string gnuplot_script(std::span<const ConvergenceReport> reports, const std::string& means_file) {
  std::string out;
  out += "set datafile separator ','\nset key autotitle columnhead\n";
  out += "set logscale xy\n";
  out += "set key outside right\n";
  out += "set xlabel 'resolution'\nset ylabel 'relative error'\n";
  std::string plot = "plot ";
  int index = 0;
  for (const auto& r : reports) {
    const LadderEntry* anchor = nullptr;
    for (const auto& e : r.levels)
      if (!e.is_reference) {
        anchor = &e;
        break;
      }
    if (!anchor) continue;
    const int lt = index + 1;
    out += fmt::format("r{} = {}\nx{} = {}\ny{} = {}\n", index, fmt17(r.theoretical_rate), index,
                       fmt17(anchor->resolution), index, fmt17(anchor->mean_error));
    if (index > 0) plot += ", \\\n     ";
    plot += fmt::format(
        "'{}' using ($8 == 0 && abs($2 - {}) < 1e-12 ? $5 : 1/0):6 with linespoints lt {} title 'gamma = {}', "
        "y{} * (x / x{})**r{} with lines lt {} dt 2 title 'rate {}'",
        means_file, fmt17(r.gamma), lt, r.gamma, index, index, index, lt, r.theoretical_rate);
    ++index;
  }
  out += plot + "\n";
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::io, fmt::format("cannot open '{}' for writing", path.string()));
  out << content;
  out.flush();
  require(static_cast<bool>(out), ErrorCode::io, fmt::format("write to '{}' failed", path.string()));
}

}  // namespace wmspde

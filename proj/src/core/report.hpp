#pragma once

#include "core/error_harness.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wmspde {

/// Shortest text that round-trips a double (17 significant digits).
std::string fmt17(double x);

/// axis,gamma,resolution,path_seed,error, one row per (study, level, path).
std::string errors_csv(std::span<const ConvergenceReport> reports);
/// axis,gamma,level,time_steps,resolution,mean_error,saturated,reference
std::string means_csv(std::span<const ConvergenceReport> reports);
/// axis,dim,gamma,paths,fitted_rate,theoretical_rate
std::string summary_csv(std::span<const ConvergenceReport> reports);

/// One value per line.
std::string vector_dump(const Vector& v);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Dashed line y = anchor_y (x / anchor_x)^rate across the plotted x range.
struct ReferenceLine {
  std::string label;
  double rate = 1.0;
  double anchor_x = 1.0;
  double anchor_y = 1.0;
};

std::string loglog_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       std::span<const PlotSeries> series, std::span<const ReferenceLine> lines);

/// Series and dashed theoretical lines for a set of studies on one axis.
void convergence_plot_data(std::span<const ConvergenceReport> reports, std::vector<PlotSeries>& series,
                           std::vector<ReferenceLine>& lines);

/// Gnuplot script reading means.csv next to it.
std::string gnuplot_script(std::span<const ConvergenceReport> reports, const std::string& means_file);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace wmspde

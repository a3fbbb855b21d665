#include "core/error.hpp"
#include "core/experiments.hpp"
#include "core/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wmspde;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("wmspde_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(RunConfig, Defaults) {
  const auto c = parse_run_config("{}");
  EXPECT_EQ(c.scheme.dim, 1);
  EXPECT_EQ(c.gammas, (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(c.study.ladder, (std::vector<int>{2, 3, 4, 5, 6}));
  EXPECT_EQ(c.study.reference.level, 9);
  EXPECT_EQ(c.study.reference.time_log2, 14);
  EXPECT_EQ(c.study.paths, 4);
  EXPECT_EQ(c.scheme.master_seed, 1u);
  const auto d2 = parse_run_config(R"({"dim": 2})");
  EXPECT_EQ(d2.gammas, (std::vector<double>{0.5}));
  EXPECT_EQ(d2.study.reference.level, 6);
  EXPECT_EQ(d2.study.ladder, (std::vector<int>{2, 3, 4}));
  const auto t = parse_run_config(R"({"study": {"axis": "time"}})");
  EXPECT_EQ(t.study.ladder, (std::vector<int>{4, 5, 6, 7, 8, 9}));
}

TEST(RunConfig, RoundTrip) {
  const auto c = parse_run_config(R"({"gamma": 0.5, "k": 0.25, "master_seed": 99, "study": {"paths": 3}})");
  const auto again = parse_run_config(run_config_json(c));
  EXPECT_EQ(run_config_json(c), run_config_json(again));
  EXPECT_EQ(again.scheme.master_seed, 99u);
  EXPECT_DOUBLE_EQ(again.scheme.k, 0.25);
}

TEST(RunConfig, Rejections) {
  auto code_of = [](const std::string& text) {
    try {
      parse_run_config(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ok;
  };
  EXPECT_EQ(code_of("not json"), ErrorCode::config);
  EXPECT_EQ(code_of(R"({"gama": 0.5})"), ErrorCode::config);
  EXPECT_EQ(code_of(R"({"dim": 2, "gamma": 0.0})"), ErrorCode::config);
  EXPECT_EQ(code_of(R"({"gamma": 1.5})"), ErrorCode::config);
  EXPECT_EQ(code_of(R"({"dim": 2, "study": {"reference": {"level": 9}}})"), ErrorCode::config);
  EXPECT_EQ(code_of(R"({"study": {"ladder": [2, 20]}})"), ErrorCode::config);
  EXPECT_EQ(code_of(R"({"mode": "sideways"})"), ErrorCode::config);
  EXPECT_EQ(code_of(R"({"study": {"axis": "diagonal"}})"), ErrorCode::config);
  EXPECT_EQ(code_of(R"({"initial": [1, 2]})"), ErrorCode::config);
}

TEST(RunConfig, Overrides) {
  auto c = parse_run_config("{}");
  Overrides o;
  o.seed = 5;
  o.workers = 3;
  o.out = "elsewhere";
  apply_overrides(c, o);
  EXPECT_EQ(c.scheme.master_seed, 5u);
  EXPECT_EQ(c.workers, 3);
  EXPECT_EQ(c.output_dir, "elsewhere");
  o.workers = 0;
  EXPECT_THROW(apply_overrides(c, o), Error);
}

TEST(ExitStatus, Policy) {
  EXPECT_EQ(exit_status(ErrorCode::ok), 0);
  EXPECT_EQ(exit_status(ErrorCode::config), 1);
  EXPECT_EQ(exit_status(ErrorCode::check_failed), 1);
  EXPECT_EQ(exit_status(ErrorCode::numerical), 2);
  EXPECT_EQ(exit_status(ErrorCode::factorization), 2);
  EXPECT_EQ(exit_status(ErrorCode::statistical_alarm), 3);
}

TEST(Commands, DryRunDoesNothing) {
  auto c = parse_run_config("{}");
  c.output_dir = scratch("dry").string();
  const auto out = run_command("convergence", c, true);
  EXPECT_EQ(out.code, ErrorCode::ok);
  EXPECT_NE(out.report.find("\"master_seed\": 1"), std::string::npos);
  EXPECT_FALSE(fs::exists(c.output_dir));
}

TEST(Commands, UnknownCommand) {
  EXPECT_EQ(run_command("frobnicate", parse_run_config("{}"), false).code, ErrorCode::config);
}

TEST(Commands, AssembleCheckAndCorruption) {
  auto c = parse_run_config(R"({"assemble": {"levels": [2]}})");
  c.output_dir = scratch("assemble").string();
  const auto ok = run_command("assemble-check", c, false);
  EXPECT_EQ(ok.code, ErrorCode::ok) << ok.report;
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "mass_d1_l2.txt"));
  const auto triplets = slurp(fs::path(c.output_dir) / "mass_d1_l2.txt");
  EXPECT_NE(triplets.find("0 0 0.083333333333333329"), std::string::npos);
  c.corrupt_matrix = true;
  const auto bad = run_command("assemble-check", c, false);
  EXPECT_EQ(bad.code, ErrorCode::check_failed);
  EXPECT_NE(bad.report.find("diff mass(0, 0)"), std::string::npos);
}

TEST(Commands, SimulateDumps) {
  auto c = parse_run_config(R"({"gamma": 0.5, "space_level": 3, "time_steps": 8, "simulate": {"snapshots_log2": 2}})");
  c.output_dir = scratch("simulate").string();
  const auto out = run_command("simulate", c, false);
  ASSERT_EQ(out.code, ErrorCode::ok) << out.report;
  const auto state = slurp(fs::path(c.output_dir) / "final_state.txt");
  EXPECT_EQ(std::count(state.begin(), state.end(), '\n'), 9);
  for (const char* f : {"mesh.json", "quadrature.json", "driver.json", "manifest.json", "snapshots.txt"})
    EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / f)) << f;
  // 17 significant digits round-trip
  std::istringstream in(state);
  double first = 0;
  in >> first;
  std::string line = state.substr(0, state.find('\n'));
  EXPECT_EQ(fmt17(first), line);
}

TEST(Commands, ConvergenceArtifactsAndDeterminism) {
  const std::string cfg =
      R"({"gamma": [0.25, 0.75], "study": {"ladder": [1, 2, 3], "reference": {"level": 5, "time_log2": 6}, "paths": 2}})";
  auto a = parse_run_config(cfg), b = parse_run_config(cfg);
  a.output_dir = scratch("conv_a").string();
  b.output_dir = scratch("conv_b").string();
  b.workers = 2;
  ASSERT_EQ(run_command("convergence", a, false).code, ErrorCode::ok);
  ASSERT_EQ(run_command("convergence", b, false).code, ErrorCode::ok);
  for (const char* f : {"errors.csv", "means.csv", "summary.csv", "convergence.svg", "convergence.gp"})
    EXPECT_EQ(slurp(fs::path(a.output_dir) / f), slurp(fs::path(b.output_dir) / f)) << f;
  const auto errors = slurp(fs::path(a.output_dir) / "errors.csv");
  EXPECT_EQ(errors.substr(0, errors.find('\n')), "axis,gamma,resolution,path_seed,error");
  EXPECT_EQ(std::count(errors.begin(), errors.end(), '\n'), 1 + 2 * 3 * 2);
  const auto svg = slurp(fs::path(a.output_dir) / "convergence.svg");
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(svg.find("rate 1"), std::string::npos);
  EXPECT_NE(svg.find("rate 2"), std::string::npos);
  const auto manifest = slurp(fs::path(a.output_dir) / "manifest.json");
  EXPECT_NE(manifest.find("path_seeds"), std::string::npos);
  EXPECT_NE(manifest.find("wall_seconds"), std::string::npos);
}

TEST(Commands, VerifyReducedPathsSuppresses) {
  auto c = parse_run_config(R"({"verify": {"paths": 100, "steps": 8}, "holder": {"seeds": 2}})");
  c.output_dir = scratch("verify").string();
  const auto out = run_command("verify", c, false);
  EXPECT_EQ(out.code, ErrorCode::ok);
  EXPECT_NE(out.report.find("warning"), std::string::npos);
  const auto csv = slurp(fs::path(c.output_dir) / "verify.csv");
  EXPECT_NE(csv.find("suppressed"), std::string::npos);
  EXPECT_EQ(csv.find(",1\n"), std::string::npos);
}

TEST(Report, SvgFromScratch) {
  std::vector<PlotSeries> s = {{"a", {0.5, 0.25, 0.125}, {1e-1, 2.5e-2, 6.25e-3}}};
  std::vector<ReferenceLine> l = {{"rate 2", 2.0, 0.5, 1e-1}};
  const auto svg = loglog_svg("t", "h", "e", s, l);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("class=\"reference\""), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Report, CsvFormatting) {
  ConvergenceReport r;
  r.axis = Axis::time;
  r.gamma = 0.75;
  r.paths = 1;
  r.seeds = {42};
  r.theoretical_rate = 1;
  r.fitted_rate = 0.9;
  LadderEntry e;
  e.resolution = 0.0625;
  e.path_errors = {0.1};
  e.mean_error = 0.1;
  r.levels = {e};
  const std::vector<ConvergenceReport> rs = {r};
  EXPECT_EQ(errors_csv(rs), "axis,gamma,resolution,path_seed,error\ntime,0.75,0.0625,42,0.10000000000000001\n");
  EXPECT_EQ(summary_csv(rs), "axis,dim,gamma,paths,fitted_rate,theoretical_rate\ntime,1,0.75,1,0.90000000000000002,1\n");
}

#include "core/experiments.hpp"

#include "core/fem_oracle.hpp"
#include "core/frac_quad.hpp"
#include "core/keyed_rng.hpp"
#include "core/l0_analysis.hpp"
#include "core/report.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

namespace wmspde {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

const char* to_string(StepMode mode) { return mode == StepMode::per_step ? "per_step" : "final_time"; }

StepMode parse_mode(const std::string& text) {
  if (text == "per_step") return StepMode::per_step;
  if (text == "final_time") return StepMode::final_time;
  fail(ErrorCode::config, fmt::format("unknown mode '{}' (per_step | final_time)", text));
}

// Rejects keys outside `allowed` so typos do not silently fall back to defaults.
void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  require(obj.is_object(), ErrorCode::config, fmt::format("{} must be a JSON object", where));
  std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    require(names.count(key) > 0, ErrorCode::config, fmt::format("unknown key '{}' in {}", key, where));
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::config, fmt::format("bad value for '{}': {}", key, e.what()));
  }
}

void check_level(int dim, int level, const std::string& what) {
  const int guard = dim == 1 ? kMaxLevel1d : kMaxLevel2d;
  require(level >= 0 && level <= guard, ErrorCode::config,
          fmt::format("{} level {} outside [0, {}] for d = {}", what, level, guard, dim));
}

Reference default_reference(int dim) { return dim == 1 ? Reference{9, 14} : Reference{6, 12}; }

std::vector<int> default_ladder(const RunConfig& c) {
  if (c.study.axis == Axis::time) return {4, 5, 6, 7, 8, 9};
  return c.scheme.dim == 1 ? std::vector<int>{2, 3, 4, 5, 6} : std::vector<int>{2, 3, 4};
}

void validate(RunConfig& c) {
  require(!c.gammas.empty(), ErrorCode::config, "at least one gamma is required");
  for (double g : c.gammas) {
    SchemeConfig s = c.scheme;
    s.gamma = g;
    s.validate();
  }
  c.scheme.gamma = c.gammas.front();
  require(c.scheme.initial.size() == 0 || c.scheme.initial.size() == build_mesh(c.scheme.dim, c.scheme.space_level).vertex_count(),
          ErrorCode::config, "initial data must have one value per vertex of the space level");
  check_level(c.scheme.dim, c.study.reference.level, "reference");
  require(c.study.reference.time_log2 >= 0 && c.study.reference.time_log2 <= 24, ErrorCode::config,
          "reference time_log2 outside [0, 24]");
  for (int l : c.study.ladder) {
    if (c.study.axis == Axis::space) {
      check_level(c.scheme.dim, l, "ladder");
    } else {
      require(l >= 0 && l <= c.study.reference.time_log2, ErrorCode::config,
              fmt::format("time ladder entry {} outside [0, {}]", l, c.study.reference.time_log2));
    }
  }
  require(c.study.paths >= 1, ErrorCode::config, "study.paths must be positive");
  require(c.verify.paths >= 1, ErrorCode::config, "verify.paths must be positive");
  require(c.verify.steps >= 1, ErrorCode::config, "verify.steps must be positive");
  require(c.verify.seeds.size() >= 2, ErrorCode::config, "verify.seeds needs two seeds for the stability checks");
  for (double p : c.verify.p_values) require(p > 0.0, ErrorCode::config, "verify.p entries must be positive");
  for (int m : c.verify.sum_blocks) require(m >= 1, ErrorCode::config, "verify.sum_blocks entries must be positive");
  const auto& h = c.holder;
  check_level(1, h.level, "holder");
  require(gamma_admissible(h.gamma, 1), ErrorCode::config, "holder.gamma is not admissible in d = 1");
  require(h.m_max <= h.time_log2 && h.m_max - h.m_min + 1 >= 4 && h.m_min >= 0, ErrorCode::config,
          "holder: need m_min >= 0, m_max <= time_log2 and at least four levels");
  require(h.time_log2 <= 20, ErrorCode::config, "holder.time_log2 above 20");
  require(h.brownian_m_max - h.brownian_m_min + 1 >= 4 && h.brownian_m_min >= 0 && h.brownian_m_max <= 24,
          ErrorCode::config, "holder: Brownian levels need at least four levels within [0, 24]");
  require(h.seeds >= 1, ErrorCode::config, "holder.seeds must be positive");
  for (int l : c.assemble_levels) check_level(c.scheme.dim, l, "assemble");
  require(c.snapshots_log2 < 0 || (c.scheme.time_steps % (std::int64_t{1} << c.snapshots_log2) == 0),
          ErrorCode::config, "simulate.snapshots_log2 must divide the step count");
  require(c.workers >= 1, ErrorCode::config, "workers must be positive");
}

json scheme_json(const RunConfig& c) {
  json j;
  j["dim"] = c.scheme.dim;
  j["gamma"] = c.gammas;
  j["k"] = c.scheme.k;
  j["space_level"] = c.scheme.space_level;
  j["time_steps"] = c.scheme.time_steps;
  j["mode"] = to_string(c.scheme.mode);
  if (c.scheme.initial.size() == 0) {
    j["initial"] = "zero";
  } else {
    j["initial"] = std::vector<double>(c.scheme.initial.data(), c.scheme.initial.data() + c.scheme.initial.size());
  }
  j["master_seed"] = c.scheme.master_seed;
  j["n_modes"] = c.scheme.n_modes;
  j["study"] = {{"axis", to_string(c.study.axis)},
                {"ladder", c.study.ladder},
                {"reference", {{"level", c.study.reference.level}, {"time_log2", c.study.reference.time_log2}}},
                {"paths", c.study.paths},
                {"beta", c.study.beta}};
  j["verify"] = {{"paths", c.verify.paths},   {"p", c.verify.p_values},
                 {"steps", c.verify.steps},   {"seeds", c.verify.seeds},
                 {"sum_blocks", c.verify.sum_blocks}, {"holder_only", c.verify.holder_only}};
  const auto& h = c.holder;
  j["holder"] = {{"gamma", h.gamma},
                 {"level", h.level},
                 {"time_log2", h.time_log2},
                 {"m_min", h.m_min},
                 {"m_max", h.m_max},
                 {"seeds", h.seeds},
                 {"brownian_m_min", h.brownian_m_min},
                 {"brownian_m_max", h.brownian_m_max},
                 {"band", {h.lower, h.upper}},
                 {"brownian_band", {h.brownian_lower, h.brownian_upper}}};
  j["assemble"] = {{"levels", c.assemble_levels}};
  j["simulate"] = {{"snapshots_log2", c.snapshots_log2}};
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  return j;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); }
};

// Writes one artifact under the output directory and records it.
void emit(const RunConfig& c, CommandOutcome& out, const std::string& name, const std::string& content) {
  const fs::path path = fs::path(c.output_dir) / name;
  write_text_file(path, content);
  out.files.push_back(path.string());
}

void emit_manifest(const RunConfig& c, CommandOutcome& out, const std::string& command, const Clock& clock,
                   json extra = json::object()) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["config"] = scheme_json(c);
  m["master_seed"] = c.scheme.master_seed;
  m["stream_tags"] = {{"wiener", static_cast<int>(StreamTag::wiener)},
                      {"scalar_driver", static_cast<int>(StreamTag::scalar_driver)},
                      {"l0_wiener", static_cast<int>(StreamTag::l0_wiener)},
                      {"l0_scale", static_cast<int>(StreamTag::l0_scale)}};
  m["status"] = to_string(out.code);
  m["wall_seconds"] = clock.seconds();
  for (auto& [key, value] : extra.items()) m[key] = value;
  std::vector<std::string> files = out.files;
  files.push_back((fs::path(c.output_dir) / "manifest.json").string());
  m["files"] = files;
  emit(c, out, "manifest.json", json_text(m));
}

CommandOutcome dry_run_outcome(const RunConfig& c, const std::string& command) {
  CommandOutcome out;
  out.report = fmt::format("dry run: {} with configuration\n{}", command, json_text(scheme_json(c)));
  return out;
}

struct Check {
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

Check band_check(std::string name, double value, double lower, double upper) {
  return {std::move(name), value, lower, upper, std::isfinite(value) && value >= lower && value <= upper};
}

std::string checks_csv(const std::vector<Check>& checks, bool suppressed) {
  std::string out = "check,value,lower,upper,pass\n";
  for (const auto& c : checks)
    out += fmt::format("{},{},{},{},{}\n", c.name, fmt17(c.value), fmt17(c.lower), fmt17(c.upper),
                       suppressed ? "suppressed" : (c.pass ? "1" : "0"));
  return out;
}

double relative_spread(double a, double b) {
  const double mean = 0.5 * (a + b);
  return mean > 0.0 ? std::abs(a - b) / mean : 0.0;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.scheme.dim = 1;
  c.scheme.master_seed = 1;
  c.scheme.space_level = 4;
  c.scheme.time_steps = 16;
  c.gammas = {0.25, 0.75};
  c.study.reference = default_reference(1);
  c.study.ladder = default_ladder(c);
  c.assemble_levels = {1, 2, 3};
  validate(c);
  return c;
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::config, fmt::format("configuration is not valid JSON: {}", e.what()));
  }
  check_keys(j,
             {"dim", "gamma", "k", "space_level", "time_steps", "mode", "initial", "master_seed", "n_modes", "study",
              "verify", "holder", "assemble", "simulate", "output_dir", "workers", "test_mode"},
             "configuration");
  RunConfig c;
  c.scheme.master_seed = 1;
  read(j, "dim", c.scheme.dim);
  require(c.scheme.dim == 1 || c.scheme.dim == 2, ErrorCode::config, "dim must be 1 or 2");
  if (j.contains("gamma")) {
    if (j["gamma"].is_array()) {
      read(j, "gamma", c.gammas);
    } else {
      double g = 0.0;
      read(j, "gamma", g);
      c.gammas = {g};
    }
  } else {
    c.gammas = c.scheme.dim == 1 ? std::vector<double>{0.25, 0.75} : std::vector<double>{0.5};
  }
  read(j, "k", c.scheme.k);
  read(j, "space_level", c.scheme.space_level);
  read(j, "time_steps", c.scheme.time_steps);
  if (j.contains("mode")) {
    std::string mode;
    read(j, "mode", mode);
    c.scheme.mode = parse_mode(mode);
  }
  if (j.contains("initial")) {
    if (j["initial"].is_string()) {
      require(j["initial"] == "zero", ErrorCode::config, "initial must be \"zero\" or an array of nodal values");
    } else {
      std::vector<double> values;
      read(j, "initial", values);
      c.scheme.initial = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
    }
  }
  read(j, "master_seed", c.scheme.master_seed);
  read(j, "n_modes", c.scheme.n_modes);

  c.study.reference = default_reference(c.scheme.dim);
  bool ladder_given = false;
  if (j.contains("study")) {
    const json& s = j["study"];
    check_keys(s, {"axis", "ladder", "reference", "paths", "beta"}, "study");
    if (s.contains("axis")) {
      std::string axis;
      read(s, "axis", axis);
      try {
        c.study.axis = parse_axis(axis);
      } catch (const Error& e) {
        fail(ErrorCode::config, e.what());
      }
    }
    ladder_given = s.contains("ladder");
    read(s, "ladder", c.study.ladder);
    if (s.contains("reference")) {
      check_keys(s["reference"], {"level", "time_log2"}, "study.reference");
      read(s["reference"], "level", c.study.reference.level);
      read(s["reference"], "time_log2", c.study.reference.time_log2);
    }
    read(s, "paths", c.study.paths);
    read(s, "beta", c.study.beta);
  }
  if (!ladder_given) c.study.ladder = default_ladder(c);

  if (j.contains("verify")) {
    const json& v = j["verify"];
    check_keys(v, {"paths", "p", "steps", "seeds", "sum_blocks", "holder_only"}, "verify");
    read(v, "paths", c.verify.paths);
    read(v, "p", c.verify.p_values);
    read(v, "steps", c.verify.steps);
    read(v, "seeds", c.verify.seeds);
    read(v, "sum_blocks", c.verify.sum_blocks);
    read(v, "holder_only", c.verify.holder_only);
  }
  if (j.contains("holder")) {
    const json& h = j["holder"];
    check_keys(h, {"gamma", "level", "time_log2", "m_min", "m_max", "seeds", "brownian_m_min", "brownian_m_max", "band",
                   "brownian_band"},
               "holder");
    read(h, "gamma", c.holder.gamma);
    read(h, "level", c.holder.level);
    read(h, "time_log2", c.holder.time_log2);
    read(h, "m_min", c.holder.m_min);
    read(h, "m_max", c.holder.m_max);
    read(h, "seeds", c.holder.seeds);
    read(h, "brownian_m_min", c.holder.brownian_m_min);
    read(h, "brownian_m_max", c.holder.brownian_m_max);
    std::vector<double> band;
    read(h, "band", band);
    if (!band.empty()) {
      require(band.size() == 2, ErrorCode::config, "holder.band needs [lower, upper]");
      c.holder.lower = band[0];
      c.holder.upper = band[1];
    }
    band.clear();
    read(h, "brownian_band", band);
    if (!band.empty()) {
      require(band.size() == 2, ErrorCode::config, "holder.brownian_band needs [lower, upper]");
      c.holder.brownian_lower = band[0];
      c.holder.brownian_upper = band[1];
    }
  }
  c.assemble_levels = {1, 2, 3};
  if (j.contains("assemble")) {
    check_keys(j["assemble"], {"levels"}, "assemble");
    read(j["assemble"], "levels", c.assemble_levels);
  }
  if (j.contains("simulate")) {
    check_keys(j["simulate"], {"snapshots_log2"}, "simulate");
    read(j["simulate"], "snapshots_log2", c.snapshots_log2);
  }
  read(j, "output_dir", c.output_dir);
  read(j, "workers", c.workers);
  if (j.contains("test_mode")) {
    check_keys(j["test_mode"], {"corrupt_matrix"}, "test_mode");
    read(j["test_mode"], "corrupt_matrix", c.corrupt_matrix);
  }
  validate(c);
  return c;
}

std::string run_config_json(const RunConfig& config) { return json_text(scheme_json(config)); }

void apply_overrides(RunConfig& config, const Overrides& overrides) {
  if (overrides.seed) config.scheme.master_seed = *overrides.seed;
  if (overrides.workers) config.workers = *overrides.workers;
  if (overrides.out) config.output_dir = *overrides.out;
  validate(config);
}

CommandOutcome cmd_assemble_check(const RunConfig& c, bool dry_run) {
  if (dry_run) return dry_run_outcome(c, "assemble-check");
  Clock clock;
  CommandOutcome out;
  bool pass = true;
  const std::vector<int> levels = c.assemble_levels.empty() ? std::vector<int>{1, 2, 3} : c.assemble_levels;
  json per_level = json::array();
  for (int level : levels) {
    const DyadicMesh mesh = build_mesh(c.scheme.dim, level);
    FemOperators ops(mesh);
    if (c.corrupt_matrix) {
      SparseMatrix m = ops.mass();
      m.coeffRef(0, 0) += 1e-6 * m.coeffRef(0, 0);
      ops = FemOperators(mesh.dim, mesh.level, std::move(m), ops.stiffness());
    }
    const AssemblyReport r = check_assembly(mesh, ops);
    pass = pass && r.pass;
    out.report += r.to_text();
    per_level.push_back({{"level", level}, {"pass", r.pass}, {"diffs", r.diffs.size()}});
    const std::string tag = fmt::format("d{}_l{}", mesh.dim, level);
    emit(c, out, fmt::format("mass_{}.txt", tag), to_triplets(ops.mass()));
    emit(c, out, fmt::format("stiffness_{}.txt", tag), to_triplets(ops.stiffness()));
    emit(c, out, fmt::format("mesh_{}.json", tag), mesh_summary_json(mesh));
  }
  if (!pass) out.code = ErrorCode::check_failed;
  out.report += fmt::format("assemble-check: {}\n", pass ? "PASS" : "FAIL");
  emit(c, out, "assemble_check.txt", out.report);
  emit_manifest(c, out, "assemble-check", clock, {{"levels", per_level}});
  return out;
}

CommandOutcome cmd_convergence(const RunConfig& c, bool dry_run) {
  if (dry_run) return dry_run_outcome(c, "convergence");
  Clock clock;
  CommandOutcome out;
  OperatorCache cache;
  std::vector<ConvergenceReport> reports;
  json timings = json::array();

  auto flush = [&] {
    emit(c, out, "errors.csv", errors_csv(reports));
    emit(c, out, "means.csv", means_csv(reports));
    emit(c, out, "summary.csv", summary_csv(reports));
    std::vector<PlotSeries> series;
    std::vector<ReferenceLine> lines;
    convergence_plot_data(reports, series, lines);
    const bool space = c.study.axis == Axis::space;
    emit(c, out, "convergence.svg",
         loglog_svg(fmt::format("{} convergence, d = {}", space ? "spatial" : "temporal", c.scheme.dim),
                    space ? "h" : "dt", "relative error at t = 1", series, lines));
    emit(c, out, "convergence.gp", gnuplot_script(reports, "means.csv"));
  };

  try {
    for (double gamma : c.gammas) {
      SchemeConfig base = c.scheme;
      base.gamma = gamma;
      base.space_level = c.study.reference.level;
      base.time_steps = std::int64_t{1} << c.study.reference.time_log2;
      Clock t;
      reports.push_back(convergence_study(base, c.study.axis, c.study.ladder, c.study.reference, c.study.paths, cache,
                                          c.workers, c.study.beta));
      const auto& r = reports.back();
      timings.push_back({{"gamma", gamma}, {"seconds", t.seconds()}});
      out.report += fmt::format("{} d={} gamma={}: fitted rate {:.3f}, theoretical {:.3f} ({} paths)\n",
                                to_string(r.axis), r.dim, gamma, r.fitted_rate, r.theoretical_rate, r.paths);
    }
  } catch (const Error& e) {
    out.code = e.code();
    out.report += fmt::format("error: {}\n", e.what());
    flush();
    emit_manifest(c, out, "convergence", clock, {{"timings", timings}, {"partial", true}});
    return out;
  }
  flush();
  json seeds = json::array();
  if (!reports.empty()) seeds = reports.front().seeds;
  emit_manifest(c, out, "convergence", clock, {{"timings", timings}, {"path_seeds", seeds}});
  return out;
}

HolderSummary holder_suite(const RunConfig& c) {
  const auto& h = c.holder;
  HolderSummary s;
  s.csv = "kind,seed,m,max_increment\n";
  OperatorCache cache;
  const std::int64_t steps = std::int64_t{1} << h.time_log2;
  SchemeConfig scheme = c.scheme;
  scheme.dim = 1;
  scheme.gamma = h.gamma;
  scheme.space_level = h.level;
  scheme.time_steps = steps;
  scheme.initial = Vector();
  scheme.validate();
  const Discretization disc = cache.discretization(1, h.level, steps, scheme.gamma, scheme.k);
  const auto& mass = disc.ops().mass();
  const auto m_norm = [&mass](const Vector& v) { return mass_norm(mass, v); };

  for (int i = 0; i < h.seeds; ++i) {
    const std::uint64_t seed = path_seed(c.scheme.master_seed, i);
    const NoiseStream stream(seed, h.level, steps, disc.ops().size());
    const ScalarDriver driver(seed, scheme.n_modes);
    EvolveTarget target;
    target.disc = &disc;
    target.mode = scheme.mode;
    target.snapshot_log2 = h.m_max;
    const auto result = evolve_coupled(stream, disc.ops().mass_factor(), driver, std::span(&target, 1));
    const auto est = holder_exponent(result.front().snapshots, h.m_min, h.m_max, m_norm);
    require(!est.degenerate, ErrorCode::numerical, "holder: SPDE trajectory has a vanishing dyadic increment");
    s.spde_exponents.push_back(est.exponent);
    for (std::size_t j = 0; j < est.levels.size(); ++j)
      s.csv += fmt::format("spde,{},{},{}\n", seed, est.levels[j], fmt17(est.max_increments[j]));

    const auto bm = brownian_path(seed, h.brownian_m_max);
    const auto bm_est = holder_exponent(bm, h.brownian_m_min, h.brownian_m_max);
    s.brownian_exponents.push_back(bm_est.exponent);
    for (std::size_t j = 0; j < bm_est.levels.size(); ++j)
      s.csv += fmt::format("brownian,{},{},{}\n", seed, bm_est.levels[j], fmt17(bm_est.max_increments[j]));
  }
  for (double e : s.spde_exponents) s.spde_mean += e / h.seeds;
  for (double e : s.brownian_exponents) s.brownian_mean += e / h.seeds;
  return s;
}

CommandOutcome cmd_holder(const RunConfig& c, bool dry_run) {
  if (dry_run) return dry_run_outcome(c, "holder");
  Clock clock;
  CommandOutcome out;
  const auto s = holder_suite(c);
  const auto& h = c.holder;
  const std::vector<Check> checks = {
      band_check("holder_spde_mean", s.spde_mean, h.lower, h.upper),
      band_check("holder_brownian_mean", s.brownian_mean, h.brownian_lower, h.brownian_upper)};
  bool pass = true;
  for (const auto& chk : checks) {
    pass = pass && chk.pass;
    out.report += fmt::format("{:<24} {:.4f} in [{}, {}]: {}\n", chk.name, chk.value, chk.lower, chk.upper,
                              chk.pass ? "PASS" : "FAIL");
  }
  if (!pass) out.code = ErrorCode::statistical_alarm;
  emit(c, out, "holder.csv", s.csv);
  emit(c, out, "holder_summary.csv", checks_csv(checks, false));
  emit_manifest(c, out, "holder", clock);
  return out;
}

CommandOutcome cmd_verify(const RunConfig& c, bool dry_run) {
  if (c.verify.holder_only) return cmd_holder(c, dry_run);
  if (dry_run) return dry_run_outcome(c, "verify");
  Clock clock;
  CommandOutcome out;
  const auto& v = c.verify;
  const bool suppressed = v.paths < kMinVerifyPaths;
  if (suppressed)
    out.report += fmt::format("warning: {} paths is below {}; statistical power is too low, pass/fail suppressed\n",
                              v.paths, kMinVerifyPaths);
  std::vector<Check> checks;
  std::string alarms;

  // d_p metric: identity, saturation, triangle inequality, convergence in probability.
  {
    const std::vector<double> zeros(16, 0.0), big(16, 2.0);
    checks.push_back(band_check("dp_identity", dp_metric(zeros, 2.0), 0.0, 0.0));
    checks.push_back(band_check("dp_saturation", dp_metric(big, 2.0), 1.0, 1.0));
    const KeyedNormal normal(mix_seed(c.scheme.master_seed, 7), StreamTag::l0_scale);
    for (double p : {1.0, 2.0}) {
      double worst = -std::numeric_limits<double>::infinity();
      for (std::uint64_t t = 0; t < 100; ++t) {
        std::vector<double> xy, yz, xz;
        for (std::uint64_t i = 0; i < 256; ++i) {
          const double x = normal(t, 3 * i), y = normal(t, 3 * i + 1), z = normal(t, 3 * i + 2);
          xy.push_back(std::abs(x - y));
          yz.push_back(std::abs(y - z));
          xz.push_back(std::abs(x - z));
        }
        worst = std::max(worst, dp_metric(xz, p) - dp_metric(xy, p) - dp_metric(yz, p));
      }
      checks.push_back(band_check(fmt::format("dp_triangle_p{}", p), worst, -1e300, 1e-12));
    }
    std::vector<double> dps;
    for (int n : {1, 10, 100}) {
      std::vector<double> s;
      for (std::uint64_t i = 0; i < 10000; ++i) s.push_back(std::abs(normal(1000, i)) / n);
      dps.push_back(dp_metric(s, 1.0));
    }
    checks.push_back(band_check("dp_convergence_in_probability", (dps[1] < dps[0] && dps[2] < dps[1]) ? 1.0 : 0.0, 1.0, 1.0));
  }

  // Ito isometry for Phi = I on one interval.
  {
    ElementaryIntegrand phi;
    phi.steps = 1;
    const auto iso = ito_isometry_check(phi, v.paths, v.seeds[0]);
    checks.push_back(band_check("ito_isometry_relative_error", iso.relative_error, 0.0, 0.03));
  }

  // BDG ratio: zero integrand, then every family at every p on two seeds.
  {
    ElementaryIntegrand zero;
    zero.scale = 0.0;
    zero.steps = v.steps;
    checks.push_back(band_check("bdg_zero_integrand", bdg_ratio(zero, 2.0, std::max(v.paths, 1), v.seeds[0]).ratio, 0.0, 0.0));
    for (auto family : {IntegrandFamily::deterministic_const, IntegrandFamily::wiener_functional,
                        IntegrandFamily::heavy_tailed_scale}) {
      ElementaryIntegrand phi;
      phi.family = family;
      phi.steps = v.steps;
      for (double p : v.p_values) {
        const auto a = bdg_ratio(phi, p, v.paths, v.seeds[0]);
        const auto b = bdg_ratio(phi, p, v.paths, v.seeds[1]);
        const std::string name = fmt::format("bdg_{}_p{}", to_string(family), p);
        for (const auto* e : {&a, &b})
          if (e->alarm) alarms += fmt::format("{}: RHS estimate 0 with LHS {} after {} paths\n", name, e->lhs, e->paths);
        checks.push_back(band_check(name + "_ratio", a.ratio, 0.0, std::numeric_limits<double>::max()));
        checks.push_back(band_check(name + "_seed_spread", relative_spread(a.ratio, b.ratio), 0.0, 0.10));
      }
    }
  }

  // Summed version: one term against bdg_ratio at p = 2, stability in the
  // number of independent blocks, and the all-zero list. The blocks are
  // scaled so that 16 of them stay clear of the truncation at 1.
  {
    ElementaryIntegrand phi;
    phi.steps = v.steps;
    phi.scale = 0.1;
    const auto single = bdg_sum_ratio(std::span(&phi, 1), 2.0, v.paths, v.seeds[0]);
    const auto plain = bdg_ratio(phi, 2.0, v.paths, v.seeds[0]);
    checks.push_back(band_check("bdg_sum_single_vs_ratio_p2", std::abs(single.ratio - plain.ratio), 0.0, 1e-12));
    std::vector<double> ratios;
    for (int m : v.sum_blocks) {
      std::vector<ElementaryIntegrand> phis(static_cast<std::size_t>(m), phi);
      for (int i = 0; i < m; ++i) phis[static_cast<std::size_t>(i)].block = i;
      const auto r = bdg_sum_ratio(phis, 2.0, v.paths, v.seeds[0]);
      if (r.alarm) alarms += fmt::format("bdg_sum m={}: RHS estimate 0 with LHS {}\n", m, r.lhs);
      ratios.push_back(r.ratio);
      checks.push_back(band_check(fmt::format("bdg_sum_m{}_ratio", m), r.ratio, 0.0, std::numeric_limits<double>::max()));
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    checks.push_back(band_check("bdg_sum_block_stability", *hi / *lo, 1.0, 1.5));
    ElementaryIntegrand zero = phi;
    zero.scale = 0.0;
    std::vector<ElementaryIntegrand> zeros(4, zero);
    checks.push_back(band_check("bdg_sum_zero_list", bdg_sum_ratio(zeros, 2.0, std::max(v.paths, 1), v.seeds[0]).ratio, 0.0, 0.0));
  }

  // Hoelder control on Brownian paths.
  {
    const auto& h = c.holder;
    double mean = 0.0;
    for (int i = 0; i < h.seeds; ++i) {
      const auto bm = brownian_path(path_seed(c.scheme.master_seed, i), h.brownian_m_max);
      mean += holder_exponent(bm, h.brownian_m_min, h.brownian_m_max).exponent / h.seeds;
    }
    checks.push_back(band_check("holder_brownian_mean", mean, h.brownian_lower, h.brownian_upper));
    std::vector<double> line(std::size_t{1} << 10 | 1);
    for (std::size_t i = 0; i < line.size(); ++i) line[i] = static_cast<double>(i) / (line.size() - 1);
    checks.push_back(band_check("holder_linear_path", holder_exponent(line, 2, 10).exponent, 1.0 - 1e-12, 1.0 + 1e-12));
  }

  bool pass = true;
  for (const auto& chk : checks) {
    pass = pass && chk.pass;
    out.report += fmt::format("{:<44} {:>12.6g}  [{}]\n", chk.name, chk.value,
                              suppressed ? "suppressed" : (chk.pass ? "PASS" : "FAIL"));
  }
  emit(c, out, "verify.csv", checks_csv(checks, suppressed));
  emit(c, out, "alarms.log", alarms);
  if (!alarms.empty()) {
    out.code = ErrorCode::statistical_alarm;
  } else if (!suppressed && !pass) {
    out.code = ErrorCode::statistical_alarm;
  }
  out.report += fmt::format("verify: {}\n", suppressed ? "SUPPRESSED" : (out.code == ErrorCode::ok ? "PASS" : "FAIL"));
  emit_manifest(c, out, "verify", clock, {{"suppressed", suppressed}});
  return out;
}

CommandOutcome cmd_simulate(const RunConfig& c, bool dry_run) {
  if (dry_run) return dry_run_outcome(c, "simulate");
  Clock clock;
  CommandOutcome out;
  OperatorCache cache;
  const SchemeConfig& s = c.scheme;
  const Discretization disc = cache.discretization(s.dim, s.space_level, s.time_steps, s.gamma, s.k);
  const std::uint64_t seed = path_seed(s.master_seed, 0);
  const NoiseStream stream(seed, s.space_level, s.time_steps, disc.ops().size());
  const ScalarDriver driver(seed, s.n_modes);
  EvolveTarget target;
  target.disc = &disc;
  target.mode = s.mode;
  target.initial = s.initial;
  target.snapshot_log2 = c.snapshots_log2;
  const auto result = evolve_coupled(stream, disc.ops().mass_factor(), driver, std::span(&target, 1)).front();

  emit(c, out, "final_state.txt", vector_dump(result.final.alpha));
  if (!result.snapshots.empty()) {
    std::string snaps;
    const double dt = std::ldexp(1.0, -c.snapshots_log2);
    for (std::size_t j = 0; j < result.snapshots.size(); ++j)
      snaps += fmt::format("# t = {}\n", fmt17(j * dt)) + vector_dump(result.snapshots[j]);
    emit(c, out, "snapshots.txt", snaps);
  }
  emit(c, out, "mesh.json", mesh_summary_json(disc.mesh()));
  emit(c, out, "quadrature.json", disc.quadrature().spec().to_json());
  emit(c, out, "driver.json", driver.to_json());
  const double norm = mass_norm(disc.ops().mass(), result.final.alpha);
  require(std::isfinite(norm), ErrorCode::numerical, "simulate: final state is not finite");
  out.report = fmt::format("simulate d={} gamma={} level={} N={}: ||u(1)||_M = {:.6e}\n", s.dim, s.gamma,
                           s.space_level, s.time_steps, norm);
  emit_manifest(c, out, "simulate", clock, {{"path_seed", seed}, {"final_mass_norm", norm}});
  return out;
}

CommandOutcome run_command(const std::string& name, const RunConfig& config, bool dry_run) {
  try {
    if (name == "assemble-check") return cmd_assemble_check(config, dry_run);
    if (name == "convergence") return cmd_convergence(config, dry_run);
    if (name == "verify") return cmd_verify(config, dry_run);
    if (name == "holder") return cmd_holder(config, dry_run);
    if (name == "simulate") return cmd_simulate(config, dry_run);
    fail(ErrorCode::config, fmt::format("unknown command '{}'", name));
  } catch (const Error& e) {
    return {e.code(), fmt::format("error ({}): {}\n", to_string(e.code()), e.what()), {}};
  } catch (const std::exception& e) {
    return {ErrorCode::internal, fmt::format("error (internal): {}\n", e.what()), {}};
  }
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok:
      return 0;
    case ErrorCode::domain:
    case ErrorCode::capacity:
    case ErrorCode::dimension_mismatch:
    case ErrorCode::io:
    case ErrorCode::config:
    case ErrorCode::check_failed:
      return 1;
    case ErrorCode::statistical_alarm:
      return 3;
    case ErrorCode::factorization:
    case ErrorCode::numerical:
    case ErrorCode::insufficient_data:
    case ErrorCode::degenerate_reference:
    case ErrorCode::internal:
      return 2;
  }
  return 2;
}

}  // namespace wmspde

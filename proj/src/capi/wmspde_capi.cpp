#include "wmspde/wmspde.h"

#include "core/experiments.hpp"
#include "core/fem_oracle.hpp"
#include "core/frac_quad.hpp"
#include "core/mesh_fem.hpp"
#include "core/scalar_driver.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

struct wmspde_mesh {
  wmspde::DyadicMesh mesh;
};

struct wmspde_fem {
  wmspde::FemOperators ops;
};

struct wmspde_quad {
  wmspde::QuadratureSpec spec;
};

struct wmspde_driver {
  wmspde::ScalarDriver driver;
};

struct wmspde_config {
  wmspde::RunConfig config;
};

namespace {

thread_local std::string last_error;

int set_error(int status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs f, translating exceptions into status codes.
template <class F>
int guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return WMSPDE_OK;
  } catch (const wmspde::Error& e) {
    return set_error(static_cast<int>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(WMSPDE_E_CAPACITY, "out of memory");
  } catch (const std::exception& e) {
    return set_error(WMSPDE_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(WMSPDE_E_INTERNAL, "unknown exception");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) wmspde::fail(wmspde::ErrorCode::domain, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* wmspde_version(void) { return "1.0.0"; }

const char* wmspde_last_error(void) { return last_error.c_str(); }

const char* wmspde_status_name(int status) {
  if (status < 0 || status > WMSPDE_E_INTERNAL) return "unknown";
  return wmspde::to_string(static_cast<wmspde::ErrorCode>(status));
}

int wmspde_exit_code(int status) {
  if (status < 0 || status > WMSPDE_E_INTERNAL) return 2;
  return wmspde::exit_status(static_cast<wmspde::ErrorCode>(status));
}

void wmspde_string_free(char* s) { std::free(s); }

int wmspde_mesh_create(int dim, int level, wmspde_mesh** out) {
  return guarded([&] {
    need(out, "out");
    *out = new wmspde_mesh{wmspde::build_mesh(dim, level)};
  });
}

void wmspde_mesh_destroy(wmspde_mesh* mesh) { delete mesh; }

int wmspde_mesh_info(const wmspde_mesh* mesh, int64_t* vertices, int64_t* cells, double* h) {
  return guarded([&] {
    need(mesh, "mesh");
    if (vertices) *vertices = mesh->mesh.vertex_count();
    if (cells) *cells = mesh->mesh.cell_count();
    if (h) *h = mesh->mesh.h;
  });
}

int wmspde_mesh_summary_json(const wmspde_mesh* mesh, char** out) {
  return guarded([&] {
    need(mesh, "mesh");
    need(out, "out");
    *out = copy_string(wmspde::mesh_summary_json(mesh->mesh));
  });
}

int wmspde_fem_assemble(const wmspde_mesh* mesh, wmspde_fem** out) {
  return guarded([&] {
    need(mesh, "mesh");
    need(out, "out");
    *out = new wmspde_fem{wmspde::FemOperators(mesh->mesh)};
  });
}

void wmspde_fem_destroy(wmspde_fem* fem) { delete fem; }

int wmspde_fem_size(const wmspde_fem* fem, int64_t* n) {
  return guarded([&] {
    need(fem, "fem");
    need(n, "n");
    *n = fem->ops.size();
  });
}

int wmspde_fem_triplets(const wmspde_fem* fem, int which, char** out) {
  return guarded([&] {
    need(fem, "fem");
    need(out, "out");
    switch (which) {
      case WMSPDE_MATRIX_MASS:
        *out = copy_string(wmspde::to_triplets(fem->ops.mass()));
        break;
      case WMSPDE_MATRIX_STIFFNESS:
        *out = copy_string(wmspde::to_triplets(fem->ops.stiffness()));
        break;
      case WMSPDE_MATRIX_A2:
        *out = copy_string(wmspde::to_triplets(fem->ops.a2_matrix()));
        break;
      default:
        wmspde::fail(wmspde::ErrorCode::domain, "unknown matrix selector");
    }
  });
}

int wmspde_fem_check(const wmspde_mesh* mesh, const wmspde_fem* fem, int* pass, char** report) {
  return guarded([&] {
    need(mesh, "mesh");
    need(fem, "fem");
    const auto r = wmspde::check_assembly(mesh->mesh, fem->ops);
    if (pass) *pass = r.pass ? 1 : 0;
    if (report) *report = copy_string(r.to_text());
  });
}

int wmspde_quad_create(double gamma, double k, wmspde_quad** out) {
  return guarded([&] {
    need(out, "out");
    *out = new wmspde_quad{wmspde::make_spec(gamma, k)};
  });
}

void wmspde_quad_destroy(wmspde_quad* quad) { delete quad; }

int wmspde_quad_scalar(const wmspde_quad* quad, double a, double* out) {
  return guarded([&] {
    need(quad, "quad");
    need(out, "out");
    *out = wmspde::scalar_qgamma(quad->spec, a);
  });
}

int wmspde_quad_spec_json(const wmspde_quad* quad, char** out) {
  return guarded([&] {
    need(quad, "quad");
    need(out, "out");
    *out = copy_string(quad->spec.to_json());
  });
}

int wmspde_quad_apply(const wmspde_quad* quad, const wmspde_fem* fem, const double* g, int64_t n, double* out) {
  return guarded([&] {
    need(quad, "quad");
    need(fem, "fem");
    need(g, "g");
    need(out, "out");
    if (n != fem->ops.size())
      wmspde::fail(wmspde::ErrorCode::dimension_mismatch, "load vector length does not match the mesh");
    const wmspde::Vector result =
        wmspde::apply_qgamma(quad->spec, fem->ops, Eigen::Map<const wmspde::Vector>(g, static_cast<Eigen::Index>(n)));
    std::memcpy(out, result.data(), static_cast<std::size_t>(n) * sizeof(double));
  });
}

int wmspde_driver_create(uint64_t seed, int n_modes, wmspde_driver** out) {
  return guarded([&] {
    need(out, "out");
    *out = new wmspde_driver{wmspde::ScalarDriver(seed, n_modes)};
  });
}

void wmspde_driver_destroy(wmspde_driver* driver) { delete driver; }

int wmspde_driver_eval(const wmspde_driver* driver, double t, double* f, double* b) {
  return guarded([&] {
    need(driver, "driver");
    if (f) *f = driver->driver.f(t);
    if (b) *b = driver->driver.b(t);
  });
}

int wmspde_driver_json(const wmspde_driver* driver, char** out) {
  return guarded([&] {
    need(driver, "driver");
    need(out, "out");
    *out = copy_string(driver->driver.to_json());
  });
}

int wmspde_config_load(const char* json_text, wmspde_config** out) {
  return guarded([&] {
    need(out, "out");
    auto cfg = std::make_unique<wmspde_config>();
    cfg->config = json_text ? wmspde::parse_run_config(json_text) : wmspde::default_run_config();
    *out = cfg.release();
  });
}

void wmspde_config_destroy(wmspde_config* config) { delete config; }

int wmspde_config_set_seed(wmspde_config* config, uint64_t seed) {
  return guarded([&] {
    need(config, "config");
    wmspde::Overrides o;
    o.seed = seed;
    wmspde::apply_overrides(config->config, o);
  });
}

int wmspde_config_set_workers(wmspde_config* config, int workers) {
  return guarded([&] {
    need(config, "config");
    wmspde::Overrides o;
    o.workers = workers;
    wmspde::RunConfig copy = config->config;
    wmspde::apply_overrides(copy, o);
    config->config = std::move(copy);
  });
}

int wmspde_config_set_output_dir(wmspde_config* config, const char* dir) {
  return guarded([&] {
    need(config, "config");
    need(dir, "dir");
    wmspde::Overrides o;
    o.out = std::string(dir);
    wmspde::apply_overrides(config->config, o);
  });
}

int wmspde_config_json(const wmspde_config* config, char** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = copy_string(wmspde::run_config_json(config->config));
  });
}

int wmspde_run(const char* command, const wmspde_config* config, int dry_run, char** report) {
  if (report) *report = nullptr;
  wmspde::CommandOutcome outcome;
  const int status = guarded([&] {
    need(command, "command");
    need(config, "config");
    outcome = wmspde::run_command(command, config->config, dry_run != 0);
    if (report) *report = copy_string(outcome.report);
  });
  if (status != WMSPDE_OK) return status;
  if (outcome.code != wmspde::ErrorCode::ok) {
    set_error(static_cast<int>(outcome.code), outcome.report);
    return static_cast<int>(outcome.code);
  }
  return WMSPDE_OK;
}

}  // extern "C"

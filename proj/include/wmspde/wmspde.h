/* C interface to the fractional-noise SPDE solver. All functions return a
 * status code (WMSPDE_OK on success); wmspde_last_error() holds the message of
 * the most recent failure on the calling thread. Strings handed out by the
 * library are released with wmspde_string_free(). */
#ifndef WMSPDE_WMSPDE_H
#define WMSPDE_WMSPDE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(WMSPDE_BUILDING_LIBRARY)
#    define WMSPDE_API __declspec(dllexport)
#  else
#    define WMSPDE_API __declspec(dllimport)
#  endif
#else
#  define WMSPDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  WMSPDE_OK = 0,
  WMSPDE_E_DOMAIN = 1,
  WMSPDE_E_CAPACITY = 2,
  WMSPDE_E_FACTORIZATION = 3,
  WMSPDE_E_NUMERICAL = 4,
  WMSPDE_E_INSUFFICIENT_DATA = 5,
  WMSPDE_E_DEGENERATE_REFERENCE = 6,
  WMSPDE_E_DIMENSION_MISMATCH = 7,
  WMSPDE_E_IO = 8,
  WMSPDE_E_CONFIG = 9,
  WMSPDE_E_STATISTICAL_ALARM = 10,
  WMSPDE_E_CHECK_FAILED = 11,
  WMSPDE_E_INTERNAL = 12
};

enum { WMSPDE_MATRIX_MASS = 0, WMSPDE_MATRIX_STIFFNESS = 1, WMSPDE_MATRIX_A2 = 2 };

typedef struct wmspde_mesh wmspde_mesh;
typedef struct wmspde_fem wmspde_fem;
typedef struct wmspde_quad wmspde_quad;
typedef struct wmspde_driver wmspde_driver;
typedef struct wmspde_config wmspde_config;

WMSPDE_API const char* wmspde_version(void);
WMSPDE_API const char* wmspde_last_error(void);
WMSPDE_API const char* wmspde_status_name(int status);
/* 0 success, 1 validation failure, 2 numerical failure, 3 statistical alarm */
WMSPDE_API int wmspde_exit_code(int status);
WMSPDE_API void wmspde_string_free(char* s);

/* dyadic meshes of (0,1)^dim */
WMSPDE_API int wmspde_mesh_create(int dim, int level, wmspde_mesh** out);
WMSPDE_API void wmspde_mesh_destroy(wmspde_mesh* mesh);
WMSPDE_API int wmspde_mesh_info(const wmspde_mesh* mesh, int64_t* vertices, int64_t* cells, double* h);
WMSPDE_API int wmspde_mesh_summary_json(const wmspde_mesh* mesh, char** out);

/* P1 mass, stiffness and K = M + T */
WMSPDE_API int wmspde_fem_assemble(const wmspde_mesh* mesh, wmspde_fem** out);
WMSPDE_API void wmspde_fem_destroy(wmspde_fem* fem);
WMSPDE_API int wmspde_fem_size(const wmspde_fem* fem, int64_t* n);
/* "row col value" lines, 17 significant digits */
WMSPDE_API int wmspde_fem_triplets(const wmspde_fem* fem, int which, char** out);
WMSPDE_API int wmspde_fem_check(const wmspde_mesh* mesh, const wmspde_fem* fem, int* pass, char** report);

/* sinc quadrature for the negative fractional power */
WMSPDE_API int wmspde_quad_create(double gamma, double k, wmspde_quad** out);
WMSPDE_API void wmspde_quad_destroy(wmspde_quad* quad);
WMSPDE_API int wmspde_quad_scalar(const wmspde_quad* quad, double a, double* out);
WMSPDE_API int wmspde_quad_spec_json(const wmspde_quad* quad, char** out);
/* out = Q(g) for a load vector g of length n on the fem's mesh */
WMSPDE_API int wmspde_quad_apply(const wmspde_quad* quad, const wmspde_fem* fem, const double* g, int64_t n,
                                 double* out);

/* scalar noise scale b = exp(f^2) */
WMSPDE_API int wmspde_driver_create(uint64_t seed, int n_modes, wmspde_driver** out);
WMSPDE_API void wmspde_driver_destroy(wmspde_driver* driver);
WMSPDE_API int wmspde_driver_eval(const wmspde_driver* driver, double t, double* f, double* b);
WMSPDE_API int wmspde_driver_json(const wmspde_driver* driver, char** out);

/* run configuration (JSON); json_text may be NULL for the defaults */
WMSPDE_API int wmspde_config_load(const char* json_text, wmspde_config** out);
WMSPDE_API void wmspde_config_destroy(wmspde_config* config);
WMSPDE_API int wmspde_config_set_seed(wmspde_config* config, uint64_t seed);
WMSPDE_API int wmspde_config_set_workers(wmspde_config* config, int workers);
WMSPDE_API int wmspde_config_set_output_dir(wmspde_config* config, const char* dir);
WMSPDE_API int wmspde_config_json(const wmspde_config* config, char** out);

/* command: assemble-check, convergence, verify, holder, simulate.
 * report (optional) receives the human-readable summary. */
WMSPDE_API int wmspde_run(const char* command, const wmspde_config* config, int dry_run, char** report);

#ifdef __cplusplus
}
#endif

#endif

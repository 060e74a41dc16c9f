/* C interface to the rstar library. Handles are opaque; every call returns an
 * rstar_status and leaves a message for rstar_last_error() on failure.
 * Strings returned through char** are owned by the caller: release them with
 * rstar_string_free. */
#ifndef RSTAR_H
#define RSTAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(RSTAR_BUILD)
#define RSTAR_API __attribute__((visibility("default")))
#else
#define RSTAR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  RSTAR_OK = 0,
  RSTAR_E_USAGE = 1,       /* invalid argument or configuration */
  RSTAR_E_VERIFY = 2,      /* a checked inequality failed */
  RSTAR_E_INFEASIBLE = 3,  /* no parameters within the caps */
  RSTAR_E_INTERNAL = 4
} rstar_status;

typedef enum { RSTAR_EXHAUSTIVE = 0, RSTAR_SPIKE = 1, RSTAR_SAMPLED = 2 } rstar_strategy;
typedef enum { RSTAR_FACTOR_DESK = 0, RSTAR_FACTOR_FULL = 1 } rstar_factor_mode;

typedef struct rstar_params rstar_params;
typedef struct rstar_family rstar_family;

typedef struct {
  rstar_strategy strategy;
  unsigned threads;
  uint64_t samples; /* sampled strategy only */
  uint64_t seed;    /* sampled strategy only */
} rstar_options;

typedef struct {
  int s, M, n, alpha, omega;
  int64_t period;
  size_t phi_count, psi_count;
} rstar_family_info;

RSTAR_API const char* rstar_version(void);
/* Message of the last failed call on this thread ("" if none). */
RSTAR_API const char* rstar_last_error(void);
RSTAR_API void rstar_string_free(char* s);
RSTAR_API rstar_options rstar_default_options(void);
/* Parses a strategy name: "exhaustive", "spike" or "sampled". */
RSTAR_API rstar_status rstar_parse_strategy(const char* name, rstar_strategy* out);

/* Parameters: flat "key = value" text. */
RSTAR_API rstar_status rstar_params_default(rstar_params** out);
RSTAR_API rstar_status rstar_params_parse(const char* text, rstar_params** out);
RSTAR_API rstar_status rstar_params_set_log2_cap(rstar_params* p, int log2_cap);
RSTAR_API rstar_status rstar_params_str(const rstar_params* p, char** out);
RSTAR_API void rstar_params_free(rstar_params* p);

/* Families. */
RSTAR_API rstar_status rstar_construct(const rstar_params* p, const rstar_options* opt, rstar_family** out);
RSTAR_API rstar_status rstar_family_load(const char* dir, rstar_family** out);
RSTAR_API rstar_status rstar_family_save(const rstar_family* f, const char* dir);
RSTAR_API rstar_status rstar_family_info_get(const rstar_family* f, rstar_family_info* out);
RSTAR_API void rstar_family_free(rstar_family* f);

/* Reports. The status is RSTAR_E_VERIFY when the report records a failure;
 * the report string is produced either way. */
RSTAR_API rstar_status rstar_verify(const rstar_family* f, const rstar_options* opt, char** report_json);
RSTAR_API rstar_status rstar_audit(const rstar_family* f, unsigned threads, char** records_jsonl, size_t* failed);
RSTAR_API rstar_status rstar_factor_check(const rstar_family* f, rstar_factor_mode mode, const rstar_options* opt,
                                          char** report_json);
RSTAR_API rstar_status rstar_indep_campaign(uint64_t seed, int trials, int64_t max_pi, int64_t block_factor,
                                            char** summary_json);

/* Schedule CSV for j = 1..j_max with M_j = (j+1)^5, or for the given desk M sequence when desk_M != NULL. */
RSTAR_API rstar_status rstar_schedule_csv(int j_max, const char* eps, const int64_t* desk_M, size_t desk_count,
                                          char** csv);
/* Certified enclosure of the first J terms of the sqrt(beta_j) series, as JSON. */
RSTAR_API rstar_status rstar_sqrt_beta_sum(int J, char** json);

/* (N, average) CSV of the Furstenberg averages of (sum of phis, sum of psis) at x. */
RSTAR_API rstar_status rstar_orbit_csv(const rstar_family* f, int64_t x, const int64_t* checkpoints, size_t count,
                                       char** csv);

#ifdef __cplusplus
}
#endif

#endif

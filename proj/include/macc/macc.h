/*
 * C interface to the macc simulator.
 *
 * Every object is an opaque handle released with its matching _free call.
 * Functions return MACC_OK or an error code; macc_last_error() then holds a
 * description for the calling thread.
 */
#ifndef MACC_H
#define MACC_H

#include <stddef.h>
#include <stdint.h>

#if defined(MACC_BUILDING_LIBRARY)
#define MACC_API __attribute__ ((visibility ("default")))
#else
#define MACC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum macc_status
{
  MACC_OK = 0,
  MACC_E_PARSE = 1,
  MACC_E_VALIDATION = 2,
  MACC_E_IO = 3,
  MACC_E_INVALID_ARGUMENT = 4,
  MACC_E_UNKNOWN_PARAM = 5,
  MACC_E_INTERNAL = 6
} macc_status;

typedef enum macc_mode
{
  MACC_MODE_AGENT = 0,
  MACC_MODE_BASELINE = 1
} macc_mode;

typedef enum macc_format
{
  MACC_FORMAT_CSV = 0,
  MACC_FORMAT_JSONL = 1
} macc_format;

typedef struct macc_scenario macc_scenario;
typedef struct macc_run macc_run;
typedef struct macc_report macc_report;

typedef struct macc_scenario_info
{
  const char *name; /* owned by the scenario */
  double duration_s;
  size_t node_count;
  size_t link_count;
  size_t flow_count;
} macc_scenario_info;

typedef struct macc_flow_stats
{
  const char *flow_id; /* owned by the run */
  uint64_t sent;
  uint64_t delivered;
  uint64_t dropped_queue;
  uint64_t dropped_noroute;
  uint64_t in_flight;
  double loss_rate;
  int has_delay; /* 0 when nothing was delivered */
  double mean_delay_ms;
  double p95_delay_ms;
  double goodput_bps;
  double agent_overhead_ratio;
  uint64_t reroutes;
} macc_flow_stats;

MACC_API const char *macc_last_error (void);
MACC_API const char *macc_status_string (macc_status status);

MACC_API macc_status macc_scenario_load_file (const char *path, macc_scenario **out);
MACC_API macc_status macc_scenario_load_string (const char *json, size_t length, macc_scenario **out);
MACC_API macc_status macc_scenario_clone (const macc_scenario *scenario, macc_scenario **out);
MACC_API void macc_scenario_free (macc_scenario *scenario);
MACC_API macc_status macc_scenario_info_get (const macc_scenario *scenario, macc_scenario_info *out);
/* Sweepable parameters: offered_load, probe_size (bits), propagation_interval (ms). */
MACC_API macc_status macc_scenario_set_param (macc_scenario *scenario, const char *name, double value);

/* Metrics are taken over packets created at or after window_start_s. */
MACC_API macc_status macc_simulate (const macc_scenario *scenario, macc_mode mode, uint64_t seed,
                                    double window_start_s, macc_run **out);
MACC_API void macc_run_free (macc_run *run);
MACC_API size_t macc_run_flow_count (const macc_run *run);
MACC_API macc_status macc_run_flow_stats (const macc_run *run, size_t index, macc_flow_stats *out);
MACC_API macc_status macc_run_totals (const macc_run *run, macc_flow_stats *out);

MACC_API macc_status macc_report_create (macc_report **out);
MACC_API void macc_report_free (macc_report *report);
/* Copies the run's metrics under run_id. */
MACC_API macc_status macc_report_add (macc_report *report, const char *run_id, const macc_run *run);
MACC_API size_t macc_report_row_count (const macc_report *report);
MACC_API macc_status macc_report_write (const macc_report *report, macc_format format, const char *path);
/* Writes into buf (NUL-terminated); *needed receives the full length plus one. */
MACC_API macc_status macc_report_render (const macc_report *report, macc_format format, char *buf, size_t size,
                                         size_t *needed);

#ifdef __cplusplus
}
#endif

#endif

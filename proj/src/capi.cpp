#include "macc/macc.h"

#include "macc/errors.hpp"
#include "macc/metrics.hpp"
#include "macc/scenario_io.hpp"
#include "macc/sim_engine.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

struct macc_scenario
{
  macc::Scenario scenario;
};

struct macc_run
{
  macc::Metrics metrics;
};

struct macc_report
{
  std::vector<macc::RunRow> runs;
};

namespace {

thread_local std::string g_last_error;

macc_status
Fail (macc_status status, std::string message)
{
  g_last_error = std::move (message);
  return status;
}

macc_status
StatusOf (macc::Errc code)
{
  switch (code)
    {
    case macc::Errc::ParseError:
      return MACC_E_PARSE;
    case macc::Errc::ValidationError:
    case macc::Errc::ScenarioInvalid:
      return MACC_E_VALIDATION;
    case macc::Errc::IoError:
      return MACC_E_IO;
    case macc::Errc::UnknownParam:
      return MACC_E_UNKNOWN_PARAM;
    default:
      return MACC_E_INTERNAL;
    }
}

template <typename F>
macc_status
Guard (F &&body)
{
  try
    {
      g_last_error.clear ();
      return body ();
    }
  catch (const macc::Error &e)
    {
      return Fail (StatusOf (e.Code ()), e.what ());
    }
  catch (const std::bad_alloc &)
    {
      return Fail (MACC_E_INTERNAL, "out of memory");
    }
  catch (const std::exception &e)
    {
      return Fail (MACC_E_INTERNAL, e.what ());
    }
}

void
Fill (const macc::FlowMetrics &m, macc_flow_stats *out)
{
  out->flow_id = m.flow_id.c_str ();
  out->sent = m.sent;
  out->delivered = m.delivered;
  out->dropped_queue = m.dropped_queue;
  out->dropped_noroute = m.dropped_noroute;
  out->in_flight = m.in_flight;
  out->loss_rate = m.loss_rate;
  out->has_delay = m.mean_delay_s.has_value () ? 1 : 0;
  out->mean_delay_ms = m.mean_delay_s.value_or (0.0) * 1000.0;
  out->p95_delay_ms = m.p95_delay_s.value_or (0.0) * 1000.0;
  out->goodput_bps = m.goodput_bps;
  out->agent_overhead_ratio = m.agent_overhead_ratio;
  out->reroutes = m.reroutes;
}

std::string
Render (const macc_report *report, macc_format format)
{
  std::ostringstream out;
  if (format == MACC_FORMAT_CSV)
    macc::WriteMetricsCsv (report->runs, out);
  else
    macc::WriteMetricsJsonl (report->runs, out);
  return out.str ();
}

} // namespace

extern "C" {

const char *
macc_last_error (void)
{
  return g_last_error.c_str ();
}

const char *
macc_status_string (macc_status status)
{
  switch (status)
    {
    case MACC_OK:
      return "ok";
    case MACC_E_PARSE:
      return "parse error";
    case MACC_E_VALIDATION:
      return "validation error";
    case MACC_E_IO:
      return "i/o error";
    case MACC_E_INVALID_ARGUMENT:
      return "invalid argument";
    case MACC_E_UNKNOWN_PARAM:
      return "unknown parameter";
    case MACC_E_INTERNAL:
      return "internal error";
    }
  return "unknown status";
}

macc_status
macc_scenario_load_file (const char *path, macc_scenario **out)
{
  if (!path || !out)
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  return Guard ([&] {
    *out = new macc_scenario{macc::LoadScenarioFile (path)};
    return MACC_OK;
  });
}

macc_status
macc_scenario_load_string (const char *json, size_t length, macc_scenario **out)
{
  if (!json || !out)
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  return Guard ([&] {
    *out = new macc_scenario{macc::LoadScenario (std::string_view (json, length))};
    return MACC_OK;
  });
}

macc_status
macc_scenario_clone (const macc_scenario *scenario, macc_scenario **out)
{
  if (!scenario || !out)
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  return Guard ([&] {
    *out = new macc_scenario{scenario->scenario};
    return MACC_OK;
  });
}

void
macc_scenario_free (macc_scenario *scenario)
{
  delete scenario;
}

macc_status
macc_scenario_info_get (const macc_scenario *scenario, macc_scenario_info *out)
{
  if (!scenario || !out)
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  const macc::Scenario &s = scenario->scenario;
  out->name = s.name.c_str ();
  out->duration_s = macc::SimTimeToSeconds (s.duration);
  out->node_count = s.topology.NodeCount ();
  out->link_count = s.topology.Links ().size ();
  out->flow_count = s.flows.size ();
  return MACC_OK;
}

macc_status
macc_scenario_set_param (macc_scenario *scenario, const char *name, double value)
{
  if (!scenario || !name)
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  return Guard ([&] {
    macc::Scenario copy = scenario->scenario;
    macc::ApplySweepParam (copy, name, value);
    scenario->scenario = std::move (copy);
    return MACC_OK;
  });
}

macc_status
macc_simulate (const macc_scenario *scenario, macc_mode mode, uint64_t seed, double window_start_s, macc_run **out)
{
  if (!scenario || !out)
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  if (mode != MACC_MODE_AGENT && mode != MACC_MODE_BASELINE)
    return Fail (MACC_E_INVALID_ARGUMENT, "unknown mode");
  if (!(window_start_s >= 0.0))
    return Fail (MACC_E_INVALID_ARGUMENT, "window start must be non-negative");
  return Guard ([&] {
    const macc::Mode m = mode == MACC_MODE_AGENT ? macc::Mode::Agent : macc::Mode::Baseline;
    macc::RunResult result = macc::RunScenario (scenario->scenario, m, seed);
    *out = new macc_run{macc::CollectMetrics (result, macc::SecondsToSimTime (window_start_s))};
    return MACC_OK;
  });
}

void
macc_run_free (macc_run *run)
{
  delete run;
}

size_t
macc_run_flow_count (const macc_run *run)
{
  return run ? run->metrics.flows.size () : 0;
}

macc_status
macc_run_flow_stats (const macc_run *run, size_t index, macc_flow_stats *out)
{
  if (!run || !out)
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  if (index >= run->metrics.flows.size ())
    return Fail (MACC_E_INVALID_ARGUMENT, "flow index out of range");
  Fill (run->metrics.flows[index], out);
  return MACC_OK;
}

macc_status
macc_run_totals (const macc_run *run, macc_flow_stats *out)
{
  if (!run || !out)
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  Fill (run->metrics.totals, out);
  return MACC_OK;
}

macc_status
macc_report_create (macc_report **out)
{
  if (!out)
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  return Guard ([&] {
    *out = new macc_report{};
    return MACC_OK;
  });
}

void
macc_report_free (macc_report *report)
{
  delete report;
}

macc_status
macc_report_add (macc_report *report, const char *run_id, const macc_run *run)
{
  if (!report || !run_id || !run)
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  if (std::strpbrk (run_id, ",\"\r\n"))
    return Fail (MACC_E_INVALID_ARGUMENT, "run id contains a reserved character");
  return Guard ([&] {
    report->runs.push_back (macc::RunRow{run_id, run->metrics});
    return MACC_OK;
  });
}

size_t
macc_report_row_count (const macc_report *report)
{
  if (!report)
    return 0;
  size_t rows = 0;
  for (const macc::RunRow &r : report->runs)
    rows += r.metrics.flows.size () + 1;
  return rows;
}

macc_status
macc_report_write (const macc_report *report, macc_format format, const char *path)
{
  if (!report || !path)
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  if (format != MACC_FORMAT_CSV && format != MACC_FORMAT_JSONL)
    return Fail (MACC_E_INVALID_ARGUMENT, "unknown format");
  return Guard ([&] {
    if (format == MACC_FORMAT_CSV)
      macc::WriteMetricsFiles (report->runs, path, "");
    else
      {
        // WriteMetricsFiles always emits CSV first; JSONL alone goes through Render.
        const std::string text = Render (report, format);
        FILE *f = std::fopen (path, "wb");
        if (!f)
          return Fail (MACC_E_IO, std::string ("cannot write ") + path + ": " + std::strerror (errno));
        const bool ok = std::fwrite (text.data (), 1, text.size (), f) == text.size ();
        if (std::fclose (f) != 0 || !ok)
          return Fail (MACC_E_IO, std::string ("write failed for ") + path);
      }
    return MACC_OK;
  });
}

macc_status
macc_report_render (const macc_report *report, macc_format format, char *buf, size_t size, size_t *needed)
{
  if (!report || !needed || (size > 0 && !buf))
    return Fail (MACC_E_INVALID_ARGUMENT, "null argument");
  if (format != MACC_FORMAT_CSV && format != MACC_FORMAT_JSONL)
    return Fail (MACC_E_INVALID_ARGUMENT, "unknown format");
  return Guard ([&] {
    const std::string text = Render (report, format);
    *needed = text.size () + 1;
    if (size > 0)
      {
        const size_t n = std::min (size - 1, text.size ());
        std::memcpy (buf, text.data (), n);
        buf[n] = '\0';
      }
    return MACC_OK;
  });
}

} // extern "C"

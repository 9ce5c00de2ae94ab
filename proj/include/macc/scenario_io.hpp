#ifndef MACC_SCENARIO_IO_HPP
#define MACC_SCENARIO_IO_HPP

#include "macc/metrics.hpp"
#include "macc/scenario.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace macc {

/**
 * \brief Parses and validates a scenario document (JSON).
 *
 * Top-level keys are exactly name, duration_s, nodes, links, flows and the
 * optional events and params; unknown keys anywhere are rejected. Omitted
 * optional fields take their documented defaults.
 *
 * Throws ParseError (with line and column) for malformed text and
 * ValidationError naming the offending field otherwise.
 */
Scenario LoadScenario (std::string_view text);
Scenario LoadScenarioFile (const std::string &path);

/// Canonical JSON form; LoadScenario (SerializeScenario (s)) == s.
std::string SerializeScenario (const Scenario &scenario);

/// Names accepted by ApplySweepParam.
std::vector<std::string> SweepParamNames ();

/// offered_load (flow rate multiplier), probe_size (bits), propagation_interval (ms).
/// Throws UnknownParam for anything else and ValidationError for a bad value.
void ApplySweepParam (Scenario &scenario, std::string_view name, double value);

struct RunRow
{
  std::string run_id;
  Metrics metrics;
};

/// One flat table line, holding exactly the values that get printed.
struct TableRow
{
  std::string run_id;
  std::string mode;
  std::uint64_t seed = 0;
  std::string flow_id;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_queue = 0;
  std::uint64_t dropped_noroute = 0;
  double loss_rate = 0.0;
  std::optional<double> mean_delay_ms;
  std::optional<double> p95_delay_ms;
  double goodput_bps = 0.0;
  double agent_overhead_ratio = 0.0;
  std::uint64_t reroutes = 0;

  bool operator== (const TableRow &) const = default;
};

extern const std::vector<std::string_view> kMetricsColumns;

/// Flow rows followed by a totals row (flow_id "total") for every run.
std::vector<TableRow> ToTableRows (std::span<const RunRow> runs);

void WriteMetricsCsv (std::span<const RunRow> runs, std::ostream &out);
/// One JSON object per line per run.
void WriteMetricsJsonl (std::span<const RunRow> runs, std::ostream &out);
/// Writes both forms; throws IoError naming the path that failed.
void WriteMetricsFiles (std::span<const RunRow> runs, const std::string &csv_path, const std::string &json_path);

std::vector<TableRow> ParseMetricsCsv (std::string_view text);
std::vector<TableRow> ParseMetricsJsonl (std::string_view text);

/// Shortest decimal text that parses back to the same double.
std::string FormatDouble (double value);

} // namespace macc

#endif

#include "macc/scenario.hpp"

#include "macc/errors.hpp"

#include <set>

namespace macc {

namespace {

[[noreturn]] void
Invalid (const std::string &what)
{
  throw Error (Errc::ValidationError, what);
}

} // namespace

void
ValidateScenario (const Scenario &s)
{
  if (s.duration <= 0)
    Invalid ("duration_s must be positive");
  const std::size_t n = s.topology.NodeCount ();
  if (n == 0)
    Invalid ("nodes: at least one node is required");

  std::set<std::string> ids;
  for (const Flow &f : s.flows)
    {
      const std::string where = "flows[" + f.id + "]";
      if (f.id.empty ())
        Invalid ("flows: id must be non-empty");
      if (!ids.insert (f.id).second)
        Invalid (where + ": duplicate flow id");
      if (f.src.Index () >= n || f.dst.Index () >= n)
        Invalid (where + ": endpoint is not a declared node");
      if (f.src == f.dst)
        Invalid (where + ": src equals dst");
      if (!(f.rate_bps > 0.0))
        Invalid (where + ".rate_bps must be positive");
      if (!(f.packet_size_bits > 0.0))
        Invalid (where + ".packet_size_bits must be positive");
      if (f.start < 0)
        Invalid (where + ".start_s must be non-negative");
      if (!(f.start < f.stop))
        Invalid (where + ": start_s must be before stop_s");
    }

  const ProtocolParams &p = s.params;
  if (!(p.thresholds.low_to_medium > 0.0 && p.thresholds.low_to_medium < p.thresholds.medium_to_high
        && p.thresholds.medium_to_high <= 1.0))
    Invalid ("params: thresholds need 0 < low_threshold < high_threshold <= 1");
  if (p.queue_capacity == 0)
    Invalid ("params.queue_capacity must be positive");
  if (!(p.probe_size_bits > 0.0))
    Invalid ("params.probe_size_bits must be positive");
  if (p.propagation_interval <= 0)
    Invalid ("params.propagation_interval_ns must be positive");
  if (p.patrol_step <= 0)
    Invalid ("params.patrol_step_ns must be positive");
  if (!(p.agent_frame_bits > 0.0))
    Invalid ("params.agent_frame_bits must be positive");
  if (!(p.report_frame_bits > 0.0))
    Invalid ("params.report_frame_bits must be positive");
  if (!(p.probe_timeout_factor >= 1.0))
    Invalid ("params.probe_timeout_factor must be at least 1");
  if (p.reroute_sustain_reports == 0)
    Invalid ("params.reroute_sustain_reports must be positive");
  if (p.history_limit < 2)
    Invalid ("params.history_limit must be at least 2");
  if (!(p.load_multiplier > 0.0))
    Invalid ("params.load_multiplier must be positive");
}

} // namespace macc

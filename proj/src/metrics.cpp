#include "macc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace macc {

double
NearestRank (std::span<const double> sorted, double p)
{
  const auto n = static_cast<double> (sorted.size ());
  auto rank = static_cast<std::size_t> (std::ceil (p / 100.0 * n));
  rank = std::clamp<std::size_t> (rank, 1, sorted.size ());
  return sorted[rank - 1];
}

FlowMetrics
AggregatePackets (std::string flow_id, std::span<const PacketRecord> packets, double window_seconds)
{
  FlowMetrics m;
  m.flow_id = std::move (flow_id);
  std::vector<double> delays;
  double delivered_bits = 0.0;
  for (const PacketRecord &p : packets)
    {
      ++m.sent;
      switch (p.fate)
        {
        case PacketFate::Delivered:
          ++m.delivered;
          delivered_bits += p.size_bits;
          delays.push_back (SimTimeToSeconds (p.delivered_at - p.created_at));
          break;
        case PacketFate::DroppedQueue:
          ++m.dropped_queue;
          break;
        case PacketFate::DroppedNoRoute:
          ++m.dropped_noroute;
          break;
        case PacketFate::InFlight:
          ++m.in_flight;
          break;
        }
    }
  const std::uint64_t finished = m.delivered + m.Dropped ();
  if (m.delivered == 0 && m.sent > 0 && m.Dropped () > 0)
    m.loss_rate = 1.0;
  else if (finished > 0)
    m.loss_rate = static_cast<double> (m.Dropped ()) / static_cast<double> (finished);
  if (!delays.empty ())
    {
      std::sort (delays.begin (), delays.end ());
      m.mean_delay_s = std::accumulate (delays.begin (), delays.end (), 0.0) / static_cast<double> (delays.size ());
      m.p95_delay_s = NearestRank (delays, 95.0);
    }
  if (window_seconds > 0.0)
    m.goodput_bps = delivered_bits / window_seconds;
  return m;
}

Metrics
CollectMetrics (const RunResult &run, SimTime window_start)
{
  Metrics out;
  out.mode = run.mode;
  out.seed = run.seed;
  out.duration_s = SimTimeToSeconds (run.duration);
  const double window = SimTimeToSeconds (run.duration - std::min (window_start, run.duration));
  const double total_bits = run.data_bits_sent + run.control_bits_sent;
  const double overhead = total_bits > 0.0 ? run.control_bits_sent / total_bits : 0.0;

  std::vector<std::vector<PacketRecord>> per_flow (run.flows.size ());
  std::vector<PacketRecord> all;
  for (const PacketRecord &p : run.packets)
    {
      if (p.created_at < window_start)
        continue;
      per_flow[p.flow].push_back (p);
      all.push_back (p);
    }

  std::uint64_t total_reroutes = 0;
  for (std::size_t f = 0; f < run.flows.size (); ++f)
    {
      const Flow &flow = run.flows[f];
      FlowMetrics m = AggregatePackets (flow.id, per_flow[f], window);
      m.agent_overhead_ratio = overhead;
      for (const RerouteRecord &r : run.reroutes)
        {
          if (r.outcome == RerouteOutcome::Installed && r.completed_at >= window_start && r.source == flow.src
              && r.destination == flow.dst && r.cls == flow.cls)
            ++m.reroutes;
        }
      out.flows.push_back (std::move (m));
    }
  for (const RerouteRecord &r : run.reroutes)
    if (r.outcome == RerouteOutcome::Installed && r.completed_at >= window_start)
      ++total_reroutes;

  out.totals = AggregatePackets ("total", all, window);
  out.totals.agent_overhead_ratio = overhead;
  out.totals.reroutes = total_reroutes;
  return out;
}

} // namespace macc

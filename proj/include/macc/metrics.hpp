#ifndef MACC_METRICS_HPP
#define MACC_METRICS_HPP

#include "macc/sim_engine.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace macc {

struct FlowMetrics
{
  std::string flow_id;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_queue = 0;
  std::uint64_t dropped_noroute = 0;
  std::uint64_t in_flight = 0;
  double loss_rate = 0.0;
  std::optional<double> mean_delay_s; // absent when nothing was delivered
  std::optional<double> p95_delay_s;
  double goodput_bps = 0.0;
  double agent_overhead_ratio = 0.0;
  std::uint64_t reroutes = 0;

  std::uint64_t Dropped () const { return dropped_queue + dropped_noroute; }

  bool operator== (const FlowMetrics &) const = default;
};

struct Metrics
{
  Mode mode = Mode::Agent;
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  std::vector<FlowMetrics> flows;
  FlowMetrics totals;

  bool operator== (const Metrics &) const = default;
};

/**
 * Aggregates a finished run. Only packets created at or after
 * `window_start` count; goodput divides delivered bits by the window
 * length. Loss is dropped / (delivered + dropped): packets still in flight
 * are not losses. The p95 delay uses the nearest-rank rule.
 */
Metrics CollectMetrics (const RunResult &run, SimTime window_start = 0);

/// Aggregation over a set of packet records; exposed for direct testing.
FlowMetrics AggregatePackets (std::string flow_id, std::span<const PacketRecord> packets, double window_seconds);

/// Nearest-rank percentile of `sorted` (ascending, non-empty); `p` in (0, 100].
double NearestRank (std::span<const double> sorted, double p);

} // namespace macc

#endif

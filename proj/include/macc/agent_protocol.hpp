#ifndef MACC_AGENT_PROTOCOL_HPP
#define MACC_AGENT_PROTOCOL_HPP

#include "macc/net_model.hpp"
#include "macc/routing.hpp"
#include "macc/topology.hpp"

#include <deque>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace macc {

using AgentId = std::uint64_t;

enum class AgentMode : std::uint8_t
{
  Patrol,
  Probe,
};

struct HistoryEntry
{
  NodeId node;
  SimTime arrived_at = 0;
  CongestionReport observed;
};

struct ProbeContext
{
  NodeId source;
  NodeId destination;
  NodeId divergence_node;
  /// Nodes actually visited, starting at the source.
  std::vector<NodeId> path_so_far;
  /// Forced prefix: source .. divergence node, then the clone's own first hop.
  std::vector<NodeId> planned;
  double probe_size = 8000.0; // bits
  SimTime injected_at = 0;
};

struct ProbeResult
{
  std::vector<NodeId> path;
  SimTime channel_delay = 0; // ns
  double data_rate = 0.0;    // bits per second

  double ChannelDelaySeconds () const { return SimTimeToSeconds (channel_delay); }
  std::size_t Hops () const { return path.empty () ? 0 : path.size () - 1; }

  bool operator== (const ProbeResult &) const = default;
};

struct MobileAgent
{
  AgentId id = 0;
  AgentMode mode = AgentMode::Patrol;
  NodeId home;
  NodeId location;
  std::deque<HistoryEntry> history;
  std::optional<AgentId> lineage;
  std::optional<ProbeContext> probe;

  static MobileAgent Patrol (AgentId id, NodeId home);
};

// --- patrol ----------------------------------------------------------------

/// Uniform draw over `neighbors`. Throws Isolated when the set is empty.
NodeId PatrolStep (const MobileAgent &agent, std::span<const NodeId> neighbors, std::mt19937_64 &rng);

/// Moves the agent to `node` and appends a history entry. At most
/// `history_limit` entries are kept (oldest dropped first).
void RecordArrival (MobileAgent &agent, NodeId node, SimTime at, const CongestionReport &observed,
                    std::size_t history_limit);

/**
 * \brief Refreshes `table` from the agent's walk.
 *
 * For every destination the agent has visited, the walk segment from its
 * last visit there up to the current node is loop-erased into a simple
 * path. The entry is written when the visit is newer than the existing
 * entry: next hop is the node preceding the current one on that path, the
 * rate is the path bottleneck, and the route is marked congested when any
 * node on it reported a High class. Segments using a link that is no
 * longer live are skipped.
 *
 * \return number of entries written
 */
std::size_t UpdateRoutingTable (RoutingTable &table, const MobileAgent &agent, const Topology &topo);
std::size_t UpdateRoutingTable (NodeState &node, const MobileAgent &agent, const Topology &topo);

// --- congestion propagation ------------------------------------------------

struct CongestionMessage
{
  NodeId to;
  CongestionReport report;
};

/// Re-measures the node's congestion, updates its priority, and addresses the
/// report to every live neighbor.
std::vector<CongestionMessage> PropagateCongestion (NodeState &node, const Topology &topo, SimTime now,
                                                   const CongestionThresholds &thresholds = {});

void ReceiveCongestion (NodeState &node, NodeId from, const CongestionReport &report, SimTime now);

// --- clone, probe, select ---------------------------------------------------

struct RerouteRequest
{
  NodeId detector;
  NodeId congested_next_hop;
  NodeId destination;
  /// Route the traffic took from its source up to and including the detector.
  std::vector<NodeId> upstream_path;
  double probe_size = 8000.0;
};

/// One Probe clone per live neighbor of the detector other than the congested
/// next hop and the upstream node. Throws NoAlternative when none remain.
std::vector<MobileAgent> InitiateReroute (const RerouteRequest &request, const MobileAgent &parent,
                                          const Topology &topo, AgentId &next_agent_id);

/// Places a probe at its source and starts the channel-delay clock.
void LaunchProbe (MobileAgent &probe, SimTime now);

struct ProbeStep
{
  bool arrived = false;
  NodeId next; // valid when !arrived
};

/**
 * Chooses the probe's next hop and moves it there (location and
 * path_so_far). The forced prefix is followed first; afterwards the
 * routing-table entry is used when present and loop-free, otherwise the
 * loop-free neighbor with the fewest hops to the destination (lowest id on
 * ties). Throws DeadEnd when no loop-free live next hop exists.
 */
ProbeStep ProbeAdvance (MobileAgent &probe, const Topology &topo, std::span<const RoutingTable> tables);

/// Path the probe would take on an idle network with cold tables, or empty on a dead end.
std::vector<NodeId> ExpectedProbePath (const ProbeContext &ctx, const Topology &topo);

/// Store-and-forward delay of one `bits`-sized frame along `path` with empty queues.
SimTime IdlePathDelay (std::span<const NodeId> path, const Topology &topo, double bits);

/// data_rate = probe_size / (arrival - injected_at). Throws ZeroDelay if not positive.
ProbeResult MeasurePathRate (const ProbeContext &ctx, SimTime arrival_time);

/// Highest data rate; ties by fewer hops then smallest id sequence.
/// Throws AllProbesFailed on empty input.
ProbeResult SelectPath (std::span<const ProbeResult> results);

/// Points every non-destination node on the winner path at its successor.
/// Throws StalePath (and writes nothing) if a path link is no longer live.
std::size_t InstallPath (const ProbeResult &winner, std::span<RoutingTable> tables, const Topology &topo,
                         SimTime now);

} // namespace macc

#endif

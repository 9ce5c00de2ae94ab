#ifndef MACC_SIM_ENGINE_HPP
#define MACC_SIM_ENGINE_HPP

#include "macc/agent_protocol.hpp"
#include "macc/net_model.hpp"
#include "macc/scenario.hpp"

#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace macc {

enum class PacketFate : std::uint8_t
{
  InFlight,
  Delivered,
  DroppedQueue,
  DroppedNoRoute,
};

struct PacketRecord
{
  std::uint32_t flow = 0;
  std::uint64_t seq = 0;
  double size_bits = 0.0;
  SimTime created_at = 0;
  SimTime delivered_at = 0;
  PacketFate fate = PacketFate::InFlight;
};

struct TxRecord
{
  NodeId from;
  NodeId to;
  SimTime start = 0;
  SimTime end = 0;
  FrameKind kind = FrameKind::Data;
  std::uint64_t handle = 0;

  bool operator== (const TxRecord &) const = default;
};

enum class RerouteOutcome : std::uint8_t
{
  Installed,
  NoAlternative,
  AllProbesFailed,
  StalePath,
  Aborted,
};

std::string_view ToString (RerouteOutcome o);

struct RerouteRecord
{
  SimTime decided_at = 0;
  SimTime completed_at = 0;
  NodeId detector;
  NodeId source;
  NodeId destination;
  TrafficClass cls = TrafficClass::BestEffort;
  std::size_t probes = 0;
  std::vector<ProbeResult> results;
  std::optional<ProbeResult> winner;
  RerouteOutcome outcome = RerouteOutcome::Aborted;
};

struct RunResult
{
  Mode mode = Mode::Agent;
  std::uint64_t seed = 0;
  SimTime duration = 0;
  std::vector<Flow> flows;
  std::vector<PacketRecord> packets;
  double data_bits_sent = 0.0;    // summed over every hop transmission
  double control_bits_sent = 0.0; // agents, probes, notices, reports
  std::vector<RerouteRecord> reroutes;
  std::uint64_t events = 0;
};

struct EngineOptions
{
  bool record_transmissions = false;
  /// When false, Enqueue never starts a transmission; callers drive ServiceNext.
  bool auto_service = true;
};

enum class EnqueueResult : std::uint8_t
{
  Accepted,
  Dropped,
};

/**
 * \brief Deterministic discrete-event simulation of one scenario run.
 *
 * Single-threaded; events are ordered by (time, insertion sequence). Each
 * directed link is a single server. Frames wait in per-node per-class
 * drop-tail queues and are served Voice first, FIFO within a class, taking
 * the first frame addressed to the idle link.
 *
 * In Agent mode the tables start from shortest-hop routes and are then
 * maintained by patrol agents, periodic congestion reports, and the
 * clone-probe-select reroute procedure. Baseline mode keeps shortest-hop
 * routes and only recomputes them on topology events.
 */
class Simulator
{
public:
  Simulator (const Scenario &scenario, Mode mode, std::uint64_t seed, EngineOptions options = {});

  RunResult Run ();

  SimTime Now () const { return m_now; }
  const Topology &CurrentTopology () const { return m_topo; }
  const std::vector<NodeState> &Nodes () const { return m_nodes; }
  const std::vector<MobileAgent> &PatrolAgents () const { return m_patrols; }
  const std::vector<TxRecord> &Transmissions () const { return m_tx_log; }
  /// Data frames queued or on a link right now.
  std::size_t DataFramesInNetwork () const;
  /// Last report each node broadcast (periodic or triggered).
  const std::vector<CongestionReport> &LastBroadcast () const { return m_last_broadcast; }

  /// Drop-tail admission into the frame's class queue; starts service if the link is idle.
  EnqueueResult Enqueue (NodeId node, const Frame &frame);
  /// Dequeues the highest-class frame addressed to `neighbor` and starts its transmission.
  std::optional<Frame> ServiceNext (NodeId node, NodeId neighbor);
  /// Next hop for `destination` from the node's table; throws NoRoute.
  NodeId Forward (NodeId node, NodeId destination);

  /// Sends a stand-alone probe (already launched) through the network; its
  /// measurement is appended to ProbeResults() on arrival.
  void InjectProbe (MobileAgent probe);
  const std::vector<ProbeResult> &ProbeResults () const { return m_free_results; }

private:
  enum class EventKind : std::uint8_t
  {
    PacketArrival,
    TransmitDone,
    AgentStep,
    CongestionBroadcast,
    ProbeTimeout,
    LinkEvent,
    FlowStart,
    FlowPacket,
    FlowStop,
  };

  struct Event
  {
    SimTime at = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::PacketArrival;
    std::uint32_t a = 0; // node / agent / flow / session
    std::uint32_t b = 0; // neighbor / clone index / event index
    Frame frame;
  };

  struct EventOrder
  {
    bool operator() (const Event &x, const Event &y) const
    {
      return x.at != y.at ? x.at > y.at : x.seq > y.seq;
    }
  };

  struct Packet
  {
    std::uint32_t flow = 0;
    std::size_t record = 0;
    NodeId src;
    NodeId dst;
    TrafficClass cls = TrafficClass::BestEffort;
    double size_bits = 0.0;
    std::vector<NodeId> trace;
  };

  struct Control
  {
    FrameKind kind = FrameKind::Patrol;
    std::uint32_t agent = 0;   // patrol index
    std::uint32_t session = 0; // probe / notice / report
    std::uint32_t clone = 0;
    bool free_probe = false;
    std::vector<NodeId> route; // source-routed frames
    std::size_t hop = 0;
    NodeId from;
    CongestionReport report;
  };

  enum class CloneState : std::uint8_t
  {
    Pending,
    Arrived,
    Reported,
    Failed,
  };

  struct Session
  {
    NodeId source;
    NodeId destination;
    TrafficClass cls = TrafficClass::BestEffort;
    std::vector<MobileAgent> clones;
    std::vector<CloneState> state;
    std::vector<std::optional<ProbeResult>> results;
    std::size_t record = 0;
    bool open = true;
  };

  /// Last data packet seen per (destination, class) at a node.
  struct TrafficObservation
  {
    std::vector<NodeId> trace;
    SimTime last_seen = 0;
  };

  void Schedule (SimTime at, EventKind kind, std::uint32_t a = 0, std::uint32_t b = 0, Frame frame = {});
  void Dispatch (const Event &ev);

  void GeneratePacket (std::uint32_t flow);
  void HandleDataAt (NodeId node, std::uint64_t handle, bool fresh_hop);
  void DropData (std::uint64_t handle, PacketFate fate);
  void DeliverData (std::uint64_t handle);

  void OnTransmitDone (NodeId from, NodeId to, const Frame &frame);
  void OnArrival (NodeId node, const Frame &frame);
  void OnControlLost (const Frame &frame);

  void PatrolStepFor (std::uint32_t agent);
  void PatrolArrive (std::uint32_t agent, NodeId node);

  void Broadcast (NodeId node);
  void CheckReroute (NodeId node);
  void LaunchSession (std::uint32_t session);
  void AdvanceProbe (std::uint32_t session, std::uint32_t clone, NodeId node);
  void FailClone (std::uint32_t session, std::uint32_t clone);
  void MaybeCompleteSession (std::uint32_t session);
  bool SendRouted (FrameKind kind, std::vector<NodeId> route, double bits, Control ctl);

  void OnLinkEvent (std::size_t index);
  void RefillTables ();

  std::size_t ServerIndex (NodeId from, NodeId to) const;
  std::uint32_t DataMask (NodeId node) const;
  void MarkDirty (NodeId node);
  void FlushDirty ();

  Scenario m_scenario;
  Mode m_mode;
  std::uint64_t m_seed;
  EngineOptions m_options;
  Topology m_topo;
  std::vector<NodeState> m_nodes;

  SimTime m_now = 0;
  std::uint64_t m_seq = 0;
  std::priority_queue<Event, std::vector<Event>, EventOrder> m_events;
  std::vector<char> m_busy;
  std::uint64_t m_next_handle = 1;

  std::unordered_map<std::uint64_t, Packet> m_packets;
  std::unordered_map<std::uint64_t, Control> m_controls;
  std::vector<PacketRecord> m_records;
  std::vector<std::uint64_t> m_flow_seq;
  std::vector<SimTime> m_flow_interval;
  std::size_t m_data_on_links = 0;
  std::vector<std::array<std::size_t, kTrafficClassCount>> m_data_count;

  std::mt19937_64 m_traffic_rng;
  std::vector<std::mt19937_64> m_patrol_rng;
  std::vector<MobileAgent> m_patrols;
  AgentId m_next_agent_id = 0;

  std::vector<CongestionReport> m_last_broadcast;
  std::vector<std::uint32_t> m_broadcast_mask;
  std::vector<std::array<std::size_t, kTrafficClassCount>> m_high_streak;
  std::vector<std::map<std::pair<NodeId, TrafficClass>, TrafficObservation>> m_observed;
  std::vector<NodeId> m_dirty;

  std::vector<Session> m_sessions;
  std::map<std::tuple<NodeId, NodeId, TrafficClass>, std::uint32_t> m_open_sessions;
  std::vector<MobileAgent> m_free_probes;
  std::vector<ProbeResult> m_free_results;

  std::vector<TxRecord> m_tx_log;
  RunResult m_result;
};

/// Runs `scenario` to completion. Throws ScenarioInvalid for a malformed scenario.
RunResult RunScenario (const Scenario &scenario, Mode mode, std::uint64_t seed);

/// Measures one probe forced along `path` through an otherwise idle network.
ProbeResult MeasureIdlePath (const Topology &topo, std::span<const NodeId> path, double probe_bits);

} // namespace macc

#endif

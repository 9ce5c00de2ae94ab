#ifndef MACC_NET_MODEL_HPP
#define MACC_NET_MODEL_HPP

#include "macc/routing.hpp"
#include "macc/topology.hpp"
#include "macc/types.hpp"

#include <array>
#include <deque>
#include <map>
#include <span>
#include <vector>

namespace macc {

enum class CongestionLevel : std::uint8_t
{
  Low = 0,
  Medium = 1,
  High = 2,
};

std::string_view ToString (CongestionLevel level);

/// Occupancy bands: Low < low_to_medium <= Medium < medium_to_high <= High.
struct CongestionThresholds
{
  double low_to_medium = 0.5;
  double medium_to_high = 0.8;

  bool operator== (const CongestionThresholds &) const = default;
};

struct CongestionReport
{
  std::array<double, kTrafficClassCount> occupancy{};
  std::array<CongestionLevel, kTrafficClassCount> level{};
  SimTime measured_at = 0;

  CongestionLevel LevelOf (TrafficClass c) const { return level[ClassIndex (c)]; }
  bool AnyHigh () const;

  bool operator== (const CongestionReport &) const = default;
};

enum class FrameKind : std::uint8_t
{
  Data,
  Patrol,
  Probe,
  Notice,
  ProbeReport,
  CongestionReport,
};

constexpr bool
IsControl (FrameKind k)
{
  return k != FrameKind::Data;
}

/// A unit queued at a node and transmitted over one link. The payload lives
/// with the engine and is addressed by `handle`.
struct Frame
{
  std::uint64_t handle = 0;
  FrameKind kind = FrameKind::Data;
  TrafficClass cls = TrafficClass::BestEffort;
  double size_bits = 0.0;
  NodeId next_hop;
};

/// Drop-tail FIFO with a fixed packet capacity.
struct ClassQueue
{
  std::deque<Frame> items;
  std::size_t capacity = 50;

  bool Full () const { return items.size () >= capacity; }
};

struct NeighborView
{
  CongestionReport report;
  SimTime received_at = 0;
};

struct NodeState
{
  NodeId id;
  std::array<ClassQueue, kTrafficClassCount> queues;
  CongestionReport congestion;
  int priority = 0;
  RoutingTable routing_table;
  std::map<NodeId, NeighborView> neighbor_views;

  NodeState () = default;
  NodeState (NodeId self, std::size_t queue_capacity);

  ClassQueue &Queue (TrafficClass c) { return queues[ClassIndex (c)]; }
  const ClassQueue &Queue (TrafficClass c) const { return queues[ClassIndex (c)]; }
};

/// Minimum link rate along `path`. Throws PathTooShort or MissingLink.
double BottleneckRate (std::span<const NodeId> path, const Topology &topo);

/// Interior nodes heading a link slower than any earlier link on `path`, in path order.
std::vector<NodeId> DetectMismatch (std::span<const NodeId> path, const Topology &topo);

double QueueOccupancy (const NodeState &node, TrafficClass c);

/// Throws DomainError outside [0, 1].
CongestionLevel ClassifyOccupancy (double occupancy, const CongestionThresholds &thresholds = {});

/// Delay-sensitivity weight of a class in the priority score.
int PriorityWeight (TrafficClass c);

/// Highest possible priority score, reached when every class is Low.
constexpr int kMaxPriority = 2 * (8 + 4 + 2 + 1);

/// Larger is higher priority: kMaxPriority minus the class-weighted level sum.
int NodePriority (const CongestionReport &report);

/// Snapshot of the node's queues at `now`.
CongestionReport MeasureCongestion (const NodeState &node, SimTime now,
                                    const CongestionThresholds &thresholds = {});

} // namespace macc

#endif

#include "macc/net_model.hpp"

#include "macc/errors.hpp"

#include <algorithm>
#include <limits>

namespace macc {

namespace {

void
RequirePath (std::span<const NodeId> path, const Topology &topo)
{
  if (path.size () < 2)
    throw Error (Errc::PathTooShort, "path needs at least two nodes");
  for (std::size_t i = 0; i + 1 < path.size (); ++i)
    {
      if (path[i].Index () >= topo.NodeCount () || path[i + 1].Index () >= topo.NodeCount ()
          || !topo.LiveLink (path[i], path[i + 1]))
        throw Error (Errc::MissingLink, "no live link at hop " + std::to_string (i));
    }
}

} // namespace

std::string_view
ToString (CongestionLevel level)
{
  switch (level)
    {
    case CongestionLevel::Low:
      return "low";
    case CongestionLevel::Medium:
      return "medium";
    case CongestionLevel::High:
      return "high";
    }
  return "unknown";
}

bool
CongestionReport::AnyHigh () const
{
  return std::any_of (level.begin (), level.end (),
                      [] (CongestionLevel l) { return l == CongestionLevel::High; });
}

NodeState::NodeState (NodeId self, std::size_t queue_capacity)
  : id (self),
    routing_table (self)
{
  for (auto &q : queues)
    q.capacity = queue_capacity;
  priority = kMaxPriority;
}

double
BottleneckRate (std::span<const NodeId> path, const Topology &topo)
{
  RequirePath (path, topo);
  double rate = std::numeric_limits<double>::infinity ();
  for (std::size_t i = 0; i + 1 < path.size (); ++i)
    rate = std::min (rate, topo.LiveLink (path[i], path[i + 1])->rate_bps);
  return rate;
}

std::vector<NodeId>
DetectMismatch (std::span<const NodeId> path, const Topology &topo)
{
  RequirePath (path, topo);
  std::vector<NodeId> flagged;
  double fastest_so_far = topo.LiveLink (path[0], path[1])->rate_bps;
  for (std::size_t i = 1; i + 1 < path.size (); ++i)
    {
      const double rate = topo.LiveLink (path[i], path[i + 1])->rate_bps;
      if (rate < fastest_so_far)
        flagged.push_back (path[i]);
      fastest_so_far = std::max (fastest_so_far, rate);
    }
  return flagged;
}

double
QueueOccupancy (const NodeState &node, TrafficClass c)
{
  const ClassQueue &q = node.Queue (c);
  if (q.capacity == 0)
    return 1.0;
  return static_cast<double> (q.items.size ()) / static_cast<double> (q.capacity);
}

CongestionLevel
ClassifyOccupancy (double occupancy, const CongestionThresholds &thresholds)
{
  if (!(occupancy >= 0.0 && occupancy <= 1.0))
    throw Error (Errc::DomainError, "occupancy outside [0, 1]");
  if (occupancy < thresholds.low_to_medium)
    return CongestionLevel::Low;
  if (occupancy < thresholds.medium_to_high)
    return CongestionLevel::Medium;
  return CongestionLevel::High;
}

int
PriorityWeight (TrafficClass c)
{
  switch (c)
    {
    case TrafficClass::Voice:
      return 8;
    case TrafficClass::Video:
      return 4;
    case TrafficClass::BestEffort:
      return 2;
    case TrafficClass::Background:
      return 1;
    }
  return 0;
}

int
NodePriority (const CongestionReport &report)
{
  int load = 0;
  for (TrafficClass c : kAllClasses)
    load += PriorityWeight (c) * static_cast<int> (report.LevelOf (c));
  return kMaxPriority - load;
}

CongestionReport
MeasureCongestion (const NodeState &node, SimTime now, const CongestionThresholds &thresholds)
{
  CongestionReport r;
  r.measured_at = now;
  for (TrafficClass c : kAllClasses)
    {
      const double occ = QueueOccupancy (node, c);
      r.occupancy[ClassIndex (c)] = occ;
      r.level[ClassIndex (c)] = ClassifyOccupancy (occ, thresholds);
    }
  return r;
}

} // namespace macc

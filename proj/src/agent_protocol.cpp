#include "macc/agent_protocol.hpp"

#include "macc/errors.hpp"

#include <algorithm>
#include <limits>

namespace macc {

MobileAgent
MobileAgent::Patrol (AgentId id, NodeId home)
{
  MobileAgent a;
  a.id = id;
  a.mode = AgentMode::Patrol;
  a.home = home;
  a.location = home;
  return a;
}

NodeId
PatrolStep (const MobileAgent &agent, std::span<const NodeId> neighbors, std::mt19937_64 &rng)
{
  if (agent.mode != AgentMode::Patrol)
    throw Error (Errc::DomainError, "patrol step on a probe agent");
  if (neighbors.empty ())
    throw Error (Errc::Isolated, "agent has no live neighbor");
  std::uniform_int_distribution<std::size_t> pick (0, neighbors.size () - 1);
  return neighbors[pick (rng)];
}

void
RecordArrival (MobileAgent &agent, NodeId node, SimTime at, const CongestionReport &observed,
               std::size_t history_limit)
{
  if (!agent.history.empty () && at <= agent.history.back ().arrived_at)
    throw Error (Errc::DomainError, "history times must strictly increase");
  if (observed.measured_at > at)
    throw Error (Errc::DomainError, "observation newer than arrival");
  agent.location = node;
  agent.history.push_back (HistoryEntry{node, at, observed});
  while (history_limit > 0 && agent.history.size () > history_limit)
    agent.history.pop_front ();
}

std::size_t
UpdateRoutingTable (RoutingTable &table, const MobileAgent &agent, const Topology &topo)
{
  const auto &hist = agent.history;
  if (hist.size () < 2)
    return 0;
  const NodeId self = table.Owner ();
  const std::size_t last = hist.size () - 1;
  if (hist[last].node != self)
    throw Error (Errc::DomainError, "agent is not at the table's node");

  // Latest visit index of each other node.
  std::map<NodeId, std::size_t> last_visit;
  for (std::size_t i = last; i-- > 0;)
    {
      if (hist[i].node != self)
        last_visit.emplace (hist[i].node, i);
    }

  std::size_t written = 0;
  for (const auto &[dest, k] : last_visit)
    {
      const SimTime info_time = hist[k].arrived_at;
      const RouteEntry *existing = table.Find (dest);
      if (existing && existing->updated_at >= info_time)
        continue;

      // Chronological loop erasure of the walk dest .. self.
      std::vector<NodeId> path;
      std::vector<std::size_t> observed_at;
      for (std::size_t i = k; i <= last; ++i)
        {
          auto it = std::find (path.begin (), path.end (), hist[i].node);
          if (it != path.end ())
            {
              const auto keep = static_cast<std::size_t> (it - path.begin ()) + 1;
              path.resize (keep);
              observed_at.resize (keep);
              observed_at.back () = i;
            }
          else
            {
              path.push_back (hist[i].node);
              observed_at.push_back (i);
            }
        }
      if (path.size () < 2)
        continue;

      bool live = true;
      for (std::size_t i = 0; i + 1 < path.size (); ++i)
        live = live && topo.Adjacent (path[i], path[i + 1]);
      if (!live)
        continue;

      RouteEntry entry;
      entry.next_hop = path[path.size () - 2];
      entry.est_path_rate = BottleneckRate (path, topo);
      entry.congested = std::any_of (observed_at.begin (), observed_at.end (),
                                     [&] (std::size_t i) { return hist[i].observed.AnyHigh (); });
      entry.updated_at = info_time;
      table.Install (dest, entry);
      ++written;
    }
  return written;
}

std::size_t
UpdateRoutingTable (NodeState &node, const MobileAgent &agent, const Topology &topo)
{
  return UpdateRoutingTable (node.routing_table, agent, topo);
}

std::vector<CongestionMessage>
PropagateCongestion (NodeState &node, const Topology &topo, SimTime now, const CongestionThresholds &thresholds)
{
  node.congestion = MeasureCongestion (node, now, thresholds);
  node.priority = NodePriority (node.congestion);
  std::vector<CongestionMessage> out;
  for (NodeId n : topo.Neighbors (node.id))
    out.push_back (CongestionMessage{n, node.congestion});
  return out;
}

void
ReceiveCongestion (NodeState &node, NodeId from, const CongestionReport &report, SimTime now)
{
  node.neighbor_views[from] = NeighborView{report, now};
}

std::vector<MobileAgent>
InitiateReroute (const RerouteRequest &request, const MobileAgent &parent, const Topology &topo,
                 AgentId &next_agent_id)
{
  if (request.upstream_path.empty () || request.upstream_path.back () != request.detector)
    throw Error (Errc::DomainError, "upstream path must end at the detector");
  std::optional<NodeId> upstream;
  if (request.upstream_path.size () >= 2)
    upstream = request.upstream_path[request.upstream_path.size () - 2];

  std::vector<MobileAgent> clones;
  for (NodeId n : topo.Neighbors (request.detector))
    {
      if (n == request.congested_next_hop || (upstream && n == *upstream))
        continue;
      if (std::find (request.upstream_path.begin (), request.upstream_path.end (), n)
          != request.upstream_path.end ())
        continue;
      MobileAgent clone;
      clone.id = next_agent_id++;
      clone.mode = AgentMode::Probe;
      clone.home = parent.home;
      clone.location = request.detector;
      clone.lineage = parent.id;
      ProbeContext ctx;
      ctx.source = request.upstream_path.front ();
      ctx.destination = request.destination;
      ctx.divergence_node = request.detector;
      ctx.planned = request.upstream_path;
      ctx.planned.push_back (n);
      ctx.path_so_far = {ctx.source};
      ctx.probe_size = request.probe_size;
      clone.probe = std::move (ctx);
      clones.push_back (std::move (clone));
    }
  if (clones.empty ())
    throw Error (Errc::NoAlternative, "no eligible neighbor at " + topo.Name (request.detector));
  return clones;
}

void
LaunchProbe (MobileAgent &probe, SimTime now)
{
  if (probe.mode != AgentMode::Probe || !probe.probe)
    throw Error (Errc::DomainError, "launch of a non-probe agent");
  ProbeContext &ctx = *probe.probe;
  ctx.injected_at = now;
  ctx.path_so_far = {ctx.source};
  probe.location = ctx.source;
}

namespace {

bool
Visited (const std::vector<NodeId> &path, NodeId n)
{
  return std::find (path.begin (), path.end (), n) != path.end ();
}

std::optional<NodeId>
LeastHopNeighbor (NodeId at, const std::vector<NodeId> &visited, const std::vector<int> &dist,
                  const Topology &topo)
{
  std::optional<NodeId> best;
  int best_dist = std::numeric_limits<int>::max ();
  for (NodeId n : topo.Neighbors (at))
    {
      if (Visited (visited, n) || dist[n.Index ()] < 0)
        continue;
      if (dist[n.Index ()] < best_dist)
        {
          best = n;
          best_dist = dist[n.Index ()];
        }
    }
  return best;
}

} // namespace

ProbeStep
ProbeAdvance (MobileAgent &probe, const Topology &topo, std::span<const RoutingTable> tables)
{
  if (probe.mode != AgentMode::Probe || !probe.probe)
    throw Error (Errc::DomainError, "probe step on a patrol agent");
  ProbeContext &ctx = *probe.probe;
  const NodeId at = probe.location;
  if (at == ctx.destination)
    return ProbeStep{true, at};

  std::optional<NodeId> next;
  const std::size_t idx = ctx.path_so_far.size ();
  if (idx < ctx.planned.size ())
    {
      const NodeId planned = ctx.planned[idx];
      if (topo.Adjacent (at, planned) && !Visited (ctx.path_so_far, planned))
        next = planned;
    }
  else
    {
      if (at.Index () < tables.size ())
        {
          const RouteEntry *e = tables[at.Index ()].Find (ctx.destination);
          if (e && topo.Adjacent (at, e->next_hop) && !Visited (ctx.path_so_far, e->next_hop))
            next = e->next_hop;
        }
      if (!next)
        next = LeastHopNeighbor (at, ctx.path_so_far, topo.HopDistances (ctx.destination), topo);
    }
  if (!next)
    throw Error (Errc::DeadEnd, "probe " + std::to_string (probe.id) + " stuck at " + topo.Name (at));
  probe.location = *next;
  ctx.path_so_far.push_back (*next);
  return ProbeStep{false, *next};
}

std::vector<NodeId>
ExpectedProbePath (const ProbeContext &ctx, const Topology &topo)
{
  MobileAgent scratch;
  scratch.mode = AgentMode::Probe;
  scratch.probe = ctx;
  scratch.probe->path_so_far = {ctx.source};
  scratch.location = ctx.source;
  try
    {
      while (!ProbeAdvance (scratch, topo, {}).arrived)
        {
        }
    }
  catch (const Error &)
    {
      return {};
    }
  return scratch.probe->path_so_far;
}

SimTime
IdlePathDelay (std::span<const NodeId> path, const Topology &topo, double bits)
{
  SimTime total = 0;
  for (std::size_t i = 0; i + 1 < path.size (); ++i)
    {
      const Link *l = topo.LiveLink (path[i], path[i + 1]);
      if (!l)
        throw Error (Errc::MissingLink, "no live link at hop " + std::to_string (i));
      total += TransmissionTime (bits, l->rate_bps) + l->prop_delay;
    }
  return total;
}

ProbeResult
MeasurePathRate (const ProbeContext &ctx, SimTime arrival_time)
{
  const SimTime delay = arrival_time - ctx.injected_at;
  if (delay <= 0)
    throw Error (Errc::ZeroDelay, "probe arrival not after injection");
  ProbeResult r;
  r.path = ctx.path_so_far;
  r.channel_delay = delay;
  r.data_rate = ctx.probe_size / SimTimeToSeconds (delay);
  return r;
}

ProbeResult
SelectPath (std::span<const ProbeResult> results)
{
  if (results.empty ())
    throw Error (Errc::AllProbesFailed, "no probe reported a path");
  auto better = [] (const ProbeResult &x, const ProbeResult &y) {
    if (x.data_rate != y.data_rate)
      return x.data_rate > y.data_rate;
    if (x.Hops () != y.Hops ())
      return x.Hops () < y.Hops ();
    return x.path < y.path;
  };
  const ProbeResult *best = &results[0];
  for (const ProbeResult &r : results)
    if (better (r, *best))
      best = &r;
  return *best;
}

std::size_t
InstallPath (const ProbeResult &winner, std::span<RoutingTable> tables, const Topology &topo, SimTime now)
{
  const auto &path = winner.path;
  if (path.size () < 2)
    throw Error (Errc::PathTooShort, "winner path needs at least two nodes");
  for (std::size_t i = 0; i + 1 < path.size (); ++i)
    {
      if (!topo.Adjacent (path[i], path[i + 1]))
        throw Error (Errc::StalePath, "link " + topo.Name (path[i]) + "-" + topo.Name (path[i + 1]) + " is down");
    }
  const NodeId dest = path.back ();
  std::size_t written = 0;
  for (std::size_t i = 0; i + 1 < path.size (); ++i)
    {
      RoutingTable &table = tables[path[i].Index ()];
      RouteEntry e;
      e.next_hop = path[i + 1];
      e.est_path_rate = winner.data_rate;
      e.congested = false;
      e.updated_at = now;
      if (const RouteEntry *old = table.Find (dest); old && old->updated_at > now)
        e.updated_at = old->updated_at;
      table.Install (dest, e);
      ++written;
    }
  return written;
}

} // namespace macc

#include "macc/sim_engine.hpp"

#include "macc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace macc {

namespace {

constexpr std::uint64_t kTrafficStream = 0x74726166;
constexpr std::uint64_t kPatrolStream = 0x70617472;

std::mt19937_64
SubStream (std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
  std::seed_seq seq{static_cast<std::uint32_t> (seed), static_cast<std::uint32_t> (seed >> 32),
                    static_cast<std::uint32_t> (stream), static_cast<std::uint32_t> (index),
                    static_cast<std::uint32_t> (index >> 32)};
  return std::mt19937_64 (seq);
}

SimTime
FrameTime (double bits, double rate_bps)
{
  return std::max<SimTime> (1, TransmissionTime (bits, rate_bps));
}

} // namespace

std::string_view
ToString (RerouteOutcome o)
{
  switch (o)
    {
    case RerouteOutcome::Installed:
      return "installed";
    case RerouteOutcome::NoAlternative:
      return "no_alternative";
    case RerouteOutcome::AllProbesFailed:
      return "all_probes_failed";
    case RerouteOutcome::StalePath:
      return "stale_path";
    case RerouteOutcome::Aborted:
      return "aborted";
    }
  return "unknown";
}

Simulator::Simulator (const Scenario &scenario, Mode mode, std::uint64_t seed, EngineOptions options)
  : m_scenario (scenario),
    m_mode (mode),
    m_seed (seed),
    m_options (options)
{
  try
    {
      ValidateScenario (m_scenario);
    }
  catch (const Error &e)
    {
      throw Error (Errc::ScenarioInvalid, e.what ());
    }

  m_topo = m_scenario.topology;
  const ProtocolParams &p = m_scenario.params;
  const std::size_t n = m_topo.NodeCount ();

  std::vector<RoutingTable> tables = ShortestHopTables (m_topo, 0);
  m_nodes.reserve (n);
  for (std::size_t i = 0; i < n; ++i)
    {
      m_nodes.emplace_back (NodeId (static_cast<std::uint32_t> (i)), p.queue_capacity);
      m_nodes.back ().routing_table = std::move (tables[i]);
      m_nodes.back ().congestion = MeasureCongestion (m_nodes.back (), 0, p.thresholds);
    }
  m_busy.assign (2 * m_topo.Links ().size (), 0);
  m_data_count.assign (n, {});
  m_last_broadcast.resize (n);
  for (std::size_t i = 0; i < n; ++i)
    m_last_broadcast[i] = m_nodes[i].congestion;
  m_broadcast_mask.assign (n, 0);
  m_high_streak.assign (n, {});
  m_observed.resize (n);

  m_result.mode = mode;
  m_result.seed = seed;
  m_result.duration = m_scenario.duration;
  m_result.flows = m_scenario.flows;

  m_traffic_rng = SubStream (seed, kTrafficStream, 0);
  m_flow_seq.assign (m_scenario.flows.size (), 0);
  m_flow_interval.resize (m_scenario.flows.size ());
  for (std::uint32_t f = 0; f < m_scenario.flows.size (); ++f)
    {
      const Flow &flow = m_scenario.flows[f];
      const SimTime interval = FrameTime (flow.packet_size_bits, flow.rate_bps * p.load_multiplier);
      m_flow_interval[f] = interval;
      std::uniform_int_distribution<SimTime> phase (0, interval - 1);
      const SimTime first = flow.start + phase (m_traffic_rng);
      if (first < flow.stop)
        Schedule (first, EventKind::FlowStart, f);
      Schedule (flow.stop, EventKind::FlowStop, f);
    }

  for (std::uint32_t i = 0; i < m_topo.Events ().size (); ++i)
    Schedule (m_topo.Events ()[i].at, EventKind::LinkEvent, i);

  if (m_mode == Mode::Agent)
    {
      for (std::size_t home = 0; home < n; ++home)
        {
          for (std::size_t k = 0; k < p.agents_per_node; ++k)
            {
              const auto index = static_cast<std::uint32_t> (m_patrols.size ());
              MobileAgent agent = MobileAgent::Patrol (m_next_agent_id++, NodeId (static_cast<std::uint32_t> (home)));
              RecordArrival (agent, agent.home, 0, m_nodes[home].congestion, p.history_limit);
              m_patrols.push_back (std::move (agent));
              m_patrol_rng.push_back (SubStream (seed, kPatrolStream, index));
              std::uniform_int_distribution<SimTime> phase (0, p.patrol_step - 1);
              Schedule (phase (m_patrol_rng.back ()), EventKind::AgentStep, index);
            }
        }
      for (std::uint32_t i = 0; i < n; ++i)
        Schedule (p.propagation_interval, EventKind::CongestionBroadcast, i);
    }
}

void
Simulator::Schedule (SimTime at, EventKind kind, std::uint32_t a, std::uint32_t b, Frame frame)
{
  m_events.push (Event{at, m_seq++, kind, a, b, frame});
}

RunResult
Simulator::Run ()
{
  while (!m_events.empty ())
    {
      Event ev = m_events.top ();
      if (ev.at > m_scenario.duration)
        break;
      m_events.pop ();
      m_now = ev.at;
      Dispatch (ev);
      FlushDirty ();
      ++m_result.events;
    }
  m_result.packets = m_records;
  return m_result;
}

void
Simulator::Dispatch (const Event &ev)
{
  switch (ev.kind)
    {
    case EventKind::FlowStart:
    case EventKind::FlowPacket:
      {
        GeneratePacket (ev.a);
        const SimTime next = m_now + m_flow_interval[ev.a];
        if (next < m_scenario.flows[ev.a].stop)
          Schedule (next, EventKind::FlowPacket, ev.a);
        break;
      }
    case EventKind::FlowStop:
      break;
    case EventKind::PacketArrival:
      OnArrival (NodeId (ev.a), ev.frame);
      break;
    case EventKind::TransmitDone:
      OnTransmitDone (NodeId (ev.a), NodeId (ev.b), ev.frame);
      break;
    case EventKind::AgentStep:
      PatrolStepFor (ev.a);
      break;
    case EventKind::CongestionBroadcast:
      Broadcast (NodeId (ev.a));
      CheckReroute (NodeId (ev.a));
      Schedule (m_now + m_scenario.params.propagation_interval, EventKind::CongestionBroadcast, ev.a);
      break;
    case EventKind::ProbeTimeout:
      if (m_sessions[ev.a].state[ev.b] == CloneState::Pending)
        FailClone (ev.a, ev.b);
      break;
    case EventKind::LinkEvent:
      OnLinkEvent (ev.a);
      break;
    }
}

// --- queues and links --------------------------------------------------------

std::size_t
Simulator::ServerIndex (NodeId from, NodeId to) const
{
  auto idx = m_topo.LinkIndex (from, to);
  if (!idx)
    throw Error (Errc::MissingLink, "no link " + m_topo.Name (from) + "-" + m_topo.Name (to));
  return *idx * 2 + (m_topo.Links ()[*idx].a == from ? 0 : 1);
}

EnqueueResult
Simulator::Enqueue (NodeId node, const Frame &frame)
{
  NodeState &ns = m_nodes.at (node.Index ());
  ClassQueue &q = ns.Queue (frame.cls);
  if (q.Full ())
    return EnqueueResult::Dropped;
  q.items.push_back (frame);
  if (frame.kind == FrameKind::Data)
    {
      ++m_data_count[node.Index ()][ClassIndex (frame.cls)];
      MarkDirty (node);
    }
  if (m_options.auto_service && m_topo.Adjacent (node, frame.next_hop) && !m_busy[ServerIndex (node, frame.next_hop)])
    ServiceNext (node, frame.next_hop);
  return EnqueueResult::Accepted;
}

std::optional<Frame>
Simulator::ServiceNext (NodeId node, NodeId neighbor)
{
  const Link *link = m_topo.LiveLink (node, neighbor);
  if (!link)
    return std::nullopt;
  const std::size_t server = ServerIndex (node, neighbor);
  if (m_busy[server])
    return std::nullopt;
  NodeState &ns = m_nodes[node.Index ()];
  for (TrafficClass cls : kServiceOrder)
    {
      auto &items = ns.Queue (cls).items;
      auto it = std::find_if (items.begin (), items.end (), [&] (const Frame &f) { return f.next_hop == neighbor; });
      if (it == items.end ())
        continue;
      Frame frame = *it;
      items.erase (it);
      if (frame.kind == FrameKind::Data)
        {
          --m_data_count[node.Index ()][ClassIndex (cls)];
          ++m_data_on_links;
          MarkDirty (node);
          m_result.data_bits_sent += frame.size_bits;
        }
      else
        m_result.control_bits_sent += frame.size_bits;
      m_busy[server] = 1;
      const SimTime end = m_now + FrameTime (frame.size_bits, link->rate_bps);
      if (m_options.record_transmissions)
        m_tx_log.push_back (TxRecord{node, neighbor, m_now, end, frame.kind, frame.handle});
      Schedule (end, EventKind::TransmitDone, node.value, neighbor.value, frame);
      return frame;
    }
  return std::nullopt;
}

void
Simulator::OnTransmitDone (NodeId from, NodeId to, const Frame &frame)
{
  m_busy[ServerIndex (from, to)] = 0;
  const Link *link = m_topo.LiveLink (from, to);
  if (!link)
    {
      if (frame.kind == FrameKind::Data)
        {
          --m_data_on_links;
          DropData (frame.handle, PacketFate::DroppedNoRoute);
        }
      else
        OnControlLost (frame);
      return;
    }
  Schedule (m_now + link->prop_delay, EventKind::PacketArrival, to.value, 0, frame);
  ServiceNext (from, to);
}

std::size_t
Simulator::DataFramesInNetwork () const
{
  std::size_t total = m_data_on_links;
  for (const auto &counts : m_data_count)
    for (std::size_t c : counts)
      total += c;
  return total;
}

// --- data traffic ------------------------------------------------------------

NodeId
Simulator::Forward (NodeId node, NodeId destination)
{
  const RouteEntry *e = m_nodes.at (node.Index ()).routing_table.Find (destination);
  if (!e || !m_topo.Adjacent (node, e->next_hop))
    throw Error (Errc::NoRoute, "no route from " + m_topo.Name (node) + " to " + m_topo.Name (destination));
  return e->next_hop;
}

void
Simulator::GeneratePacket (std::uint32_t flow)
{
  const Flow &f = m_scenario.flows[flow];
  const std::uint64_t handle = m_next_handle++;
  PacketRecord rec;
  rec.flow = flow;
  rec.seq = m_flow_seq[flow]++;
  rec.size_bits = f.packet_size_bits;
  rec.created_at = m_now;
  m_records.push_back (rec);
  Packet p;
  p.flow = flow;
  p.record = m_records.size () - 1;
  p.src = f.src;
  p.dst = f.dst;
  p.cls = f.cls;
  p.size_bits = f.packet_size_bits;
  m_packets.emplace (handle, std::move (p));
  HandleDataAt (f.src, handle, true);
}

void
Simulator::HandleDataAt (NodeId node, std::uint64_t handle, bool fresh_hop)
{
  Packet &p = m_packets.at (handle);
  if (fresh_hop)
    p.trace.push_back (node);
  if (node == p.dst)
    {
      DeliverData (handle);
      return;
    }
  if (p.trace.size () > m_topo.NodeCount ())
    {
      DropData (handle, PacketFate::DroppedNoRoute);
      return;
    }
  NodeId next;
  try
    {
      next = Forward (node, p.dst);
    }
  catch (const Error &)
    {
      DropData (handle, PacketFate::DroppedNoRoute);
      return;
    }
  if (m_mode == Mode::Agent)
    {
      // A route carrying traffic stays fresher than any patrol observation.
      m_nodes[node.Index ()].routing_table.Find (p.dst)->updated_at = m_now;
      m_observed[node.Index ()][{p.dst, p.cls}] = TrafficObservation{p.trace, m_now};
    }
  const Frame frame{handle, FrameKind::Data, p.cls, p.size_bits, next};
  if (Enqueue (node, frame) == EnqueueResult::Dropped)
    DropData (handle, PacketFate::DroppedQueue);
}

void
Simulator::DropData (std::uint64_t handle, PacketFate fate)
{
  auto it = m_packets.find (handle);
  m_records[it->second.record].fate = fate;
  m_packets.erase (it);
}

void
Simulator::DeliverData (std::uint64_t handle)
{
  auto it = m_packets.find (handle);
  PacketRecord &rec = m_records[it->second.record];
  rec.fate = PacketFate::Delivered;
  rec.delivered_at = m_now;
  m_packets.erase (it);
}

void
Simulator::OnArrival (NodeId node, const Frame &frame)
{
  if (frame.kind == FrameKind::Data)
    {
      --m_data_on_links;
      HandleDataAt (node, frame.handle, true);
      return;
    }
  auto it = m_controls.find (frame.handle);
  Control &ctl = it->second;
  switch (frame.kind)
    {
    case FrameKind::Patrol:
      {
        const std::uint32_t agent = ctl.agent;
        m_controls.erase (it);
        PatrolArrive (agent, node);
        return;
      }
    case FrameKind::Probe:
      {
        const Control c = ctl;
        m_controls.erase (it);
        if (c.free_probe)
          {
            MobileAgent &probe = m_free_probes[c.clone];
            ProbeStep step;
            try
              {
                step = ProbeAdvance (probe, m_topo, {});
              }
            catch (const Error &)
              {
                return;
              }
            if (step.arrived)
              {
                m_free_results.push_back (MeasurePathRate (*probe.probe, m_now));
                return;
              }
            const std::uint64_t h = m_next_handle++;
            Control next = c;
            m_controls.emplace (h, next);
            if (Enqueue (node, Frame{h, FrameKind::Probe, TrafficClass::Voice, probe.probe->probe_size, step.next})
                == EnqueueResult::Dropped)
              m_controls.erase (h);
            return;
          }
        AdvanceProbe (c.session, c.clone, node);
        return;
      }
    case FrameKind::Notice:
    case FrameKind::ProbeReport:
      {
        ++ctl.hop;
        if (ctl.hop + 1 >= ctl.route.size ())
          {
            const Control c = ctl;
            m_controls.erase (it);
            if (c.kind == FrameKind::Notice)
              LaunchSession (c.session);
            else
              {
                Session &s = m_sessions[c.session];
                if (s.state[c.clone] == CloneState::Arrived)
                  {
                    s.state[c.clone] = CloneState::Reported;
                    MaybeCompleteSession (c.session);
                  }
              }
            return;
          }
        const NodeId next = ctl.route[ctl.hop + 1];
        const Frame fwd{frame.handle, frame.kind, TrafficClass::Voice, frame.size_bits, next};
        if (!m_topo.Adjacent (node, next) || Enqueue (node, fwd) == EnqueueResult::Dropped)
          OnControlLost (fwd);
        return;
      }
    case FrameKind::CongestionReport:
      if (m_topo.Adjacent (node, ctl.from))
        ReceiveCongestion (m_nodes[node.Index ()], ctl.from, ctl.report, m_now);
      m_controls.erase (it);
      return;
    case FrameKind::Data:
      break;
    }
}

void
Simulator::OnControlLost (const Frame &frame)
{
  auto it = m_controls.find (frame.handle);
  if (it == m_controls.end ())
    return;
  const Control c = it->second;
  m_controls.erase (it);
  switch (c.kind)
    {
    case FrameKind::Patrol:
      // The agent never left; it retries on its next tick.
      Schedule (m_now + m_scenario.params.patrol_step, EventKind::AgentStep, c.agent);
      break;
    case FrameKind::Probe:
      if (!c.free_probe)
        FailClone (c.session, c.clone);
      break;
    case FrameKind::Notice:
      {
        Session &s = m_sessions[c.session];
        for (auto &st : s.state)
          st = CloneState::Failed;
        if (s.open)
          {
            s.open = false;
            m_open_sessions.erase ({s.source, s.destination, s.cls});
            RerouteRecord &rec = m_result.reroutes[s.record];
            rec.completed_at = m_now;
            rec.outcome = RerouteOutcome::Aborted;
          }
        break;
      }
    case FrameKind::ProbeReport:
      FailClone (c.session, c.clone);
      break;
    default:
      break;
    }
}

// --- patrol agents -------------------------------------------------------------

void
Simulator::PatrolStepFor (std::uint32_t index)
{
  MobileAgent &agent = m_patrols[index];
  const std::vector<NodeId> neighbors = m_topo.Neighbors (agent.location);
  NodeId next;
  try
    {
      next = PatrolStep (agent, neighbors, m_patrol_rng[index]);
    }
  catch (const Error &)
    {
      Schedule (m_now + m_scenario.params.patrol_step, EventKind::AgentStep, index);
      return;
    }
  const std::uint64_t h = m_next_handle++;
  Control ctl;
  ctl.kind = FrameKind::Patrol;
  ctl.agent = index;
  m_controls.emplace (h, ctl);
  const Frame frame{h, FrameKind::Patrol, TrafficClass::Voice, m_scenario.params.agent_frame_bits, next};
  if (Enqueue (agent.location, frame) == EnqueueResult::Dropped)
    OnControlLost (frame);
}

void
Simulator::PatrolArrive (std::uint32_t index, NodeId node)
{
  MobileAgent &agent = m_patrols[index];
  NodeState &ns = m_nodes[node.Index ()];
  const ProtocolParams &p = m_scenario.params;
  RecordArrival (agent, node, m_now, MeasureCongestion (ns, m_now, p.thresholds), p.history_limit);
  UpdateRoutingTable (ns, agent, m_topo);
  Schedule (m_now + p.patrol_step, EventKind::AgentStep, index);
}

// --- congestion reports and rerouting ----------------------------------------------

std::uint32_t
Simulator::DataMask (NodeId node) const
{
  std::uint32_t mask = 0;
  for (std::size_t c = 0; c < kTrafficClassCount; ++c)
    if (m_data_count[node.Index ()][c] > 0)
      mask |= 1u << c;
  return mask;
}

void
Simulator::MarkDirty (NodeId node)
{
  if (m_mode == Mode::Agent)
    m_dirty.push_back (node);
}

void
Simulator::FlushDirty ()
{
  if (m_dirty.empty ())
    return;
  std::vector<NodeId> dirty;
  dirty.swap (m_dirty);
  std::sort (dirty.begin (), dirty.end ());
  dirty.erase (std::unique (dirty.begin (), dirty.end ()), dirty.end ());
  for (NodeId n : dirty)
    if (DataMask (n) != m_broadcast_mask[n.Index ()])
      Broadcast (n);
  m_dirty.clear ();
}

void
Simulator::Broadcast (NodeId node)
{
  NodeState &ns = m_nodes[node.Index ()];
  const auto messages = PropagateCongestion (ns, m_topo, m_now, m_scenario.params.thresholds);
  m_last_broadcast[node.Index ()] = ns.congestion;
  m_broadcast_mask[node.Index ()] = DataMask (node);
  for (const CongestionMessage &msg : messages)
    {
      const std::uint64_t h = m_next_handle++;
      Control ctl;
      ctl.kind = FrameKind::CongestionReport;
      ctl.from = node;
      ctl.report = msg.report;
      m_controls.emplace (h, ctl);
      const Frame frame{h, FrameKind::CongestionReport, TrafficClass::Voice, m_scenario.params.report_frame_bits,
                        msg.to};
      if (Enqueue (node, frame) == EnqueueResult::Dropped)
        m_controls.erase (h);
    }
}

void
Simulator::CheckReroute (NodeId node)
{
  const ProtocolParams &p = m_scenario.params;
  NodeState &ns = m_nodes[node.Index ()];
  auto &streak = m_high_streak[node.Index ()];
  for (TrafficClass c : kAllClasses)
    streak[ClassIndex (c)] = ns.congestion.LevelOf (c) == CongestionLevel::High ? streak[ClassIndex (c)] + 1 : 0;

  for (const auto &[key, obs] : m_observed[node.Index ()])
    {
      const auto [dest, cls] = key;
      if (streak[ClassIndex (cls)] < p.reroute_sustain_reports)
        continue;
      if (obs.last_seen + p.propagation_interval < m_now)
        continue;
      const RouteEntry *entry = ns.routing_table.Find (dest);
      if (!entry)
        continue;
      const NodeId next_hop = entry->next_hop;

      // The backlog has to sit in front of the link this traffic uses now.
      std::map<NodeId, std::size_t> backlog;
      for (const Frame &f : ns.Queue (cls).items)
        if (f.kind == FrameKind::Data)
          ++backlog[f.next_hop];
      std::size_t worst = 0;
      for (const auto &[hop, count] : backlog)
        worst = std::max (worst, count);
      if (backlog[next_hop] == 0 || backlog[next_hop] < worst)
        continue;

      std::vector<NodeId> path = obs.trace;
      path.push_back (next_hop);
      std::vector<NodeId> flagged;
      try
        {
          flagged = DetectMismatch (path, m_topo);
        }
      catch (const Error &)
        {
          continue;
        }
      if (std::find (flagged.begin (), flagged.end (), node) == flagged.end ())
        continue;

      const NodeId source = obs.trace.front ();
      if (m_open_sessions.contains ({source, dest, cls}))
        continue;

      streak[ClassIndex (cls)] = 0;
      RerouteRecord rec;
      rec.decided_at = m_now;
      rec.detector = node;
      rec.source = source;
      rec.destination = dest;
      rec.cls = cls;

      MobileAgent parent = MobileAgent::Patrol (m_next_agent_id, node);
      for (const MobileAgent &a : m_patrols)
        {
          if (a.location == node)
            {
              parent = a;
              break;
            }
        }
      RerouteRequest request{node, next_hop, dest, obs.trace, p.probe_size_bits};
      std::vector<MobileAgent> clones;
      try
        {
          clones = InitiateReroute (request, parent, m_topo, m_next_agent_id);
        }
      catch (const Error &e)
        {
          if (e.Code () != Errc::NoAlternative)
            throw;
          rec.completed_at = m_now;
          rec.outcome = RerouteOutcome::NoAlternative;
          m_result.reroutes.push_back (std::move (rec));
          continue;
        }
      rec.probes = clones.size ();
      m_result.reroutes.push_back (std::move (rec));

      Session s;
      s.source = source;
      s.destination = dest;
      s.cls = cls;
      s.state.assign (clones.size (), CloneState::Pending);
      s.results.resize (clones.size ());
      s.clones = std::move (clones);
      s.record = m_result.reroutes.size () - 1;
      const auto sid = static_cast<std::uint32_t> (m_sessions.size ());
      m_sessions.push_back (std::move (s));
      m_open_sessions[{source, dest, cls}] = sid;

      // The detector tells the source, which launches the probes.
      std::vector<NodeId> back (obs.trace.rbegin (), obs.trace.rend ());
      if (back.size () < 2)
        LaunchSession (sid);
      else
        {
          Control ctl;
          ctl.session = sid;
          if (!SendRouted (FrameKind::Notice, back, p.agent_frame_bits, ctl))
            {
              Session &sess = m_sessions[sid];
              sess.open = false;
              m_open_sessions.erase ({source, dest, cls});
              m_result.reroutes[sess.record].outcome = RerouteOutcome::Aborted;
              m_result.reroutes[sess.record].completed_at = m_now;
            }
        }
    }
}

bool
Simulator::SendRouted (FrameKind kind, std::vector<NodeId> route, double bits, Control ctl)
{
  if (route.size () < 2 || !m_topo.Adjacent (route[0], route[1]))
    return false;
  ctl.kind = kind;
  ctl.hop = 0;
  ctl.route = std::move (route);
  const NodeId origin = ctl.route[0];
  const NodeId next = ctl.route[1];
  const std::uint64_t h = m_next_handle++;
  m_controls.emplace (h, std::move (ctl));
  if (Enqueue (origin, Frame{h, kind, TrafficClass::Voice, bits, next}) == EnqueueResult::Dropped)
    {
      m_controls.erase (h);
      return false;
    }
  return true;
}

void
Simulator::LaunchSession (std::uint32_t sid)
{
  const ProtocolParams &p = m_scenario.params;
  for (std::uint32_t c = 0; c < m_sessions[sid].clones.size (); ++c)
    {
      MobileAgent &clone = m_sessions[sid].clones[c];
      LaunchProbe (clone, m_now);
      std::vector<NodeId> expected = ExpectedProbePath (*clone.probe, m_topo);
      SimTime idle = 0;
      try
        {
          idle = IdlePathDelay (expected.empty () ? clone.probe->planned : expected, m_topo, clone.probe->probe_size);
        }
      catch (const Error &)
        {
          FailClone (sid, c);
          continue;
        }
      const auto timeout = static_cast<SimTime> (std::llround (p.probe_timeout_factor * static_cast<double> (idle)));
      Schedule (m_now + std::max<SimTime> (1, timeout), EventKind::ProbeTimeout, sid, c);
      AdvanceProbe (sid, c, clone.probe->source);
    }
}

void
Simulator::AdvanceProbe (std::uint32_t sid, std::uint32_t c, NodeId)
{
  Session &s = m_sessions[sid];
  if (s.state[c] != CloneState::Pending)
    return;
  MobileAgent &clone = s.clones[c];
  std::vector<RoutingTable> tables;
  tables.reserve (m_nodes.size ());
  for (const NodeState &ns : m_nodes)
    tables.push_back (ns.routing_table);
  ProbeStep step;
  try
    {
      step = ProbeAdvance (clone, m_topo, tables);
    }
  catch (const Error &)
    {
      FailClone (sid, c);
      return;
    }
  if (step.arrived)
    {
      s.results[c] = MeasurePathRate (*clone.probe, m_now);
      s.state[c] = CloneState::Arrived;
      const auto &path = clone.probe->path_so_far;
      Control ctl;
      ctl.session = sid;
      ctl.clone = c;
      if (!SendRouted (FrameKind::ProbeReport, std::vector<NodeId> (path.rbegin (), path.rend ()),
                       m_scenario.params.agent_frame_bits, ctl))
        FailClone (sid, c);
      return;
    }
  const std::uint64_t h = m_next_handle++;
  Control ctl;
  ctl.kind = FrameKind::Probe;
  ctl.session = sid;
  ctl.clone = c;
  m_controls.emplace (h, ctl);
  const NodeId from = clone.probe->path_so_far[clone.probe->path_so_far.size () - 2];
  const Frame frame{h, FrameKind::Probe, TrafficClass::Voice, clone.probe->probe_size, step.next};
  if (Enqueue (from, frame) == EnqueueResult::Dropped)
    OnControlLost (frame);
}

void
Simulator::FailClone (std::uint32_t sid, std::uint32_t c)
{
  Session &s = m_sessions[sid];
  if (s.state[c] == CloneState::Pending || s.state[c] == CloneState::Arrived)
    {
      s.state[c] = CloneState::Failed;
      MaybeCompleteSession (sid);
    }
}

void
Simulator::MaybeCompleteSession (std::uint32_t sid)
{
  Session &s = m_sessions[sid];
  if (!s.open)
    return;
  for (CloneState st : s.state)
    if (st == CloneState::Pending || st == CloneState::Arrived)
      return;
  s.open = false;
  m_open_sessions.erase ({s.source, s.destination, s.cls});

  RerouteRecord &rec = m_result.reroutes[s.record];
  rec.completed_at = m_now;
  for (std::size_t c = 0; c < s.state.size (); ++c)
    if (s.state[c] == CloneState::Reported)
      rec.results.push_back (*s.results[c]);
  m_high_streak[rec.detector.Index ()][ClassIndex (s.cls)] = 0;
  if (rec.results.empty ())
    {
      rec.outcome = RerouteOutcome::AllProbesFailed;
      return;
    }
  const ProbeResult winner = SelectPath (rec.results);
  rec.winner = winner;
  std::vector<RoutingTable> tables;
  tables.reserve (m_nodes.size ());
  for (const NodeState &ns : m_nodes)
    tables.push_back (ns.routing_table);
  try
    {
      InstallPath (winner, tables, m_topo, m_now);
    }
  catch (const Error &e)
    {
      if (e.Code () != Errc::StalePath)
        throw;
      rec.outcome = RerouteOutcome::StalePath;
      return;
    }
  for (std::size_t i = 0; i < m_nodes.size (); ++i)
    m_nodes[i].routing_table = std::move (tables[i]);
  rec.outcome = RerouteOutcome::Installed;
}

void
Simulator::InjectProbe (MobileAgent probe)
{
  if (!probe.probe)
    throw Error (Errc::DomainError, "injected agent is not a probe");
  m_free_probes.push_back (std::move (probe));
  const auto index = static_cast<std::uint32_t> (m_free_probes.size () - 1);
  MobileAgent &p = m_free_probes.back ();
  const NodeId at = p.location;
  ProbeStep step = ProbeAdvance (p, m_topo, {});
  if (step.arrived)
    return;
  const std::uint64_t h = m_next_handle++;
  Control ctl;
  ctl.kind = FrameKind::Probe;
  ctl.free_probe = true;
  ctl.clone = index;
  m_controls.emplace (h, ctl);
  if (Enqueue (at, Frame{h, FrameKind::Probe, TrafficClass::Voice, p.probe->probe_size, step.next})
      == EnqueueResult::Dropped)
    m_controls.erase (h);
}

// --- topology changes -------------------------------------------------------------

void
Simulator::RefillTables ()
{
  std::vector<RoutingTable> fresh = ShortestHopTables (m_topo, m_now);
  for (std::size_t i = 0; i < m_nodes.size (); ++i)
    for (const auto &[dest, entry] : fresh[i].Entries ())
      if (!m_nodes[i].routing_table.Find (dest))
        m_nodes[i].routing_table.Install (dest, entry);
}

void
Simulator::OnLinkEvent (std::size_t index)
{
  const LinkEvent &ev = m_scenario.topology.Events ()[index];
  if (!m_topo.Apply (ev))
    return;

  std::vector<std::pair<NodeId, Frame>> stranded;
  if (ev.kind == LinkEventKind::Down)
    {
      for (auto [from, to] : {std::pair{ev.a, ev.b}, std::pair{ev.b, ev.a}})
        {
          NodeState &ns = m_nodes[from.Index ()];
          for (auto &q : ns.queues)
            {
              for (auto it = q.items.begin (); it != q.items.end ();)
                {
                  if (it->next_hop == to)
                    {
                      if (it->kind == FrameKind::Data)
                        {
                          --m_data_count[from.Index ()][ClassIndex (it->cls)];
                          MarkDirty (from);
                        }
                      stranded.emplace_back (from, *it);
                      it = q.items.erase (it);
                    }
                  else
                    ++it;
                }
            }
          ns.neighbor_views.erase (to);
        }
    }

  if (m_mode == Mode::Baseline)
    {
      std::vector<RoutingTable> tables = ShortestHopTables (m_topo, m_now);
      for (std::size_t i = 0; i < m_nodes.size (); ++i)
        m_nodes[i].routing_table = std::move (tables[i]);
    }
  else if (ev.kind != LinkEventKind::Rate)
    {
      for (NodeState &ns : m_nodes)
        ns.routing_table.PurgeDeadNextHops (m_topo);
      RefillTables ();
    }

  for (const auto &[node, frame] : stranded)
    {
      if (frame.kind == FrameKind::Data)
        HandleDataAt (node, frame.handle, false);
      else
        OnControlLost (frame);
    }
}

// --- free functions ---------------------------------------------------------------

RunResult
RunScenario (const Scenario &scenario, Mode mode, std::uint64_t seed)
{
  Simulator sim (scenario, mode, seed);
  return sim.Run ();
}

ProbeResult
MeasureIdlePath (const Topology &topo, std::span<const NodeId> path, double probe_bits)
{
  if (path.size () < 2)
    throw Error (Errc::PathTooShort, "probe path needs at least two nodes");
  Scenario s;
  s.name = "idle-probe";
  s.topology = topo;
  s.params.agents_per_node = 0;
  s.params.probe_size_bits = probe_bits;
  s.duration = 10 * IdlePathDelay (path, topo, probe_bits) + kNanosPerSecond;

  MobileAgent probe;
  probe.mode = AgentMode::Probe;
  ProbeContext ctx;
  ctx.source = path.front ();
  ctx.destination = path.back ();
  ctx.divergence_node = path.front ();
  ctx.planned.assign (path.begin (), path.end ());
  ctx.probe_size = probe_bits;
  probe.probe = ctx;
  LaunchProbe (probe, 0);

  Simulator sim (s, Mode::Baseline, 0);
  sim.InjectProbe (std::move (probe));
  sim.Run ();
  if (sim.ProbeResults ().empty ())
    throw Error (Errc::DeadEnd, "probe did not reach the end of the path");
  return sim.ProbeResults ().front ();
}

} // namespace macc

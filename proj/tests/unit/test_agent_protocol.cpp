#include "macc/agent_protocol.hpp"
#include "macc/sim_engine.hpp"

#include "check.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace macc;
using namespace macc::testing;

namespace {

CongestionReport
Quiet (SimTime at)
{
  CongestionReport r;
  r.measured_at = at;
  return r;
}

CongestionReport
Hot (SimTime at)
{
  CongestionReport r = Quiet (at);
  r.occupancy[ClassIndex (TrafficClass::BestEffort)] = 1.0;
  r.level[ClassIndex (TrafficClass::BestEffort)] = CongestionLevel::High;
  return r;
}

MobileAgent
Walk (const Topology &t, std::initializer_list<const char *> nodes, SimTime step = 10)
{
  MobileAgent a = MobileAgent::Patrol (1, t.Require (*nodes.begin ()));
  SimTime at = step;
  for (const char *n : nodes)
    {
      RecordArrival (a, t.Require (n), at, Quiet (at), 64);
      at += step;
    }
  return a;
}

MobileAgent
ProbeAt (const Topology &t, const char *at, const char *dst, std::vector<NodeId> visited)
{
  MobileAgent p;
  p.mode = AgentMode::Probe;
  p.location = t.Require (at);
  ProbeContext ctx;
  ctx.source = visited.front ();
  ctx.destination = t.Require (dst);
  ctx.path_so_far = std::move (visited);
  p.probe = ctx;
  return p;
}

RerouteRequest
CanonicalRequest (const Topology &t)
{
  RerouteRequest req;
  req.detector = t.Require ("F");
  req.congested_next_hop = t.Require ("H");
  req.destination = t.Require ("H");
  req.upstream_path = Path (t, {"S", "B", "D", "F"});
  return req;
}

} // namespace

TEST_SUITE ("patrol_step")
{
  TEST_CASE ("singleton neighbour set")
  {
    std::mt19937_64 rng (1);
    const MobileAgent a = MobileAgent::Patrol (0, NodeId (0));
    const std::vector<NodeId> one{NodeId (4)};
    for (int i = 0; i < 10; ++i)
      CHECK (PatrolStep (a, one, rng) == NodeId (4));
  }

  TEST_CASE ("isolated agent stays and records nothing")
  {
    std::mt19937_64 rng (1);
    MobileAgent a = MobileAgent::Patrol (0, NodeId (2));
    CHECK_ERRC (PatrolStep (a, {}, rng), Errc::Isolated);
    CHECK (a.location == NodeId (2));
    CHECK (a.history.empty ());
  }

  TEST_CASE ("three neighbours are drawn uniformly")
  {
    std::mt19937_64 rng (2024);
    const MobileAgent a = MobileAgent::Patrol (0, NodeId (0));
    const std::vector<NodeId> nbrs{NodeId (1), NodeId (3), NodeId (5)};
    std::vector<std::uint64_t> counts (3, 0);
    for (int i = 0; i < 30000; ++i)
      {
        const NodeId n = PatrolStep (a, nbrs, rng);
        ++counts[static_cast<std::size_t> (std::find (nbrs.begin (), nbrs.end (), n) - nbrs.begin ())];
      }
    CHECK (ChiSquareStatistic (counts) < ChiSquareCritical99 (2));
  }

  TEST_CASE ("probe agents cannot patrol")
  {
    std::mt19937_64 rng (1);
    MobileAgent a;
    a.mode = AgentMode::Probe;
    const std::vector<NodeId> one{NodeId (1)};
    CHECK_ERRC (PatrolStep (a, one, rng), Errc::DomainError);
  }

  TEST_CASE ("random walks cover small connected graphs")
  {
    std::mt19937_64 graphs (99);
    for (std::uint64_t seed = 0; seed < 100; ++seed)
      {
        const Topology t = RandomConnectedTopology (graphs, 4 + seed % 9, 0.15);
        std::mt19937_64 rng (seed);
        MobileAgent a = MobileAgent::Patrol (seed, NodeId (0));
        std::set<NodeId> seen{a.location};
        for (int step = 0; step < 10000 && seen.size () < t.NodeCount (); ++step)
          {
            const auto nbrs = t.Neighbors (a.location);
            a.location = PatrolStep (a, nbrs, rng);
            seen.insert (a.location);
          }
        CHECK (seen.size () == t.NodeCount ());
      }
  }
}

TEST_SUITE ("history")
{
  TEST_CASE ("arrivals are strictly increasing and capped")
  {
    MobileAgent a = MobileAgent::Patrol (0, NodeId (0));
    for (SimTime t = 1; t <= 10; ++t)
      RecordArrival (a, NodeId (static_cast<std::uint32_t> (t % 3)), t, Quiet (t), 4);
    CHECK (a.history.size () == 4);
    CHECK (a.history.front ().arrived_at == 7);
    CHECK (a.location == NodeId (1));
    CHECK_ERRC (RecordArrival (a, NodeId (0), 10, Quiet (10), 4), Errc::DomainError);
    CHECK_ERRC (RecordArrival (a, NodeId (0), 11, Quiet (12), 4), Errc::DomainError);
  }
}

TEST_SUITE ("update_routing_table")
{
  TEST_CASE ("empty history changes nothing")
  {
    const Topology t = ExampleTopology ();
    RoutingTable table (t.Require ("F"));
    CHECK (UpdateRoutingTable (table, MobileAgent::Patrol (0, t.Require ("F")), t) == 0);
    CHECK (table.Size () == 0);
  }

  TEST_CASE ("two-step walk replaces an older entry")
  {
    const Topology t = ExampleTopology ();
    const MobileAgent a = Walk (t, {"H", "G", "F"}); // visits at 10, 20, 30
    RoutingTable table (t.Require ("F"));
    table.Install (t.Require ("H"), RouteEntry{t.Require ("H"), 1e6, false, 5});
    CHECK (UpdateRoutingTable (table, a, t) == 2);
    const RouteEntry *h = table.Find (t.Require ("H"));
    REQUIRE (h != nullptr);
    CHECK (h->next_hop == t.Require ("G"));
    CHECK (h->est_path_rate == 5.5e6);
    CHECK (h->updated_at == 10);
    CHECK_FALSE (h->congested);
    CHECK (table.Find (t.Require ("G"))->next_hop == t.Require ("G"));
  }

  TEST_CASE ("stale agent information is ignored")
  {
    const Topology t = ExampleTopology ();
    const MobileAgent a = Walk (t, {"H", "G", "F"});
    RoutingTable table (t.Require ("F"));
    const RouteEntry fresh{t.Require ("H"), 1e6, false, 15};
    table.Install (t.Require ("H"), fresh);
    table.Install (t.Require ("G"), RouteEntry{t.Require ("G"), 5.5e6, false, 25});
    CHECK (UpdateRoutingTable (table, a, t) == 0);
    CHECK (*table.Find (t.Require ("H")) == fresh);
  }

  TEST_CASE ("loops in the walk are erased")
  {
    const Topology t = ExampleTopology ();
    const MobileAgent a = Walk (t, {"H", "G", "F", "D", "F"});
    RoutingTable table (t.Require ("F"));
    UpdateRoutingTable (table, a, t);
    CHECK (table.Find (t.Require ("H"))->next_hop == t.Require ("G"));
    CHECK (table.Find (t.Require ("D"))->next_hop == t.Require ("D"));
    CHECK (table.Find (t.Require ("D"))->updated_at == 40);
  }

  TEST_CASE ("a High report on the segment marks the route congested")
  {
    const Topology t = ExampleTopology ();
    MobileAgent a = MobileAgent::Patrol (0, t.Require ("H"));
    RecordArrival (a, t.Require ("H"), 10, Quiet (10), 64);
    RecordArrival (a, t.Require ("G"), 20, Hot (20), 64);
    RecordArrival (a, t.Require ("F"), 30, Quiet (30), 64);
    RoutingTable table (t.Require ("F"));
    UpdateRoutingTable (table, a, t);
    CHECK (table.Find (t.Require ("H"))->congested);
  }

  TEST_CASE ("agent must be at the table's node")
  {
    const Topology t = ExampleTopology ();
    RoutingTable table (t.Require ("D"));
    CHECK_ERRC (UpdateRoutingTable (table, Walk (t, {"H", "G", "F"}), t), Errc::DomainError);
  }
}

TEST_SUITE ("propagate_congestion")
{
  TEST_CASE ("isolated node sends nothing")
  {
    const Topology t = MakeTopology ({"A", "B"}, {});
    NodeState n (NodeId (0), 50);
    CHECK (PropagateCongestion (n, t, 0).empty ());
  }

  TEST_CASE ("one identical message per live neighbour")
  {
    const Topology t = StarTopology (3);
    NodeState hub (NodeId (0), 50);
    for (int i = 0; i < 45; ++i)
      hub.Queue (TrafficClass::Video).items.push_back (Frame{});
    const auto msgs = PropagateCongestion (hub, t, 77);
    REQUIRE (msgs.size () == 3);
    for (std::size_t i = 0; i < 3; ++i)
      {
        CHECK (msgs[i].to == NodeId (static_cast<std::uint32_t> (i + 1)));
        CHECK (msgs[i].report == msgs[0].report);
      }
    CHECK (msgs[0].report.LevelOf (TrafficClass::Video) == CongestionLevel::High);
    CHECK (hub.priority == kMaxPriority - 8);

    NodeState leaf (NodeId (1), 50);
    ReceiveCongestion (leaf, NodeId (0), msgs[0].report, 80);
    CHECK (leaf.neighbor_views.at (NodeId (0)).report == msgs[0].report);
    CHECK (leaf.neighbor_views.at (NodeId (0)).received_at == 80);
  }
}

TEST_SUITE ("initiate_reroute")
{
  TEST_CASE ("canonical detector F clones towards E and G")
  {
    const Topology t = CanonicalScenario ().topology;
    AgentId next = 100;
    const MobileAgent parent = MobileAgent::Patrol (7, t.Require ("S"));
    const auto clones = InitiateReroute (CanonicalRequest (t), parent, t, next);
    REQUIRE (clones.size () == 2);
    CHECK (clones[0].probe->planned.back () == t.Require ("E"));
    CHECK (clones[1].probe->planned.back () == t.Require ("G"));
    for (const MobileAgent &c : clones)
      {
        CHECK (c.mode == AgentMode::Probe);
        CHECK (c.lineage == AgentId (7));
        CHECK (c.probe->divergence_node == t.Require ("F"));
        CHECK (c.probe->source == t.Require ("S"));
        CHECK (c.probe->destination == t.Require ("H"));
        CHECK (c.probe->path_so_far == Path (t, {"S"}));
      }
    CHECK (clones[0].id != clones[1].id);
    CHECK (next == 102);
  }

  TEST_CASE ("single neighbour that is the congested hop")
  {
    const Topology t = MakeTopology ({"A", "B"}, {{"A", "B", 1e6}});
    RerouteRequest req;
    req.detector = NodeId (0);
    req.congested_next_hop = NodeId (1);
    req.destination = NodeId (1);
    req.upstream_path = {NodeId (0)};
    AgentId next = 0;
    CHECK_ERRC (InitiateReroute (req, MobileAgent::Patrol (0, NodeId (0)), t, next), Errc::NoAlternative);
  }

  TEST_CASE ("four eligible neighbours give four clones")
  {
    // hub H with six spokes: L0 upstream, L1 congested
    const Topology t = StarTopology (6);
    RerouteRequest req;
    req.detector = t.Require ("H");
    req.congested_next_hop = t.Require ("L1");
    req.destination = t.Require ("L1");
    req.upstream_path = Path (t, {"L0", "H"});
    AgentId next = 10;
    const auto clones = InitiateReroute (req, MobileAgent::Patrol (3, t.Require ("L0")), t, next);
    REQUIRE (clones.size () == 4);
    std::set<AgentId> ids;
    for (const MobileAgent &c : clones)
      {
        ids.insert (c.id);
        CHECK (c.lineage == AgentId (3));
      }
    CHECK (ids.size () == 4);
  }
}

TEST_SUITE ("probe_advance")
{
  TEST_CASE ("one hop to the destination")
  {
    const Topology t = ExampleTopology ();
    MobileAgent p = ProbeAt (t, "G", "H", Path (t, {"F", "G"}));
    const ProbeStep s = ProbeAdvance (p, t, {});
    CHECK_FALSE (s.arrived);
    CHECK (s.next == t.Require ("H"));
    CHECK (ProbeAdvance (p, t, {}).arrived);
    CHECK (p.probe->path_so_far == Path (t, {"F", "G", "H"}));
  }

  TEST_CASE ("all neighbours already visited")
  {
    const Topology t = MakeTopology ({"A", "B", "C", "D"}, {{"A", "B", 1e6}, {"B", "C", 1e6}, {"C", "D", 1e6}});
    MobileAgent p = ProbeAt (t, "B", "D", Path (t, {"C", "A", "B"}));
    CHECK_ERRC (ProbeAdvance (p, t, {}), Errc::DeadEnd);
  }

  TEST_CASE ("canonical clone via E reaches H along S-B-D-F-E-H")
  {
    const Topology t = CanonicalScenario ().topology;
    AgentId next = 0;
    auto clones = InitiateReroute (CanonicalRequest (t), MobileAgent::Patrol (0, t.Require ("S")), t, next);
    MobileAgent &via_e = clones[0];
    LaunchProbe (via_e, 0);
    while (!ProbeAdvance (via_e, t, {}).arrived)
      {
      }
    CHECK (via_e.probe->path_so_far == Path (t, {"S", "B", "D", "F", "E", "H"}));
    CHECK (ExpectedProbePath (*clones[1].probe, t) == Path (t, {"S", "B", "D", "F", "G", "H"}));
  }

  TEST_CASE ("loop-free table entries are preferred over the least-hop fallback")
  {
    const Topology t = ExampleTopology ();
    auto tables = ShortestHopTables (t);
    // steer F towards H via G
    tables[t.Require ("F").Index ()].Install (t.Require ("H"), RouteEntry{t.Require ("G"), 5.5e6, false, 1});
    MobileAgent p = ProbeAt (t, "F", "H", Path (t, {"D", "F"}));
    CHECK (ProbeAdvance (p, t, tables).next == t.Require ("G"));
    // an entry pointing back into the path is skipped
    tables[t.Require ("F").Index ()].Install (t.Require ("H"), RouteEntry{t.Require ("D"), 2e6, false, 2});
    MobileAgent q = ProbeAt (t, "F", "H", Path (t, {"D", "F"}));
    CHECK (ProbeAdvance (q, t, tables).next == t.Require ("H"));
  }
}

TEST_SUITE ("measure_path_rate")
{
  TEST_CASE ("data rate is size over channel delay")
  {
    ProbeContext ctx;
    ctx.path_so_far = {NodeId (0), NodeId (1)};
    ctx.probe_size = 8000.0;
    ctx.injected_at = 1'000'000;
    const ProbeResult r = MeasurePathRate (ctx, 9'000'000);
    CHECK (r.channel_delay == 8'000'000);
    CHECK (r.ChannelDelaySeconds () == doctest::Approx (0.008));
    CHECK (r.data_rate == doctest::Approx (1e6));
    CHECK_ERRC (MeasurePathRate (ctx, 1'000'000), Errc::ZeroDelay);
  }

  TEST_CASE ("one hop at 11 Mbps through the simulated link")
  {
    const Topology t = MakeTopology ({"A", "B"}, {{"A", "B", 11e6}});
    const ProbeResult r = MeasureIdlePath (t, Path (t, {"A", "B"}), 8000.0);
    CHECK (r.channel_delay == 727'273);
    CHECK (r.data_rate == doctest::Approx (11e6).epsilon (1e-3));
  }

  TEST_CASE ("two hops at 2 Mbps")
  {
    const Topology t = MakeTopology ({"A", "B", "C"}, {{"A", "B", 2e6}, {"B", "C", 2e6}});
    const ProbeResult r = MeasureIdlePath (t, Path (t, {"A", "B", "C"}), 8000.0);
    CHECK (r.channel_delay == 8'000'000);
    CHECK (r.data_rate == doctest::Approx (1e6));
  }

  TEST_CASE ("canonical candidate paths")
  {
    const Topology t = CanonicalScenario ().topology;
    const ProbeResult p1 = MeasureIdlePath (t, Path (t, {"S", "B", "D", "F", "E", "H"}), 8000.0);
    const ProbeResult p2 = MeasureIdlePath (t, Path (t, {"S", "B", "D", "F", "G", "H"}), 8000.0);
    // 8000 / (3 * 8000/11e6 + 2 * 8000/2e6) and the same with 5.5e6
    CHECK (p1.data_rate == doctest::Approx (785714.2857).epsilon (1e-3));
    CHECK (p2.data_rate == doctest::Approx (1571428.5714).epsilon (1e-3));
  }

  TEST_CASE ("propagation delay adds to every hop")
  {
    const Topology t = MakeTopology ({"A", "B", "C"}, {{"A", "B", 2e6}, {"B", "C", 2e6}}, 500'000);
    const ProbeResult r = MeasureIdlePath (t, Path (t, {"A", "B", "C"}), 8000.0);
    CHECK (r.channel_delay == 9'000'000);
    CHECK (r.channel_delay == IdlePathDelay (r.path, t, 8000.0));
  }

  TEST_CASE ("measured rate never exceeds the bottleneck")
  {
    std::mt19937_64 rng (5);
    for (int g = 0; g < 5; ++g)
      {
        const Topology t = RandomConnectedTopology (rng, 6, 0.4);
        for (const auto &path : AllSimplePaths (t, 4))
          {
            const ProbeResult r = MeasureIdlePath (t, path, 8000.0);
            const double bottleneck = BottleneckRate (path, t);
            CHECK (r.data_rate <= bottleneck * (1 + 1e-6));
            if (path.size () > 2)
              CHECK (r.data_rate < bottleneck);
          }
      }
  }
}

TEST_SUITE ("select_path")
{
  const ProbeResult kP1{{NodeId (0), NodeId (2), NodeId (4), NodeId (6), NodeId (5), NodeId (8)}, 10'181'818, 785714.3};
  const ProbeResult kP2{{NodeId (0), NodeId (2), NodeId (4), NodeId (6), NodeId (7), NodeId (8)}, 5'090'909, 1571428.6};

  TEST_CASE ("highest data rate wins")
  {
    const std::vector<ProbeResult> in{kP1, kP2};
    CHECK (SelectPath (in) == kP2);
  }

  TEST_CASE ("single result")
  {
    const std::vector<ProbeResult> in{kP1};
    CHECK (SelectPath (in) == kP1);
  }

  TEST_CASE ("equal rates prefer fewer hops, then the smaller id sequence")
  {
    const ProbeResult five{{NodeId (0), NodeId (1), NodeId (2), NodeId (3), NodeId (4), NodeId (9)}, 1, 1e6};
    const ProbeResult six{{NodeId (0), NodeId (1), NodeId (2), NodeId (3), NodeId (4), NodeId (5), NodeId (9)}, 1, 1e6};
    const std::vector<ProbeResult> in{six, five};
    CHECK (SelectPath (in) == five);
    const ProbeResult other{{NodeId (0), NodeId (1), NodeId (2), NodeId (3), NodeId (7), NodeId (9)}, 1, 1e6};
    const std::vector<ProbeResult> tie{other, five};
    CHECK (SelectPath (tie) == five);
  }

  TEST_CASE ("invariant under input order")
  {
    std::vector<ProbeResult> in{kP1, kP2,
                                ProbeResult{{NodeId (0), NodeId (3), NodeId (8)}, 1, 1571428.6},
                                ProbeResult{{NodeId (0), NodeId (1), NodeId (8)}, 1, 1571428.6}};
    std::sort (in.begin (), in.end (), [] (const ProbeResult &a, const ProbeResult &b) { return a.path < b.path; });
    const ProbeResult expected = SelectPath (in);
    CHECK (expected.path == std::vector<NodeId>{NodeId (0), NodeId (1), NodeId (8)});
    do
      CHECK (SelectPath (in) == expected);
    while (std::next_permutation (in.begin (), in.end (),
                                  [] (const ProbeResult &a, const ProbeResult &b) { return a.path < b.path; }));
  }

  TEST_CASE ("no results")
  {
    CHECK_ERRC (SelectPath ({}), Errc::AllProbesFailed);
  }
}

TEST_SUITE ("install_path")
{
  TEST_CASE ("canonical winner writes five entries")
  {
    const Topology t = CanonicalScenario ().topology;
    auto tables = ShortestHopTables (t);
    const ProbeResult winner{Path (t, {"S", "B", "D", "F", "G", "H"}), 5'090'909, 1571428.6};
    CHECK (InstallPath (winner, tables, t, 1000) == 5);
    const NodeId h = t.Require ("H");
    CHECK (tables[t.Require ("F").Index ()].Find (h)->next_hop == t.Require ("G"));
    CHECK (tables[t.Require ("G").Index ()].Find (h)->next_hop == h);
    CHECK (tables[t.Require ("S").Index ()].Find (h)->est_path_rate == 1571428.6);
    CHECK (tables[t.Require ("D").Index ()].Find (h)->updated_at == 1000);

    SUBCASE ("reinstalling refreshes timestamps only")
    {
      const auto before = tables;
      CHECK (InstallPath (winner, tables, t, 2000) == 5);
      for (NodeId n : winner.path)
        {
          if (n == h)
            continue;
          const RouteEntry *now = tables[n.Index ()].Find (h);
          const RouteEntry *was = before[n.Index ()].Find (h);
          CHECK (now->next_hop == was->next_hop);
          CHECK (now->updated_at == 2000);
          CHECK (was->updated_at == 1000);
        }
    }
  }

  TEST_CASE ("a dead link makes the path stale")
  {
    Topology t = CanonicalScenario ().topology;
    t.Apply (LinkEvent{0, LinkEventKind::Down, t.Require ("G"), t.Require ("H"), 0.0});
    auto tables = ShortestHopTables (t);
    const auto before = tables;
    const ProbeResult winner{Path (t, {"S", "B", "D", "F", "G", "H"}), 5'090'909, 1571428.6};
    CHECK_ERRC (InstallPath (winner, tables, t, 1000), Errc::StalePath);
    CHECK (tables == before);
  }
}

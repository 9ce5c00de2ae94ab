#ifndef MACC_TESTS_FIXTURES_HPP
#define MACC_TESTS_FIXTURES_HPP

#include "macc/scenario.hpp"
#include "macc/scenario_io.hpp"

#include "oracles.hpp"

#include <initializer_list>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#ifndef MACC_SOURCE_DIR
#error "MACC_SOURCE_DIR must point at the source tree"
#endif

namespace macc::testing {

inline std::string
SourcePath (const std::string &relative)
{
  return std::string (MACC_SOURCE_DIR) + "/" + relative;
}

inline Scenario
CanonicalScenario ()
{
  return LoadScenarioFile (SourcePath ("scenarios/canonical.json"));
}

struct LinkSpec
{
  const char *a;
  const char *b;
  double rate_bps;
};

inline Topology
MakeTopology (std::vector<std::string> names, std::initializer_list<LinkSpec> specs, SimTime prop_delay = 0)
{
  Topology scratch (names, {});
  std::vector<Link> links;
  for (const LinkSpec &s : specs)
    {
      Link l;
      l.a = scratch.Require (s.a);
      l.b = scratch.Require (s.b);
      l.rate_bps = s.rate_bps;
      l.prop_delay = prop_delay;
      links.push_back (l);
    }
  return Topology (std::move (names), std::move (links));
}

/// The multi-rate example network: a fast chain A-B-D-F feeding a slow F-H hop.
inline Topology
ExampleTopology ()
{
  return MakeTopology ({"A", "B", "C", "D", "E", "F", "G", "H"},
                       {{"A", "B", 11e6},
                        {"A", "C", 5.5e6},
                        {"B", "D", 11e6},
                        {"C", "E", 2e6},
                        {"D", "F", 11e6},
                        {"F", "H", 1e6},
                        {"F", "G", 5.5e6},
                        {"G", "H", 5.5e6},
                        {"E", "H", 2e6}});
}

/// Hub "H" joined to `leaves` spokes named L0, L1, ...
inline Topology
StarTopology (std::size_t leaves, double rate_bps = 11e6)
{
  std::vector<std::string> names{"H"};
  std::vector<Link> links;
  for (std::size_t i = 0; i < leaves; ++i)
    {
      names.push_back ("L" + std::to_string (i));
      Link l;
      l.a = NodeId (0);
      l.b = NodeId (static_cast<std::uint32_t> (i + 1));
      l.rate_bps = rate_bps;
      links.push_back (l);
    }
  return Topology (std::move (names), std::move (links));
}

inline std::vector<NodeId>
Path (const Topology &topo, std::initializer_list<const char *> names)
{
  std::vector<NodeId> out;
  for (const char *n : names)
    out.push_back (topo.Require (n));
  return out;
}

inline Scenario
ScenarioFor (Topology topo, SimTime duration, std::vector<Flow> flows = {})
{
  Scenario s;
  s.name = "fixture";
  s.duration = duration;
  s.topology = std::move (topo);
  s.flows = std::move (flows);
  return s;
}

inline Flow
MakeFlow (const Topology &topo, std::string id, const char *src, const char *dst, TrafficClass cls, double rate_bps,
          SimTime start, SimTime stop, double size_bits = 8000.0)
{
  Flow f;
  f.id = std::move (id);
  f.src = topo.Require (src);
  f.dst = topo.Require (dst);
  f.cls = cls;
  f.rate_bps = rate_bps;
  f.start = start;
  f.stop = stop;
  f.packet_size_bits = size_bits;
  return f;
}

/// Small random scenario with flows, link events and sometimes tight queues.
inline Scenario
RandomScenario (std::mt19937_64 &rng)
{
  const std::size_t n = std::uniform_int_distribution<std::size_t> (3, 8) (rng);
  const SimTime prop = std::uniform_int_distribution<SimTime> (0, 200'000) (rng);
  Topology base = RandomConnectedTopology (rng, n, 0.3, prop);
  Scenario s;
  s.name = "random";
  s.duration = std::uniform_int_distribution<SimTime> (1, 3) (rng) * kNanosPerSecond;

  std::vector<LinkEvent> events;
  const int event_count = std::uniform_int_distribution<int> (0, 3) (rng);
  for (int i = 0; i < event_count; ++i)
    {
      const Link &l = base.Links ()[std::uniform_int_distribution<std::size_t> (0, base.Links ().size () - 1) (rng)];
      LinkEvent e;
      e.at = std::uniform_int_distribution<SimTime> (0, s.duration) (rng);
      e.kind = static_cast<LinkEventKind> (std::uniform_int_distribution<int> (0, 2) (rng));
      e.a = l.a;
      e.b = l.b;
      if (e.kind == LinkEventKind::Rate)
        e.rate_bps = kRates80211b[std::uniform_int_distribution<int> (0, 3) (rng)];
      events.push_back (e);
    }
  s.topology = Topology (base.Names (), base.Links (), events);

  const int flow_count = std::uniform_int_distribution<int> (0, 3) (rng);
  std::uniform_int_distribution<std::uint32_t> node (0, static_cast<std::uint32_t> (n - 1));
  for (int i = 0; i < flow_count; ++i)
    {
      Flow f;
      f.id = "f" + std::to_string (i);
      f.src = NodeId (node (rng));
      do
        f.dst = NodeId (node (rng));
      while (f.dst == f.src);
      f.cls = kAllClasses[std::uniform_int_distribution<int> (0, 3) (rng)];
      f.rate_bps = std::uniform_real_distribution<double> (1e5, 6e6) (rng);
      f.packet_size_bits = std::uniform_int_distribution<int> (1, 12) (rng) * 1000.0;
      f.start = std::uniform_int_distribution<SimTime> (0, s.duration / 2) (rng);
      f.stop = std::uniform_int_distribution<SimTime> (f.start + 1, s.duration + kNanosPerSecond / 2) (rng);
      s.flows.push_back (f);
    }
  if (std::bernoulli_distribution (0.3) (rng))
    s.params.queue_capacity = 5;
  return s;
}

} // namespace macc::testing

#endif

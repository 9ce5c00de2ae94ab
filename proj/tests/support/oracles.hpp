// Reference computations for the test suites. These are written
// independently of the library code, from first principles.
#ifndef MACC_TESTS_ORACLES_HPP
#define MACC_TESTS_ORACLES_HPP

#include "macc/scenario.hpp"
#include "macc/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace macc::testing {

inline constexpr double kRates80211b[] = {1e6, 2e6, 5.5e6, 11e6};

/// Adjacency matrix of live links (0 where absent).
inline std::vector<std::vector<double>>
RateMatrix (const Topology &topo)
{
  const std::size_t n = topo.NodeCount ();
  std::vector<std::vector<double>> m (n, std::vector<double> (n, 0.0));
  for (const Link &l : topo.Links ())
    if (l.up)
      m[l.a.Index ()][l.b.Index ()] = m[l.b.Index ()][l.a.Index ()] = l.rate_bps;
  return m;
}

/// next[s][d] by breadth-first search from each destination; -1 when
/// unreachable or s == d. Ties go to the smallest neighbour index.
inline std::vector<std::vector<int>>
BfsNextHops (const Topology &topo)
{
  const auto m = RateMatrix (topo);
  const int n = static_cast<int> (m.size ());
  std::vector<std::vector<int>> next (n, std::vector<int> (n, -1));
  for (int d = 0; d < n; ++d)
    {
      std::vector<int> dist (n, -1);
      std::vector<int> frontier{d};
      dist[d] = 0;
      for (int level = 1; !frontier.empty (); ++level)
        {
          std::vector<int> grown;
          for (int u : frontier)
            for (int v = 0; v < n; ++v)
              if (m[u][v] > 0 && dist[v] < 0)
                {
                  dist[v] = level;
                  grown.push_back (v);
                }
          frontier = grown;
        }
      for (int s = 0; s < n; ++s)
        {
          if (s == d || dist[s] < 0)
            continue;
          for (int v = 0; v < n; ++v)
            if (m[s][v] > 0 && dist[v] == dist[s] - 1)
              {
                next[s][d] = v;
                break;
              }
        }
    }
  return next;
}

/// Interior positions i with rate(i -> i+1) below some earlier hop rate.
inline std::vector<std::size_t>
PrefixMaxMismatch (const std::vector<double> &hop_rates)
{
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < hop_rates.size (); ++i)
    {
      bool slower = false;
      for (std::size_t j = 0; j < i; ++j)
        if (hop_rates[i] < hop_rates[j])
          slower = true;
      if (slower)
        out.push_back (i);
    }
  return out;
}

/// size / sum(size / rate_i): the store-and-forward end-to-end rate.
inline double
StoreAndForwardRate (double size_bits, const std::vector<double> &hop_rates)
{
  double delay = 0.0;
  for (double r : hop_rates)
    delay += size_bits / r;
  return size_bits / delay;
}

/// Upper 1% points of the chi-square distribution, indexed by degrees of freedom.
inline double
ChiSquareCritical99 (int dof)
{
  static const double table[] = {0.0, 6.634897, 9.210340, 11.344867, 13.276704, 15.086272,
                                 16.811894, 18.475307, 20.090235, 21.665994, 23.209251, 24.724970};
  return table[dof];
}

inline double
ChiSquareStatistic (const std::vector<std::uint64_t> &counts)
{
  double total = 0.0;
  for (auto c : counts)
    total += static_cast<double> (c);
  const double expected = total / static_cast<double> (counts.size ());
  double stat = 0.0;
  for (auto c : counts)
    stat += (static_cast<double> (c) - expected) * (static_cast<double> (c) - expected) / expected;
  return stat;
}

inline std::vector<std::string>
LetterNames (std::size_t n)
{
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i)
    names.push_back (std::string (1, static_cast<char> ('A' + i)));
  return names;
}

/// Connected random graph: a random spanning tree plus extra edges.
inline Topology
RandomConnectedTopology (std::mt19937_64 &rng, std::size_t n, double extra_edge_p, SimTime prop_delay = 0)
{
  std::vector<std::vector<bool>> has (n, std::vector<bool> (n, false));
  std::vector<Link> links;
  std::uniform_int_distribution<int> pick_rate (0, 3);
  auto add = [&] (std::size_t a, std::size_t b) {
    if (a == b || has[a][b])
      return;
    has[a][b] = has[b][a] = true;
    Link l;
    l.a = NodeId (static_cast<std::uint32_t> (a));
    l.b = NodeId (static_cast<std::uint32_t> (b));
    l.rate_bps = kRates80211b[pick_rate (rng)];
    l.prop_delay = prop_delay;
    links.push_back (l);
  };
  for (std::size_t v = 1; v < n; ++v)
    add (v, std::uniform_int_distribution<std::size_t> (0, v - 1) (rng));
  std::bernoulli_distribution extra (extra_edge_p);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (extra (rng))
        add (a, b);
  return Topology (LetterNames (n), links);
}

/// Every simple path with 2..max_nodes nodes, by exhaustive DFS.
inline std::vector<std::vector<NodeId>>
AllSimplePaths (const Topology &topo, std::size_t max_nodes)
{
  std::vector<std::vector<NodeId>> out;
  const auto m = RateMatrix (topo);
  std::vector<NodeId> path;
  std::vector<bool> used (m.size (), false);
  auto dfs = [&] (auto &&self, std::size_t u) -> void {
    if (path.size () >= 2)
      out.push_back (path);
    if (path.size () == max_nodes)
      return;
    for (std::size_t v = 0; v < m.size (); ++v)
      if (m[u][v] > 0 && !used[v])
        {
          used[v] = true;
          path.push_back (NodeId (static_cast<std::uint32_t> (v)));
          self (self, v);
          path.pop_back ();
          used[v] = false;
        }
  };
  for (std::size_t s = 0; s < m.size (); ++s)
    {
      used[s] = true;
      path = {NodeId (static_cast<std::uint32_t> (s))};
      dfs (dfs, s);
      used[s] = false;
    }
  return out;
}

inline std::vector<double>
HopRates (const Topology &topo, const std::vector<NodeId> &path)
{
  const auto m = RateMatrix (topo);
  std::vector<double> r;
  for (std::size_t i = 0; i + 1 < path.size (); ++i)
    r.push_back (m[path[i].Index ()][path[i + 1].Index ()]);
  return r;
}

} // namespace macc::testing

#endif

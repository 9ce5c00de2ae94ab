#include "macc/routing.hpp"

#include "macc/errors.hpp"
#include "macc/net_model.hpp"
#include "macc/topology.hpp"

namespace macc {

const RouteEntry *
RoutingTable::Find (NodeId destination) const
{
  auto it = m_entries.find (destination);
  return it == m_entries.end () ? nullptr : &it->second;
}

RouteEntry *
RoutingTable::Find (NodeId destination)
{
  auto it = m_entries.find (destination);
  return it == m_entries.end () ? nullptr : &it->second;
}

void
RoutingTable::Install (NodeId destination, const RouteEntry &entry)
{
  if (entry.next_hop == m_owner)
    throw Error (Errc::DomainError, "route next hop equals the owning node");
  if (!(entry.est_path_rate > 0.0))
    throw Error (Errc::DomainError, "route rate must be positive");
  auto it = m_entries.find (destination);
  if (it != m_entries.end () && entry.updated_at < it->second.updated_at)
    throw Error (Errc::DomainError, "route timestamp would move backwards");
  m_entries[destination] = entry;
}

std::vector<NodeId>
RoutingTable::PurgeDeadNextHops (const Topology &topo)
{
  std::vector<NodeId> removed;
  for (auto it = m_entries.begin (); it != m_entries.end ();)
    {
      if (!topo.Adjacent (m_owner, it->second.next_hop))
        {
          removed.push_back (it->first);
          it = m_entries.erase (it);
        }
      else
        ++it;
    }
  return removed;
}

std::vector<RoutingTable>
ShortestHopTables (const Topology &topo, SimTime now)
{
  const std::size_t n = topo.NodeCount ();
  std::vector<RoutingTable> tables;
  tables.reserve (n);
  for (std::size_t i = 0; i < n; ++i)
    tables.emplace_back (NodeId (static_cast<std::uint32_t> (i)));

  for (std::size_t d = 0; d < n; ++d)
    {
      const NodeId dest (static_cast<std::uint32_t> (d));
      const std::vector<int> dist = topo.HopDistances (dest);
      for (std::size_t v = 0; v < n; ++v)
        {
          if (v == d || dist[v] < 0)
            continue;
          const NodeId self (static_cast<std::uint32_t> (v));
          // Neighbors come back in ascending order, so the first hit wins ties.
          for (NodeId nb : topo.Neighbors (self))
            {
              if (dist[nb.Index ()] == dist[v] - 1)
                {
                  RouteEntry e;
                  e.next_hop = nb;
                  e.updated_at = now;
                  // Rate along the chosen shortest path.
                  std::vector<NodeId> path{self};
                  NodeId cur = nb;
                  path.push_back (cur);
                  while (cur != dest)
                    {
                      for (NodeId nn : topo.Neighbors (cur))
                        {
                          if (dist[nn.Index ()] == dist[cur.Index ()] - 1)
                            {
                              cur = nn;
                              break;
                            }
                        }
                      path.push_back (cur);
                    }
                  e.est_path_rate = BottleneckRate (path, topo);
                  tables[v].Install (dest, e);
                  break;
                }
            }
        }
    }
  return tables;
}

} // namespace macc

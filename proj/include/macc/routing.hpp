#ifndef MACC_ROUTING_HPP
#define MACC_ROUTING_HPP

#include "macc/types.hpp"

#include <map>
#include <optional>
#include <vector>

namespace macc {

class Topology;

struct RouteEntry
{
  NodeId next_hop;
  double est_path_rate = 0.0; // bits per second
  bool congested = false;
  SimTime updated_at = 0;

  bool operator== (const RouteEntry &) const = default;
};

/// Per-node next-hop table keyed by destination.
class RoutingTable
{
public:
  RoutingTable () = default;
  explicit RoutingTable (NodeId owner) : m_owner (owner) {}

  NodeId Owner () const { return m_owner; }

  const RouteEntry *Find (NodeId destination) const;
  RouteEntry *Find (NodeId destination);

  /// Writes the entry for `destination`. Rejects a next hop equal to the owner
  /// and any attempt to move updated_at backwards.
  void Install (NodeId destination, const RouteEntry &entry);
  bool Erase (NodeId destination) { return m_entries.erase (destination) > 0; }

  /// Removes entries whose next hop is not a live neighbor. Returns the removed destinations.
  std::vector<NodeId> PurgeDeadNextHops (const Topology &topo);

  const std::map<NodeId, RouteEntry> &Entries () const { return m_entries; }
  std::size_t Size () const { return m_entries.size (); }

  bool operator== (const RoutingTable &) const = default;

private:
  NodeId m_owner;
  std::map<NodeId, RouteEntry> m_entries;
};

/// Shortest-hop tables for every node; ties go to the lowest next-hop id.
/// Unreachable destinations get no entry. Entries are stamped with `now`.
std::vector<RoutingTable> ShortestHopTables (const Topology &topo, SimTime now = 0);

} // namespace macc

#endif

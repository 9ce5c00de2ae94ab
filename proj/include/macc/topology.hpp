#ifndef MACC_TOPOLOGY_HPP
#define MACC_TOPOLOGY_HPP

#include "macc/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace macc {

struct Link
{
  NodeId a;
  NodeId b;
  double rate_bps = 0.0;
  SimTime prop_delay = 0;
  bool up = true;

  bool operator== (const Link &) const = default;
};

enum class LinkEventKind : std::uint8_t
{
  Down,
  Up,
  Rate,
};

/// Timed topology change; stands in for node mobility.
struct LinkEvent
{
  SimTime at = 0;
  LinkEventKind kind = LinkEventKind::Down;
  NodeId a;
  NodeId b;
  double rate_bps = 0.0; // Rate events only

  bool operator== (const LinkEvent &) const = default;
};

/**
 * \brief Multi-rate network graph with bidirectional links.
 *
 * Node ids are dense indices in declaration order. Construction validates
 * that links reference declared nodes, carry positive rates and
 * non-negative delays, and that no node pair is linked twice.
 */
class Topology
{
public:
  Topology () = default;
  Topology (std::vector<std::string> names, std::vector<Link> links, std::vector<LinkEvent> events = {});

  std::size_t NodeCount () const { return m_names.size (); }
  const std::vector<std::string> &Names () const { return m_names; }
  const std::string &Name (NodeId id) const { return m_names.at (id.Index ()); }
  std::optional<NodeId> Find (std::string_view name) const;
  /// Throws ValidationError naming `name` when it is not declared.
  NodeId Require (std::string_view name) const;

  const std::vector<Link> &Links () const { return m_links; }
  const std::vector<LinkEvent> &Events () const { return m_events; }

  /// Index of the link joining a and b, whether up or not.
  std::optional<std::size_t> LinkIndex (NodeId a, NodeId b) const;
  const Link *FindLink (NodeId a, NodeId b) const;
  const Link *LiveLink (NodeId a, NodeId b) const;
  bool Adjacent (NodeId a, NodeId b) const { return LiveLink (a, b) != nullptr; }

  /// Live neighbors in ascending id order.
  std::vector<NodeId> Neighbors (NodeId v) const;

  /// Applies a topology event. Returns false if nothing changed.
  bool Apply (const LinkEvent &event);

  /// Hop counts to `target` over live links; -1 marks unreachable.
  std::vector<int> HopDistances (NodeId target) const;

  bool operator== (const Topology &) const = default;

private:
  void Validate () const;

  std::vector<std::string> m_names;
  std::vector<Link> m_links;
  std::vector<LinkEvent> m_events;
  std::vector<std::vector<std::size_t>> m_incident; // node -> link indices
};

} // namespace macc

#endif

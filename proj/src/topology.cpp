#include "macc/topology.hpp"

#include "macc/errors.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace macc {

Topology::Topology (std::vector<std::string> names, std::vector<Link> links, std::vector<LinkEvent> events)
  : m_names (std::move (names)),
    m_links (std::move (links)),
    m_events (std::move (events))
{
  Validate ();
  std::stable_sort (m_events.begin (), m_events.end (),
                    [] (const LinkEvent &x, const LinkEvent &y) { return x.at < y.at; });
  m_incident.assign (m_names.size (), {});
  for (std::size_t i = 0; i < m_links.size (); ++i)
    {
      m_incident[m_links[i].a.Index ()].push_back (i);
      m_incident[m_links[i].b.Index ()].push_back (i);
    }
}

void
Topology::Validate () const
{
  std::set<std::string> seen;
  for (const auto &n : m_names)
    {
      if (n.empty ())
        throw Error (Errc::ValidationError, "nodes: empty node name");
      if (!seen.insert (n).second)
        throw Error (Errc::ValidationError, "nodes: duplicate node \"" + n + "\"");
    }
  auto declared = [this] (NodeId id) { return id.Index () < m_names.size (); };
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const Link &l : m_links)
    {
      if (!declared (l.a) || !declared (l.b))
        throw Error (Errc::ValidationError, "links: endpoint is not a declared node");
      const std::string label = m_names[l.a.Index ()] + "-" + m_names[l.b.Index ()];
      if (l.a == l.b)
        throw Error (Errc::ValidationError, "links: self-loop at \"" + m_names[l.a.Index ()] + "\"");
      if (!(l.rate_bps > 0.0))
        throw Error (Errc::ValidationError, "links: rate_bps must be positive on " + label);
      if (l.prop_delay < 0)
        throw Error (Errc::ValidationError, "links: prop_delay_ns must be non-negative on " + label);
      auto key = std::minmax (l.a, l.b);
      if (!pairs.insert ({key.first, key.second}).second)
        throw Error (Errc::ValidationError, "links: duplicate link " + label);
    }
  for (const LinkEvent &e : m_events)
    {
      if (!declared (e.a) || !declared (e.b))
        throw Error (Errc::ValidationError, "events: endpoint is not a declared node");
      auto key = std::minmax (e.a, e.b);
      if (!pairs.contains ({key.first, key.second}))
        throw Error (Errc::ValidationError, "events: no link " + m_names[e.a.Index ()] + "-" + m_names[e.b.Index ()]);
      if (e.at < 0)
        throw Error (Errc::ValidationError, "events: at_s must be non-negative");
      if (e.kind == LinkEventKind::Rate && !(e.rate_bps > 0.0))
        throw Error (Errc::ValidationError, "events: rate_bps must be positive");
    }
}

std::optional<NodeId>
Topology::Find (std::string_view name) const
{
  for (std::size_t i = 0; i < m_names.size (); ++i)
    if (m_names[i] == name)
      return NodeId (static_cast<std::uint32_t> (i));
  return std::nullopt;
}

NodeId
Topology::Require (std::string_view name) const
{
  auto id = Find (name);
  if (!id)
    throw Error (Errc::ValidationError, "undeclared node \"" + std::string (name) + "\"");
  return *id;
}

std::optional<std::size_t>
Topology::LinkIndex (NodeId a, NodeId b) const
{
  if (a.Index () >= m_incident.size ())
    return std::nullopt;
  for (std::size_t i : m_incident[a.Index ()])
    {
      const Link &l = m_links[i];
      if ((l.a == a && l.b == b) || (l.a == b && l.b == a))
        return i;
    }
  return std::nullopt;
}

const Link *
Topology::FindLink (NodeId a, NodeId b) const
{
  auto i = LinkIndex (a, b);
  return i ? &m_links[*i] : nullptr;
}

const Link *
Topology::LiveLink (NodeId a, NodeId b) const
{
  const Link *l = FindLink (a, b);
  return (l && l->up) ? l : nullptr;
}

std::vector<NodeId>
Topology::Neighbors (NodeId v) const
{
  std::vector<NodeId> out;
  if (v.Index () >= m_incident.size ())
    return out;
  for (std::size_t i : m_incident[v.Index ()])
    {
      const Link &l = m_links[i];
      if (l.up)
        out.push_back (l.a == v ? l.b : l.a);
    }
  std::sort (out.begin (), out.end ());
  return out;
}

bool
Topology::Apply (const LinkEvent &event)
{
  auto i = LinkIndex (event.a, event.b);
  if (!i)
    throw Error (Errc::MissingLink, "event references unknown link");
  Link &l = m_links[*i];
  switch (event.kind)
    {
    case LinkEventKind::Down:
      if (!l.up)
        return false;
      l.up = false;
      return true;
    case LinkEventKind::Up:
      if (l.up)
        return false;
      l.up = true;
      return true;
    case LinkEventKind::Rate:
      if (l.rate_bps == event.rate_bps)
        return false;
      l.rate_bps = event.rate_bps;
      return true;
    }
  return false;
}

std::vector<int>
Topology::HopDistances (NodeId target) const
{
  std::vector<int> dist (m_names.size (), -1);
  std::deque<NodeId> frontier{target};
  dist[target.Index ()] = 0;
  while (!frontier.empty ())
    {
      NodeId v = frontier.front ();
      frontier.pop_front ();
      for (NodeId n : Neighbors (v))
        {
          if (dist[n.Index ()] < 0)
            {
              dist[n.Index ()] = dist[v.Index ()] + 1;
              frontier.push_back (n);
            }
        }
    }
  return dist;
}

} // namespace macc

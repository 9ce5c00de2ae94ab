#include "macc/scenario_io.hpp"

#include "macc/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace macc {

using nlohmann::json;

namespace {

[[noreturn]] void
Invalid (const std::string &what)
{
  throw Error (Errc::ValidationError, what);
}

void
CheckKeys (const json &obj, const std::string &where, std::initializer_list<std::string_view> required,
           std::initializer_list<std::string_view> optional)
{
  if (!obj.is_object ())
    Invalid (where + ": expected an object");
  for (auto it = obj.begin (); it != obj.end (); ++it)
    {
      const std::string &key = it.key ();
      const auto known = [&] (std::initializer_list<std::string_view> keys) {
        return std::find (keys.begin (), keys.end (), key) != keys.end ();
      };
      if (!known (required) && !known (optional))
        Invalid (where + ": unknown field \"" + key + "\"");
    }
  for (std::string_view key : required)
    if (!obj.contains (std::string (key)))
      Invalid (where + ": missing field \"" + std::string (key) + "\"");
}

double
Number (const json &obj, const std::string &key, const std::string &where)
{
  const json &v = obj.at (key);
  if (!v.is_number ())
    Invalid (where + "." + key + ": expected a number");
  return v.get<double> ();
}

double
NumberOr (const json &obj, const std::string &key, const std::string &where, double fallback)
{
  return obj.contains (key) ? Number (obj, key, where) : fallback;
}

std::uint64_t
Count (const json &obj, const std::string &key, const std::string &where)
{
  const json &v = obj.at (key);
  if (!v.is_number_integer () || (v.is_number_integer () && !v.is_number_unsigned () && v.get<std::int64_t> () < 0))
    Invalid (where + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t> ();
}

std::string
Text (const json &obj, const std::string &key, const std::string &where)
{
  const json &v = obj.at (key);
  if (!v.is_string ())
    Invalid (where + "." + key + ": expected a string");
  return v.get<std::string> ();
}

NodeId
NodeRef (const json &obj, const std::string &key, const std::string &where, const std::vector<std::string> &names)
{
  const std::string name = Text (obj, key, where);
  auto it = std::find (names.begin (), names.end (), name);
  if (it == names.end ())
    Invalid (where + "." + key + ": undeclared node \"" + name + "\"");
  return NodeId (static_cast<std::uint32_t> (it - names.begin ()));
}

void
LineColumn (std::string_view text, std::size_t byte, std::size_t &line, std::size_t &column)
{
  line = 1;
  column = 1;
  for (std::size_t i = 0; i < byte && i < text.size (); ++i)
    {
      if (text[i] == '\n')
        {
          ++line;
          column = 1;
        }
      else
        ++column;
    }
}

std::string_view
EventKindName (LinkEventKind k)
{
  switch (k)
    {
    case LinkEventKind::Down:
      return "down";
    case LinkEventKind::Up:
      return "up";
    case LinkEventKind::Rate:
      return "rate";
    }
  return "down";
}

ProtocolParams
ParseParams (const json &obj)
{
  const std::string where = "params";
  CheckKeys (obj, where, {},
             {"low_threshold", "high_threshold", "queue_capacity", "probe_size_bits", "propagation_interval_ns",
              "patrol_step_ns", "agent_frame_bits", "report_frame_bits", "probe_timeout_factor",
              "reroute_sustain_reports", "history_limit", "agents_per_node", "load_multiplier"});
  ProtocolParams p;
  p.thresholds.low_to_medium = NumberOr (obj, "low_threshold", where, p.thresholds.low_to_medium);
  p.thresholds.medium_to_high = NumberOr (obj, "high_threshold", where, p.thresholds.medium_to_high);
  if (obj.contains ("queue_capacity"))
    p.queue_capacity = Count (obj, "queue_capacity", where);
  p.probe_size_bits = NumberOr (obj, "probe_size_bits", where, p.probe_size_bits);
  if (obj.contains ("propagation_interval_ns"))
    p.propagation_interval = static_cast<SimTime> (Count (obj, "propagation_interval_ns", where));
  if (obj.contains ("patrol_step_ns"))
    p.patrol_step = static_cast<SimTime> (Count (obj, "patrol_step_ns", where));
  p.agent_frame_bits = NumberOr (obj, "agent_frame_bits", where, p.agent_frame_bits);
  p.report_frame_bits = NumberOr (obj, "report_frame_bits", where, p.report_frame_bits);
  p.probe_timeout_factor = NumberOr (obj, "probe_timeout_factor", where, p.probe_timeout_factor);
  if (obj.contains ("reroute_sustain_reports"))
    p.reroute_sustain_reports = Count (obj, "reroute_sustain_reports", where);
  if (obj.contains ("history_limit"))
    p.history_limit = Count (obj, "history_limit", where);
  if (obj.contains ("agents_per_node"))
    p.agents_per_node = Count (obj, "agents_per_node", where);
  p.load_multiplier = NumberOr (obj, "load_multiplier", where, p.load_multiplier);
  return p;
}

bool
SafeIdentifier (const std::string &s)
{
  return s.find_first_of (",\"\r\n") == std::string::npos;
}

} // namespace

Scenario
LoadScenario (std::string_view text)
{
  json doc;
  try
    {
      doc = json::parse (text.begin (), text.end ());
    }
  catch (const json::parse_error &e)
    {
      std::size_t line = 0;
      std::size_t column = 0;
      LineColumn (text, e.byte > 0 ? e.byte - 1 : 0, line, column);
      std::string detail = e.what ();
      const std::size_t at = detail.find (": ", detail.find ("parse error"));
      if (at != std::string::npos)
        detail = detail.substr (at + 2);
      throw Error (Errc::ParseError,
                   "line " + std::to_string (line) + ", column " + std::to_string (column) + ": " + detail);
    }

  CheckKeys (doc, "scenario", {"name", "duration_s", "nodes", "links", "flows"}, {"events", "params"});
  Scenario s;
  s.name = Text (doc, "name", "scenario");
  const double duration_s = Number (doc, "duration_s", "scenario");
  if (!(duration_s > 0.0))
    Invalid ("duration_s must be positive");
  s.duration = SecondsToSimTime (duration_s);

  const json &nodes = doc.at ("nodes");
  if (!nodes.is_array ())
    Invalid ("nodes: expected an array of names");
  std::vector<std::string> names;
  for (const json &n : nodes)
    {
      if (!n.is_string ())
        Invalid ("nodes: expected an array of names");
      names.push_back (n.get<std::string> ());
      if (!SafeIdentifier (names.back ()))
        Invalid ("nodes: name \"" + names.back () + "\" contains a reserved character");
    }

  const json &links = doc.at ("links");
  if (!links.is_array ())
    Invalid ("links: expected an array");
  std::vector<Link> parsed_links;
  for (std::size_t i = 0; i < links.size (); ++i)
    {
      const std::string where = "links[" + std::to_string (i) + "]";
      const json &l = links[i];
      CheckKeys (l, where, {"a", "b", "rate_bps"}, {"prop_delay_ns"});
      Link link;
      link.a = NodeRef (l, "a", where, names);
      link.b = NodeRef (l, "b", where, names);
      link.rate_bps = Number (l, "rate_bps", where);
      if (!(link.rate_bps > 0.0))
        Invalid (where + ".rate_bps must be positive");
      if (l.contains ("prop_delay_ns"))
        link.prop_delay = static_cast<SimTime> (Count (l, "prop_delay_ns", where));
      parsed_links.push_back (link);
    }

  std::vector<LinkEvent> events;
  if (doc.contains ("events"))
    {
      const json &evs = doc.at ("events");
      if (!evs.is_array ())
        Invalid ("events: expected an array");
      for (std::size_t i = 0; i < evs.size (); ++i)
        {
          const std::string where = "events[" + std::to_string (i) + "]";
          const json &e = evs[i];
          CheckKeys (e, where, {"at_s", "kind", "a", "b"}, {"rate_bps"});
          LinkEvent ev;
          ev.at = SecondsToSimTime (Number (e, "at_s", where));
          const std::string kind = Text (e, "kind", where);
          if (kind == "down")
            ev.kind = LinkEventKind::Down;
          else if (kind == "up")
            ev.kind = LinkEventKind::Up;
          else if (kind == "rate")
            ev.kind = LinkEventKind::Rate;
          else
            Invalid (where + ".kind: expected down, up or rate");
          ev.a = NodeRef (e, "a", where, names);
          ev.b = NodeRef (e, "b", where, names);
          if (ev.kind == LinkEventKind::Rate)
            {
              if (!e.contains ("rate_bps"))
                Invalid (where + ": missing field \"rate_bps\"");
              ev.rate_bps = Number (e, "rate_bps", where);
            }
          else if (e.contains ("rate_bps"))
            Invalid (where + ".rate_bps: only allowed on rate events");
          events.push_back (ev);
        }
    }
  s.topology = Topology (std::move (names), std::move (parsed_links), std::move (events));

  const json &flows = doc.at ("flows");
  if (!flows.is_array ())
    Invalid ("flows: expected an array");
  for (std::size_t i = 0; i < flows.size (); ++i)
    {
      const std::string where = "flows[" + std::to_string (i) + "]";
      const json &f = flows[i];
      CheckKeys (f, where, {"id", "src", "dst", "class", "rate_bps"},
                 {"packet_size_bits", "start_s", "stop_s"});
      Flow flow;
      flow.id = Text (f, "id", where);
      if (!SafeIdentifier (flow.id))
        Invalid (where + ".id contains a reserved character");
      flow.src = NodeRef (f, "src", where, s.topology.Names ());
      flow.dst = NodeRef (f, "dst", where, s.topology.Names ());
      if (!ParseTrafficClass (Text (f, "class", where), flow.cls))
        Invalid (where + ".class: expected background, best_effort, video or voice");
      flow.rate_bps = Number (f, "rate_bps", where);
      flow.packet_size_bits = NumberOr (f, "packet_size_bits", where, flow.packet_size_bits);
      flow.start = SecondsToSimTime (NumberOr (f, "start_s", where, 0.0));
      flow.stop = f.contains ("stop_s") ? SecondsToSimTime (Number (f, "stop_s", where)) : s.duration;
      s.flows.push_back (std::move (flow));
    }

  if (doc.contains ("params"))
    s.params = ParseParams (doc.at ("params"));

  ValidateScenario (s);
  return s;
}

Scenario
LoadScenarioFile (const std::string &path)
{
  std::ifstream in (path, std::ios::binary);
  if (!in)
    throw Error (Errc::IoError, "cannot open " + path + ": " + std::strerror (errno));
  std::ostringstream buf;
  buf << in.rdbuf ();
  return LoadScenario (buf.str ());
}

std::string
SerializeScenario (const Scenario &s)
{
  const Topology &t = s.topology;
  json doc = json::object ();
  doc["name"] = s.name;
  doc["duration_s"] = SimTimeToSeconds (s.duration);
  doc["nodes"] = t.Names ();
  json links = json::array ();
  for (const Link &l : t.Links ())
    links.push_back ({{"a", t.Name (l.a)}, {"b", t.Name (l.b)}, {"rate_bps", l.rate_bps}, {"prop_delay_ns", l.prop_delay}});
  doc["links"] = links;
  json flows = json::array ();
  for (const Flow &f : s.flows)
    {
      flows.push_back ({{"id", f.id},
                        {"src", t.Name (f.src)},
                        {"dst", t.Name (f.dst)},
                        {"class", std::string (ToString (f.cls))},
                        {"packet_size_bits", f.packet_size_bits},
                        {"rate_bps", f.rate_bps},
                        {"start_s", SimTimeToSeconds (f.start)},
                        {"stop_s", SimTimeToSeconds (f.stop)}});
    }
  doc["flows"] = flows;
  json events = json::array ();
  for (const LinkEvent &e : t.Events ())
    {
      json ev = {{"at_s", SimTimeToSeconds (e.at)},
                 {"kind", std::string (EventKindName (e.kind))},
                 {"a", t.Name (e.a)},
                 {"b", t.Name (e.b)}};
      if (e.kind == LinkEventKind::Rate)
        ev["rate_bps"] = e.rate_bps;
      events.push_back (ev);
    }
  doc["events"] = events;
  const ProtocolParams &p = s.params;
  doc["params"] = {{"low_threshold", p.thresholds.low_to_medium},
                   {"high_threshold", p.thresholds.medium_to_high},
                   {"queue_capacity", p.queue_capacity},
                   {"probe_size_bits", p.probe_size_bits},
                   {"propagation_interval_ns", p.propagation_interval},
                   {"patrol_step_ns", p.patrol_step},
                   {"agent_frame_bits", p.agent_frame_bits},
                   {"report_frame_bits", p.report_frame_bits},
                   {"probe_timeout_factor", p.probe_timeout_factor},
                   {"reroute_sustain_reports", p.reroute_sustain_reports},
                   {"history_limit", p.history_limit},
                   {"agents_per_node", p.agents_per_node},
                   {"load_multiplier", p.load_multiplier}};
  return doc.dump (2) + "\n";
}

std::vector<std::string>
SweepParamNames ()
{
  return {"offered_load", "probe_size", "propagation_interval"};
}

void
ApplySweepParam (Scenario &s, std::string_view name, double value)
{
  if (name == "offered_load")
    s.params.load_multiplier = value;
  else if (name == "probe_size")
    s.params.probe_size_bits = value;
  else if (name == "propagation_interval")
    s.params.propagation_interval = SecondsToSimTime (value / 1000.0);
  else
    throw Error (Errc::UnknownParam, "\"" + std::string (name) + "\" is not sweepable");
  ValidateScenario (s);
}

// --- metrics tables -----------------------------------------------------------

const std::vector<std::string_view> kMetricsColumns = {
  "run_id",     "mode",          "seed",         "flow_id",      "sent",
  "delivered",  "dropped_queue", "dropped_noroute", "loss_rate", "mean_delay_ms",
  "p95_delay_ms", "goodput_bps", "agent_overhead_ratio", "reroutes"};

std::string
FormatDouble (double value)
{
  char buf[64];
  auto [end, ec] = std::to_chars (buf, buf + sizeof (buf), value);
  return std::string (buf, end);
}

namespace {

TableRow
MakeRow (const RunRow &run, const FlowMetrics &m)
{
  TableRow r;
  r.run_id = run.run_id;
  r.mode = std::string (ToString (run.metrics.mode));
  r.seed = run.metrics.seed;
  r.flow_id = m.flow_id;
  r.sent = m.sent;
  r.delivered = m.delivered;
  r.dropped_queue = m.dropped_queue;
  r.dropped_noroute = m.dropped_noroute;
  r.loss_rate = m.loss_rate;
  if (m.mean_delay_s)
    r.mean_delay_ms = *m.mean_delay_s * 1000.0;
  if (m.p95_delay_s)
    r.p95_delay_ms = *m.p95_delay_s * 1000.0;
  r.goodput_bps = m.goodput_bps;
  r.agent_overhead_ratio = m.agent_overhead_ratio;
  r.reroutes = m.reroutes;
  return r;
}

json
RowJson (const TableRow &r)
{
  json j = {{"flow_id", r.flow_id},
            {"sent", r.sent},
            {"delivered", r.delivered},
            {"dropped_queue", r.dropped_queue},
            {"dropped_noroute", r.dropped_noroute},
            {"loss_rate", r.loss_rate},
            {"mean_delay_ms", nullptr},
            {"p95_delay_ms", nullptr},
            {"goodput_bps", r.goodput_bps},
            {"agent_overhead_ratio", r.agent_overhead_ratio},
            {"reroutes", r.reroutes}};
  if (r.mean_delay_ms)
    j["mean_delay_ms"] = *r.mean_delay_ms;
  if (r.p95_delay_ms)
    j["p95_delay_ms"] = *r.p95_delay_ms;
  return j;
}

std::vector<std::string>
SplitCsv (std::string_view line)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true)
    {
      const std::size_t comma = line.find (',', start);
      out.emplace_back (line.substr (start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos)
        break;
      start = comma + 1;
    }
  return out;
}

template <typename T>
T
ParseField (const std::string &text, std::size_t line, std::string_view column)
{
  T value{};
  auto [ptr, ec] = std::from_chars (text.data (), text.data () + text.size (), value);
  if (ec != std::errc{} || ptr != text.data () + text.size ())
    throw Error (Errc::ParseError, "line " + std::to_string (line) + ": bad " + std::string (column) + " \"" + text + "\"");
  return value;
}

std::optional<double>
ParseOptional (const std::string &text, std::size_t line, std::string_view column)
{
  if (text.empty ())
    return std::nullopt;
  return ParseField<double> (text, line, column);
}

} // namespace

std::vector<TableRow>
ToTableRows (std::span<const RunRow> runs)
{
  std::vector<TableRow> rows;
  for (const RunRow &run : runs)
    {
      for (const FlowMetrics &m : run.metrics.flows)
        rows.push_back (MakeRow (run, m));
      rows.push_back (MakeRow (run, run.metrics.totals));
    }
  return rows;
}

void
WriteMetricsCsv (std::span<const RunRow> runs, std::ostream &out)
{
  for (std::size_t i = 0; i < kMetricsColumns.size (); ++i)
    out << (i ? "," : "") << kMetricsColumns[i];
  out << '\n';
  for (const TableRow &r : ToTableRows (runs))
    {
      out << r.run_id << ',' << r.mode << ',' << r.seed << ',' << r.flow_id << ',' << r.sent << ',' << r.delivered
          << ',' << r.dropped_queue << ',' << r.dropped_noroute << ',' << FormatDouble (r.loss_rate) << ','
          << (r.mean_delay_ms ? FormatDouble (*r.mean_delay_ms) : "") << ','
          << (r.p95_delay_ms ? FormatDouble (*r.p95_delay_ms) : "") << ',' << FormatDouble (r.goodput_bps) << ','
          << FormatDouble (r.agent_overhead_ratio) << ',' << r.reroutes << '\n';
    }
}

void
WriteMetricsJsonl (std::span<const RunRow> runs, std::ostream &out)
{
  for (const RunRow &run : runs)
    {
      std::vector<TableRow> rows = ToTableRows (std::span<const RunRow> (&run, 1));
      json flows = json::array ();
      for (std::size_t i = 0; i + 1 < rows.size (); ++i)
        flows.push_back (RowJson (rows[i]));
      json obj = {{"run_id", run.run_id},
                  {"mode", std::string (ToString (run.metrics.mode))},
                  {"seed", run.metrics.seed},
                  {"duration_s", run.metrics.duration_s},
                  {"flows", flows},
                  {"totals", RowJson (rows.back ())}};
      out << obj.dump () << '\n';
    }
}

void
WriteMetricsFiles (std::span<const RunRow> runs, const std::string &csv_path, const std::string &json_path)
{
  auto write = [&] (const std::string &path, auto &&emit) {
    std::ofstream out (path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error (Errc::IoError, "cannot write " + path + ": " + std::strerror (errno));
    emit (out);
    out.flush ();
    if (!out)
      throw Error (Errc::IoError, "write failed for " + path);
  };
  write (csv_path, [&] (std::ostream &o) { WriteMetricsCsv (runs, o); });
  if (!json_path.empty ())
    write (json_path, [&] (std::ostream &o) { WriteMetricsJsonl (runs, o); });
}

std::vector<TableRow>
ParseMetricsCsv (std::string_view text)
{
  std::vector<TableRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size ())
    {
      std::size_t nl = text.find ('\n', pos);
      if (nl == std::string_view::npos)
        nl = text.size ();
      const std::string_view line = text.substr (pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      const std::vector<std::string> f = SplitCsv (line);
      if (line_no == 1)
        {
          if (f.size () != kMetricsColumns.size () || !std::equal (f.begin (), f.end (), kMetricsColumns.begin ()))
            throw Error (Errc::ParseError, "line 1: unexpected header");
          continue;
        }
      if (line.empty ())
        continue;
      if (f.size () != kMetricsColumns.size ())
        throw Error (Errc::ParseError, "line " + std::to_string (line_no) + ": expected "
                                           + std::to_string (kMetricsColumns.size ()) + " fields");
      TableRow r;
      r.run_id = f[0];
      r.mode = f[1];
      r.seed = ParseField<std::uint64_t> (f[2], line_no, "seed");
      r.flow_id = f[3];
      r.sent = ParseField<std::uint64_t> (f[4], line_no, "sent");
      r.delivered = ParseField<std::uint64_t> (f[5], line_no, "delivered");
      r.dropped_queue = ParseField<std::uint64_t> (f[6], line_no, "dropped_queue");
      r.dropped_noroute = ParseField<std::uint64_t> (f[7], line_no, "dropped_noroute");
      r.loss_rate = ParseField<double> (f[8], line_no, "loss_rate");
      r.mean_delay_ms = ParseOptional (f[9], line_no, "mean_delay_ms");
      r.p95_delay_ms = ParseOptional (f[10], line_no, "p95_delay_ms");
      r.goodput_bps = ParseField<double> (f[11], line_no, "goodput_bps");
      r.agent_overhead_ratio = ParseField<double> (f[12], line_no, "agent_overhead_ratio");
      r.reroutes = ParseField<std::uint64_t> (f[13], line_no, "reroutes");
      rows.push_back (std::move (r));
    }
  return rows;
}

std::vector<TableRow>
ParseMetricsJsonl (std::string_view text)
{
  std::vector<TableRow> rows;
  std::istringstream in{std::string (text)};
  std::string line;
  while (std::getline (in, line))
    {
      if (line.empty ())
        continue;
      json obj;
      try
        {
          obj = json::parse (line);
        }
      catch (const json::parse_error &e)
        {
          throw Error (Errc::ParseError, e.what ());
        }
      auto convert = [&] (const json &j) {
        TableRow r;
        r.run_id = obj.at ("run_id").get<std::string> ();
        r.mode = obj.at ("mode").get<std::string> ();
        r.seed = obj.at ("seed").get<std::uint64_t> ();
        r.flow_id = j.at ("flow_id").get<std::string> ();
        r.sent = j.at ("sent").get<std::uint64_t> ();
        r.delivered = j.at ("delivered").get<std::uint64_t> ();
        r.dropped_queue = j.at ("dropped_queue").get<std::uint64_t> ();
        r.dropped_noroute = j.at ("dropped_noroute").get<std::uint64_t> ();
        r.loss_rate = j.at ("loss_rate").get<double> ();
        if (!j.at ("mean_delay_ms").is_null ())
          r.mean_delay_ms = j.at ("mean_delay_ms").get<double> ();
        if (!j.at ("p95_delay_ms").is_null ())
          r.p95_delay_ms = j.at ("p95_delay_ms").get<double> ();
        r.goodput_bps = j.at ("goodput_bps").get<double> ();
        r.agent_overhead_ratio = j.at ("agent_overhead_ratio").get<double> ();
        r.reroutes = j.at ("reroutes").get<std::uint64_t> ();
        return r;
      };
      for (const json &f : obj.at ("flows"))
        rows.push_back (convert (f));
      rows.push_back (convert (obj.at ("totals")));
    }
  return rows;
}

} // namespace macc

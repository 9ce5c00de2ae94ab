// macc: run, compare and sweep congestion-control experiments.
//
// Exit status: 0 ok, 1 runtime fault, 2 usage or input error.

#include <macc/macc.h>

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Failure
{
  int code;
  std::string message;
};

std::string
Shortest (double v)
{
  char buf[64];
  auto [end, ec] = std::to_chars (buf, buf + sizeof (buf), v);
  return std::string (buf, end);
}

const char *
ModeName (macc_mode m)
{
  return m == MACC_MODE_AGENT ? "agent" : "baseline";
}

struct ScenarioHandle
{
  macc_scenario *ptr = nullptr;
  ScenarioHandle () = default;
  ScenarioHandle (const ScenarioHandle &) = delete;
  ScenarioHandle &operator= (const ScenarioHandle &) = delete;
  ~ScenarioHandle () { macc_scenario_free (ptr); }
};

struct RunHandle
{
  macc_run *ptr = nullptr;
  RunHandle () = default;
  RunHandle (RunHandle &&o) noexcept : ptr (o.ptr) { o.ptr = nullptr; }
  RunHandle (const RunHandle &) = delete;
  ~RunHandle () { macc_run_free (ptr); }
};

struct ReportHandle
{
  macc_report *ptr = nullptr;
  ~ReportHandle () { macc_report_free (ptr); }
};

void
LoadScenario (const std::string &path, ScenarioHandle &out)
{
  if (macc_scenario_load_file (path.c_str (), &out.ptr) != MACC_OK)
    throw Failure{kExitUsage, path + ": " + macc_last_error ()};
}

struct Job
{
  std::string run_id;
  const macc_scenario *scenario = nullptr;
  macc_mode mode = MACC_MODE_AGENT;
  std::uint64_t seed = 0;
  // filled by the worker
  RunHandle run;
  macc_status status = MACC_OK;
  std::string error;
};

// Independent runs share nothing, so they go to a small worker pool; results
// stay in job order.
void
RunJobs (std::vector<Job> &jobs)
{
  const unsigned hw = std::max (1u, std::thread::hardware_concurrency ());
  const std::size_t workers = std::min<std::size_t> (hw, jobs.size ());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size (); i = next++)
      {
        Job &j = jobs[i];
        j.status = macc_simulate (j.scenario, j.mode, j.seed, 0.0, &j.run.ptr);
        if (j.status != MACC_OK)
          j.error = macc_last_error ();
      }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w)
    pool.emplace_back (work);
  work ();
  for (std::thread &t : pool)
    t.join ();
  for (const Job &j : jobs)
    if (j.status != MACC_OK)
      throw Failure{j.status == MACC_E_VALIDATION ? kExitUsage : kExitRuntime, j.run_id + ": " + j.error};
}

void
WriteReport (const std::vector<Job> &jobs, const std::string &out)
{
  ReportHandle report;
  if (macc_report_create (&report.ptr) != MACC_OK)
    throw Failure{kExitRuntime, macc_last_error ()};
  for (const Job &j : jobs)
    if (macc_report_add (report.ptr, j.run_id.c_str (), j.run.ptr) != MACC_OK)
      throw Failure{kExitRuntime, macc_last_error ()};
  if (macc_report_write (report.ptr, MACC_FORMAT_CSV, out.c_str ()) != MACC_OK
      || macc_report_write (report.ptr, MACC_FORMAT_JSONL, (out + ".json").c_str ()) != MACC_OK)
    throw Failure{kExitRuntime, macc_last_error ()};
}

macc_flow_stats
Totals (const Job &j)
{
  macc_flow_stats t{};
  macc_run_totals (j.run.ptr, &t);
  return t;
}

std::string
DelayText (const macc_flow_stats &t, double v)
{
  return t.has_delay ? Shortest (v) : "-";
}

struct ModeSummary
{
  std::size_t runs = 0;
  double loss = 0.0;
  double goodput = 0.0;
  double delay = 0.0;
  std::size_t delay_runs = 0;

  void Add (const macc_flow_stats &t)
  {
    ++runs;
    loss += t.loss_rate;
    goodput += t.goodput_bps;
    if (t.has_delay)
      {
        delay += t.mean_delay_ms;
        ++delay_runs;
      }
  }
  double MeanLoss () const { return runs ? loss / static_cast<double> (runs) : 0.0; }
  double MeanGoodput () const { return runs ? goodput / static_cast<double> (runs) : 0.0; }
  std::optional<double> MeanDelay () const
  {
    if (delay_runs == 0)
      return std::nullopt;
    return delay / static_cast<double> (delay_runs);
  }
};

std::string
Opt (std::optional<double> v)
{
  return v ? Shortest (*v) : "";
}

// One block is the agent/baseline pair for a set of seeds. `label` prefixes
// each summary line (sweep value) and may be empty.
void
EmitSummary (const std::vector<std::pair<std::string, std::vector<const Job *>>> &blocks, bool with_value,
             const std::string &out)
{
  std::ostringstream csv;
  csv << (with_value ? "value," : "") << "mode,runs,mean_loss_rate,mean_delay_ms,mean_goodput_bps\n";
  for (const auto &[label, jobs] : blocks)
    {
      ModeSummary agent;
      ModeSummary baseline;
      for (const Job *j : jobs)
        (j->mode == MACC_MODE_AGENT ? agent : baseline).Add (Totals (*j));
      const std::string prefix = with_value ? label + "," : "";
      auto line = [&] (const char *name, const ModeSummary &s) {
        csv << prefix << name << ',' << s.runs << ',' << Shortest (s.MeanLoss ()) << ',' << Opt (s.MeanDelay ()) << ','
            << Shortest (s.MeanGoodput ()) << '\n';
      };
      line ("agent", agent);
      line ("baseline", baseline);
      std::optional<double> dd;
      if (agent.MeanDelay () && baseline.MeanDelay ())
        dd = *agent.MeanDelay () - *baseline.MeanDelay ();
      csv << prefix << "delta,," << Shortest (agent.MeanLoss () - baseline.MeanLoss ()) << ',' << Opt (dd) << ','
          << Shortest (agent.MeanGoodput () - baseline.MeanGoodput ()) << '\n';

      if (with_value)
        std::cout << label << '\n';
      std::printf ("  %-9s runs=%zu  loss=%.4f  delay_ms=%s  goodput_bps=%.0f\n", "agent", agent.runs,
                   agent.MeanLoss (), Opt (agent.MeanDelay ()).c_str (), agent.MeanGoodput ());
      std::printf ("  %-9s runs=%zu  loss=%.4f  delay_ms=%s  goodput_bps=%.0f\n", "baseline", baseline.runs,
                   baseline.MeanLoss (), Opt (baseline.MeanDelay ()).c_str (), baseline.MeanGoodput ());
      std::printf ("  %-9s loss=%+.4f  goodput_bps=%+.0f\n", "delta", agent.MeanLoss () - baseline.MeanLoss (),
                   agent.MeanGoodput () - baseline.MeanGoodput ());
    }
  std::fflush (stdout);
  const std::string path = out + ".summary.csv";
  std::ofstream f (path, std::ios::binary | std::ios::trunc);
  f << csv.str ();
  f.flush ();
  if (!f)
    throw Failure{kExitRuntime, "cannot write " + path};
}

std::pair<std::uint64_t, std::uint64_t>
ParseSeeds (const std::string &text)
{
  auto number = [&] (std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars (s.data (), s.data () + s.size (), v);
    if (s.empty () || ec != std::errc{} || ptr != s.data () + s.size ())
      throw Failure{kExitUsage, "--seeds: expected N or N..M, got \"" + text + "\""};
    return v;
  };
  const std::size_t dots = text.find ("..");
  if (dots == std::string::npos)
    {
      const std::uint64_t v = number (text);
      return {v, v};
    }
  const std::uint64_t lo = number (std::string_view (text).substr (0, dots));
  const std::uint64_t hi = number (std::string_view (text).substr (dots + 2));
  if (hi < lo)
    throw Failure{kExitUsage, "--seeds: empty range \"" + text + "\""};
  return {lo, hi};
}

std::vector<double>
ParseValues (const std::vector<std::string> &raw)
{
  std::vector<double> values;
  for (const std::string &token : raw)
    {
      if (token.empty ())
        continue;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars (token.data (), token.data () + token.size (), v);
      if (ec != std::errc{} || ptr != token.data () + token.size ())
        throw Failure{kExitUsage, "--values: not a number \"" + token + "\""};
      values.push_back (v);
    }
  if (values.empty ())
    throw Failure{kExitUsage, "--values: at least one value is required"};
  return values;
}

void
PrintTotals (const Job &j)
{
  const macc_flow_stats t = Totals (j);
  std::cout << "run_id,sent,delivered,dropped,loss_rate,mean_delay_ms,p95_delay_ms,goodput_bps,agent_overhead_ratio,"
               "reroutes\n"
            << j.run_id << ',' << t.sent << ',' << t.delivered << ',' << t.dropped_queue + t.dropped_noroute << ','
            << Shortest (t.loss_rate) << ',' << DelayText (t, t.mean_delay_ms) << ',' << DelayText (t, t.p95_delay_ms)
            << ',' << Shortest (t.goodput_bps) << ',' << Shortest (t.agent_overhead_ratio) << ',' << t.reroutes
            << '\n';
}

int
CmdRun (const std::string &path, const std::string &mode, std::uint64_t seed, const std::string &out)
{
  ScenarioHandle s;
  LoadScenario (path, s);
  std::vector<Job> jobs (1);
  jobs[0].mode = mode == "agent" ? MACC_MODE_AGENT : MACC_MODE_BASELINE;
  jobs[0].seed = seed;
  jobs[0].scenario = s.ptr;
  jobs[0].run_id = std::string (ModeName (jobs[0].mode)) + "-s" + std::to_string (seed);
  RunJobs (jobs);
  WriteReport (jobs, out);
  PrintTotals (jobs[0]);
  return kExitOk;
}

int
CmdCompare (const std::string &path, const std::string &seeds, const std::string &out)
{
  const auto [lo, hi] = ParseSeeds (seeds);
  ScenarioHandle s;
  LoadScenario (path, s);
  std::vector<Job> jobs;
  for (std::uint64_t seed = lo;; ++seed)
    {
      for (macc_mode m : {MACC_MODE_AGENT, MACC_MODE_BASELINE})
        {
          Job &j = jobs.emplace_back ();
          j.scenario = s.ptr;
          j.mode = m;
          j.seed = seed;
          j.run_id = std::string (ModeName (m)) + "-s" + std::to_string (seed);
        }
      if (seed == hi)
        break;
    }
  RunJobs (jobs);
  WriteReport (jobs, out);
  std::vector<const Job *> all;
  for (const Job &j : jobs)
    all.push_back (&j);
  std::cout << "compare " << path << " seeds " << lo << ".." << hi << '\n';
  EmitSummary ({{"", all}}, false, out);
  return kExitOk;
}

int
CmdSweep (const std::string &path, const std::string &param, const std::vector<std::string> &raw_values,
          const std::string &seeds, const std::string &out)
{
  const std::vector<double> values = ParseValues (raw_values);
  const auto [lo, hi] = ParseSeeds (seeds);
  ScenarioHandle base;
  LoadScenario (path, base);

  std::vector<ScenarioHandle> variants (values.size ());
  for (std::size_t i = 0; i < values.size (); ++i)
    {
      if (macc_scenario_clone (base.ptr, &variants[i].ptr) != MACC_OK)
        throw Failure{kExitRuntime, macc_last_error ()};
      const macc_status st = macc_scenario_set_param (variants[i].ptr, param.c_str (), values[i]);
      if (st != MACC_OK)
        throw Failure{st == MACC_E_INTERNAL ? kExitRuntime : kExitUsage,
                      "--param " + param + "=" + Shortest (values[i]) + ": " + macc_last_error ()};
    }

  std::vector<Job> jobs;
  for (std::size_t i = 0; i < values.size (); ++i)
    for (std::uint64_t seed = lo;; ++seed)
      {
        for (macc_mode m : {MACC_MODE_AGENT, MACC_MODE_BASELINE})
          {
            Job &j = jobs.emplace_back ();
            j.scenario = variants[i].ptr;
            j.mode = m;
            j.seed = seed;
            j.run_id = param + "=" + Shortest (values[i]) + "/" + ModeName (m) + "/s" + std::to_string (seed);
          }
        if (seed == hi)
          break;
      }
  RunJobs (jobs);
  WriteReport (jobs, out);

  std::vector<std::pair<std::string, std::vector<const Job *>>> blocks;
  const std::size_t per_value = jobs.size () / values.size ();
  for (std::size_t i = 0; i < values.size (); ++i)
    {
      auto &block = blocks.emplace_back (Shortest (values[i]), std::vector<const Job *>{});
      for (std::size_t k = 0; k < per_value; ++k)
        block.second.push_back (&jobs[i * per_value + k]);
    }
  std::cout << "sweep " << param << " over " << values.size () << " values, seeds " << lo << ".." << hi << '\n';
  EmitSummary (blocks, true, out);
  return kExitOk;
}

int
CmdValidate (const std::string &path)
{
  ScenarioHandle s;
  LoadScenario (path, s);
  macc_scenario_info info{};
  macc_scenario_info_get (s.ptr, &info);
  std::cout << path << ": ok (" << info.name << ", " << info.node_count << " nodes, " << info.link_count
            << " links, " << info.flow_count << " flows, " << Shortest (info.duration_s) << " s)\n";
  return kExitOk;
}

} // namespace

int
main (int argc, char **argv)
{
  CLI::App app{"Mobile-agent congestion control simulator"};
  app.require_subcommand (1, 1);
  app.set_help_all_flag ("--help-all");

  std::string scenario;
  std::string mode = "agent";
  std::uint64_t seed = 0;
  std::string seeds = "0..9";
  std::string out = "metrics.csv";
  std::string param;
  std::vector<std::string> values;

  CLI::App *run = app.add_subcommand ("run", "Run one experiment");
  run->add_option ("scenario", scenario, "Scenario JSON file")->required ();
  run->add_option ("--mode", mode, "agent or baseline")->check (CLI::IsMember ({"agent", "baseline"}));
  run->add_option ("--seed", seed, "Random seed")->capture_default_str ();
  run->add_option ("--out", out, "Metrics CSV path (JSON lines go to PATH.json)")->capture_default_str ();

  CLI::App *compare = app.add_subcommand ("compare", "Agent vs Baseline over a seed range");
  compare->add_option ("scenario", scenario, "Scenario JSON file")->required ();
  compare->add_option ("--seeds", seeds, "Seed range N..M")->capture_default_str ();
  compare->add_option ("--out", out, "Metrics CSV path")->capture_default_str ();

  CLI::App *sweep = app.add_subcommand ("sweep", "Compare blocks over parameter values");
  sweep->add_option ("scenario", scenario, "Scenario JSON file")->required ();
  sweep->add_option ("--param", param, "offered_load, probe_size or propagation_interval")->required ();
  sweep->add_option ("--values", values, "Comma-separated values")
      ->delimiter (',')
      ->expected (0, CLI::detail::expected_max_vector_size)
      ->required ();
  sweep->add_option ("--seeds", seeds, "Seed range N..M")->default_val ("0..0");
  sweep->add_option ("--out", out, "Metrics CSV path")->capture_default_str ();

  CLI::App *validate = app.add_subcommand ("validate", "Check a scenario file");
  validate->add_option ("scenario", scenario, "Scenario JSON file")->required ();

  try
    {
      app.parse (argc, argv);
    }
  catch (const CLI::Success &e)
    {
      return app.exit (e);
    }
  catch (const CLI::ParseError &e)
    {
      app.exit (e);
      return kExitUsage;
    }

  try
    {
      if (*run)
        return CmdRun (scenario, mode, seed, out);
      if (*compare)
        return CmdCompare (scenario, seeds, out);
      if (*sweep)
        return CmdSweep (scenario, param, values, seeds, out);
      return CmdValidate (scenario);
    }
  catch (const Failure &f)
    {
      std::cerr << "macc: " << f.message << '\n';
      return f.code;
    }
  catch (const std::exception &e)
    {
      std::cerr << "macc: " << e.what () << '\n';
      return kExitRuntime;
    }
}

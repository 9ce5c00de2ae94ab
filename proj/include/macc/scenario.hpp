#ifndef MACC_SCENARIO_HPP
#define MACC_SCENARIO_HPP

#include "macc/net_model.hpp"
#include "macc/topology.hpp"

#include <string>
#include <vector>

namespace macc {

/// Constant-bit-rate traffic source.
struct Flow
{
  std::string id;
  NodeId src;
  NodeId dst;
  TrafficClass cls = TrafficClass::BestEffort;
  double packet_size_bits = 8000.0;
  double rate_bps = 0.0;
  SimTime start = 0;
  SimTime stop = 0;

  bool operator== (const Flow &) const = default;
};

struct ProtocolParams
{
  CongestionThresholds thresholds;
  std::size_t queue_capacity = 50;        // packets per class per node
  double probe_size_bits = 8000.0;
  SimTime propagation_interval = 100'000'000; // 100 ms
  SimTime patrol_step = 10'000'000;           // 10 ms
  double agent_frame_bits = 1000.0;
  double report_frame_bits = 256.0;
  double probe_timeout_factor = 10.0;
  std::size_t reroute_sustain_reports = 2;
  std::size_t history_limit = 64;
  std::size_t agents_per_node = 1;
  double load_multiplier = 1.0;

  bool operator== (const ProtocolParams &) const = default;
};

struct Scenario
{
  std::string name;
  SimTime duration = 0;
  Topology topology;
  std::vector<Flow> flows;
  ProtocolParams params;

  bool operator== (const Scenario &) const = default;
};

/// Throws ValidationError naming the first offending field.
void ValidateScenario (const Scenario &scenario);

} // namespace macc

#endif

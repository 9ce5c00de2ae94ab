#ifndef MACC_TYPES_HPP
#define MACC_TYPES_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string_view>

namespace macc {

/// Simulated time in integer nanoseconds.
using SimTime = std::int64_t;

constexpr SimTime kNanosPerSecond = 1'000'000'000;

constexpr SimTime
SecondsToSimTime (double seconds)
{
  // llround is not constexpr in C++20
  double scaled = seconds * static_cast<double> (kNanosPerSecond);
  return static_cast<SimTime> (scaled < 0 ? scaled - 0.5 : scaled + 0.5);
}

constexpr double
SimTimeToSeconds (SimTime t)
{
  return static_cast<double> (t) / static_cast<double> (kNanosPerSecond);
}

/// Transmission time of `bits` over a link of `rate_bps`, rounded to the nearest ns.
SimTime TransmissionTime (double bits, double rate_bps);

/// Index of a node in its topology (declaration order).
struct NodeId
{
  std::uint32_t value = 0;

  constexpr NodeId () = default;
  constexpr explicit NodeId (std::uint32_t v) : value (v) {}

  constexpr auto operator<=> (const NodeId &) const = default;
  constexpr std::size_t Index () const { return value; }
};

enum class TrafficClass : std::uint8_t
{
  Background = 0,
  BestEffort = 1,
  Video = 2,
  Voice = 3,
};

constexpr std::size_t kTrafficClassCount = 4;

constexpr std::array<TrafficClass, kTrafficClassCount> kAllClasses = {
  TrafficClass::Background, TrafficClass::BestEffort, TrafficClass::Video, TrafficClass::Voice};

/// Service order: most delay-sensitive first.
constexpr std::array<TrafficClass, kTrafficClassCount> kServiceOrder = {
  TrafficClass::Voice, TrafficClass::Video, TrafficClass::BestEffort, TrafficClass::Background};

constexpr std::size_t
ClassIndex (TrafficClass c)
{
  return static_cast<std::size_t> (c);
}

std::string_view ToString (TrafficClass c);
bool ParseTrafficClass (std::string_view text, TrafficClass &out);

enum class Mode : std::uint8_t
{
  Agent,
  Baseline,
};

std::string_view ToString (Mode m);

} // namespace macc

template <>
struct std::hash<macc::NodeId>
{
  std::size_t operator() (macc::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

#endif

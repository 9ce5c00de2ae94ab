#include "macc/errors.hpp"
#include "macc/types.hpp"

#include <cmath>

namespace macc {

SimTime
TransmissionTime (double bits, double rate_bps)
{
  return static_cast<SimTime> (std::llround (bits * static_cast<double> (kNanosPerSecond) / rate_bps));
}

std::string_view
ToString (TrafficClass c)
{
  switch (c)
    {
    case TrafficClass::Background:
      return "background";
    case TrafficClass::BestEffort:
      return "best_effort";
    case TrafficClass::Video:
      return "video";
    case TrafficClass::Voice:
      return "voice";
    }
  return "unknown";
}

bool
ParseTrafficClass (std::string_view text, TrafficClass &out)
{
  for (TrafficClass c : kAllClasses)
    {
      if (ToString (c) == text)
        {
          out = c;
          return true;
        }
    }
  return false;
}

std::string_view
ToString (Mode m)
{
  return m == Mode::Agent ? "agent" : "baseline";
}

const char *
ToString (Errc code)
{
  switch (code)
    {
    case Errc::MissingLink:
      return "MissingLink";
    case Errc::PathTooShort:
      return "PathTooShort";
    case Errc::DomainError:
      return "DomainError";
    case Errc::Isolated:
      return "Isolated";
    case Errc::NoAlternative:
      return "NoAlternative";
    case Errc::DeadEnd:
      return "DeadEnd";
    case Errc::AllProbesFailed:
      return "AllProbesFailed";
    case Errc::StalePath:
      return "StalePath";
    case Errc::NoRoute:
      return "NoRoute";
    case Errc::ZeroDelay:
      return "ZeroDelay";
    case Errc::ParseError:
      return "ParseError";
    case Errc::ValidationError:
      return "ValidationError";
    case Errc::ScenarioInvalid:
      return "ScenarioInvalid";
    case Errc::UnknownParam:
      return "UnknownParam";
    case Errc::IoError:
      return "IoError";
    }
  return "Unknown";
}

} // namespace macc

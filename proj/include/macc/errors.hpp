#ifndef MACC_ERRORS_HPP
#define MACC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace macc {

enum class Errc
{
  MissingLink,
  PathTooShort,
  DomainError,
  Isolated,
  NoAlternative,
  DeadEnd,
  AllProbesFailed,
  StalePath,
  NoRoute,
  ZeroDelay,
  ParseError,
  ValidationError,
  ScenarioInvalid,
  UnknownParam,
  IoError,
};

const char *ToString (Errc code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error
{
public:
  Error (Errc code, const std::string &what)
    : std::runtime_error (std::string (ToString (code)) + ": " + what),
      m_code (code)
  {
  }

  Errc Code () const noexcept { return m_code; }

private:
  Errc m_code;
};

} // namespace macc

#endif

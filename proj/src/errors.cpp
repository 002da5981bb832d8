#include "flb/errors.hpp"

#include <fmt/format.h>

namespace flb {

FrequencyCapViolation::FrequencyCapViolation(std::size_t session, double required_hz,
                                             double f_max_hz)
    : Error(fmt::format("frequency cap violated in session {}: {:.6g} Hz required, {:.6g} Hz "
                        "available",
                        session, required_hz, f_max_hz)),
      session_(session),
      required_hz_(required_hz),
      f_max_hz_(f_max_hz) {}

ParseError::ParseError(const std::string& source, int line, int column, const std::string& what)
    : Error(fmt::format("{}:{}:{}: {}", source, line, column, what)), line_(line), column_(column) {}

}  // namespace flb

#ifndef PICALC_ERRORS_HPP
#define PICALC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace picalc {

struct CyclicSubstitution : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StateBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotFresh : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InternalAction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
        line(line_), col(col_) {}
};

}  // namespace picalc

#endif

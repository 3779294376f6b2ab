#pragma once

#include <stdexcept>
#include <string>

namespace uhs {

enum class ErrorKind {
  structural,   // size/shape mismatch, bad arguments
  resolution,   // requested feature below grid resolution
  format,       // bad file header or payload
  precondition, // a documented operation precondition failed
  dependency,   // missing required input (e.g. nontrapping certificate)
  integration,  // ODE step-size underflow or non-convergence
  trapped_flow, // operation refused on a trapped-suspect flow
  unsupported,  // not provided by this toolkit (e.g. exact Y norm)
  usage,        // CLI misuse
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

} // namespace uhs

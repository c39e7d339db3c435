#pragma once

#include <stdexcept>
#include <string>

namespace dwellopt {

// Base for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition.
struct ContractError : Error {
  using Error::Error;
};

// Input data parsed but does not satisfy a domain invariant.
struct ValidationError : Error {
  using Error::Error;
};

// Input data could not be parsed.
struct ParseError : Error {
  using Error::Error;
};

// An inconsistent or unsatisfiable configuration.
struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// No plan satisfying the hard constraints could be constructed.
struct InfeasibleError : Error {
  using Error::Error;
};

}  // namespace dwellopt

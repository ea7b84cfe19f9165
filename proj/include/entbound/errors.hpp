#pragma once

#include <stdexcept>
#include <string>

namespace entbound {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// invalid or out-of-range input parameters
struct ParameterError : Error {
  using Error::Error;
};

// problem too large for dense/eager evaluation
struct CapacityError : Error {
  using Error::Error;
};

// state or triple outside its physical region
struct ValidityError : Error {
  using Error::Error;
};

// argument outside the domain of a closed form
struct DomainError : Error {
  using Error::Error;
};

struct UnsupportedError : Error {
  using Error::Error;
};

struct IndexError : Error {
  using Error::Error;
};

struct AlreadySeparableError : Error {
  using Error::Error;
};

// malformed input files
struct SchemaError : Error {
  using Error::Error;
};

}  // namespace entbound

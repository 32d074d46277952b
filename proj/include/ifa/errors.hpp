#pragma once

#include <stdexcept>
#include <string>

namespace ifa {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejected inputs: bad batches, dimension mismatches, empty sets.
struct InputError : Error {
  using Error::Error;
};

// Invalid configuration values (range/type/unknown key).
struct ConfigError : Error {
  using Error::Error;
};

// Dirichlet draw could not satisfy the minimum-size constraint.
struct PartitionError : Error {
  using Error::Error;
};

struct AggregationError : Error {
  using Error::Error;
};

struct ResetError : Error {
  using Error::Error;
};

// Cross-structure invariant broken (invalid partition, non-finite params).
struct IntegrityError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace ifa

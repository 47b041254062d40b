#pragma once

#include <stdexcept>
#include <string>

namespace ecm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Timestamp went backwards for a single-writer synopsis.
class OrderingError : public Error {
 public:
  using Error::Error;
};

// Query range outside (0, N].
class RangeError : public Error {
 public:
  using Error::Error;
};

// Order-preserving merge requested for a structure that cannot support it
// (count-based windows lose the order of the false bits).
class UnsupportedMergeError : public Error {
 public:
  using Error::Error;
};

// Sketches or synopses that differ in dimensions, seeds or window.
class IncompatibleError : public Error {
 public:
  using Error::Error;
};

// More in-window arrivals than the wave was sized for.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Key outside the configured universe.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration parameters (epsilon, delta, window length).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed binary frame or input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed input stream.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ecm

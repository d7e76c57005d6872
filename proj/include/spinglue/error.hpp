#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace spinglue {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON syntax or schema).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Gluing data that does not describe a closed oriented triangulation.
class TriangulationError : public Error {
 public:
  using Error::Error;
};

// Coincident ideal points, shapes at 0 or 1, and similar degeneracies.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class SingularJacobianError : public Error {
 public:
  using Error::Error;
};

// A representation that does not fit its presentation.
class RepresentationError : public Error {
 public:
  using Error::Error;
};

class PlacementError : public Error {
 public:
  using Error::Error;
};

class HolonomyError : public Error {
 public:
  using Error::Error;
};

namespace detail {

// Short numeric text for diagnostics.
inline std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

}  // namespace detail

}  // namespace spinglue

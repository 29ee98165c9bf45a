#pragma once

#include <stdexcept>
#include <string>

namespace gossip {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A pair of nodes that is not an edge of the graph, or an edge index out of range.
class InvalidEdge : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class SingularRow : public Error {
 public:
  using Error::Error;
};

class NoSolution : public Error {
 public:
  using Error::Error;
};

class GenerationFailure : public Error {
 public:
  using Error::Error;
};

class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

}  // namespace gossip

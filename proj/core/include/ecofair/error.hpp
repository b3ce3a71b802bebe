#pragma once

#include <stdexcept>
#include <string>

namespace ecofair {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration rejected at load or validation time.
class InvalidConfig : public Error {
 public:
  explicit InvalidConfig(const std::string& what) : Error("invalid config: " + what) {}
};

class MalformedMatrix : public InvalidConfig {
 public:
  explicit MalformedMatrix(const std::string& what) : InvalidConfig("malformed matrix: " + what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("dimension mismatch: " + what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

class UnknownAgent : public Error {
 public:
  explicit UnknownAgent(const std::string& what) : Error("unknown agent: " + what) {}
};

class EmptyRouteSet : public Error {
 public:
  explicit EmptyRouteSet(const std::string& what) : Error("empty route set: " + what) {}
};

class NonFiniteGradient : public Error {
 public:
  explicit NonFiniteGradient(const std::string& what) : Error("non-finite gradient: " + what) {}
};

class RaggedInput : public Error {
 public:
  explicit RaggedInput(const std::string& what) : Error("ragged input: " + what) {}
};

// A runtime invariant (capacity, emission bound, conservation) failed.
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what) : Error("invariant violated: " + what) {}
};

}  // namespace ecofair

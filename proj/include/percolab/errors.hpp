#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace percolab {

// Bad numeric parameter (p outside its range, q < p, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Lattice or convex geometry that cannot support the requested operation.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Experiment configuration failing its schema. `keys` lists every offending
// key; what() names them too.
class SchemaError : public ParameterError {
 public:
  SchemaError(const std::string& message, std::vector<std::string> keys);
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::vector<std::string> keys_;
};

// Valid configuration for an unsupported (d, experiment) combination.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace percolab

#pragma once

#include <stdexcept>
#include <string>

namespace mirage {

// Invalid geometry, key material or flag combination.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation called in a state where it is not defined (e.g. evicting from an
// empty data store, an out-of-range skew id).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// More lines installed than the data store can hold. Only reachable when
// global evictions are disabled (bug-compat).
class CapacityViolation : public std::runtime_error {
 public:
  CapacityViolation(const std::string& what, std::uint64_t installed,
                    std::uint64_t capacity)
      : std::runtime_error(what), installed_(installed), capacity_(capacity) {}

  std::uint64_t installed() const { return installed_; }
  std::uint64_t capacity() const { return capacity_; }

 private:
  std::uint64_t installed_;
  std::uint64_t capacity_;
};

}  // namespace mirage

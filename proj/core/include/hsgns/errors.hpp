#pragma once

#include <stdexcept>
#include <string>

namespace hsgns {

// Malformed or unreadable input (corpus, dataset or model files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation left the domain where it is defined: a point fell off the
// hyperboloid, a norm became non-finite, and so on.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hsgns

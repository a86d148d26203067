#pragma once

#include <stdexcept>
#include <string>

namespace tptest {

// Error families map 1:1 onto CLI exit codes (see tools/): argument -> 2,
// data validation -> 3, estimation/testing -> 4, I/O -> 5.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tptest

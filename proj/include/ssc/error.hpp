#pragma once

#include <stdexcept>
#include <string>

namespace ssc {

// Exception categories that the CLI maps to exit codes (usage=1, data=2,
// training=3). Library precondition violations throw std::invalid_argument
// or std::out_of_range directly.

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssc

#pragma once

#include <stdexcept>
#include <string>

namespace ecogvoice {

// Bad or inconsistent input data (manifest rows, audio files, feature tables).
// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ecogvoice

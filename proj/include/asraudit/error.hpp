#pragma once

#include <stdexcept>
#include <string>

namespace asraudit {

// Bad or inconsistent user input: malformed files, missing artifacts, schema
// mismatches. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A well-formed input that cannot be solved: rank deficiency, zero variance,
// undefined SNR. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace asraudit

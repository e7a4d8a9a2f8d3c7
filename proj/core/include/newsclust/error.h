#ifndef NEWSCLUST_ERROR_H_
#define NEWSCLUST_ERROR_H_

#include <stdexcept>
#include <string>

namespace newsclust {

// Bad input: malformed files, inconsistent dimensions, unknown ids, bad
// configuration. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failures while doing work on valid input: I/O, unreachable services,
// degenerate training data. Maps to CLI exit code 3.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace newsclust

#endif  // NEWSCLUST_ERROR_H_

#ifndef CANTM_ERROR_HPP_
#define CANTM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cantm {

// Input could not be parsed; `what()` carries the file/line locus.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input parsed but violates a documented invariant or precondition.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A key (embedding id, document id, ...) could not be resolved.
class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation produced a non-finite or undefined value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cantm

#endif  // CANTM_ERROR_HPP_

#pragma once

#include <stdexcept>
#include <string>

namespace redpatrol {

// Malformed input text (graph files, trace files, spec files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Record whose vector lengths disagree with the declared header sizes.
class MismatchError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Query outside the covered time range, or not aligned to the trace grid.
class RangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector/tensor shapes that do not agree.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace redpatrol

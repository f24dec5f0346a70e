#pragma once

#include <stdexcept>
#include <string>

namespace pseudolab {

/// Violated invariant or precondition (bad geometry, mismatched shapes, ...).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Input is structurally fine but the computation is undefined on it
/// (all-equal GMM samples, constant regressor, dataset without ground truth).
class DegenerateError : public std::runtime_error {
 public:
  explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

/// Unreadable or syntactically malformed input (missing file, bad config key).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pseudolab

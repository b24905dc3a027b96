#ifndef GHZBELL_ERRORS_HPP
#define GHZBELL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ghzbell {

// Invalid arguments or malformed inputs supplied by the caller (bad party
// counts, non-unit directions, unnormalized probability tables, ...).
class usage_error : public std::invalid_argument {
 public:
  explicit usage_error(const std::string& what) : std::invalid_argument(what) {}
};

// A request whose exact answer would exceed a configured size limit
// (e.g. a correlation table for more parties than the table cap allows).
class resource_error : public std::runtime_error {
 public:
  explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

// An internal invariant failed: intermediate results are outside the range
// that exact arithmetic would permit by more than the documented tolerance.
class consistency_error : public std::logic_error {
 public:
  explicit consistency_error(const std::string& what) : std::logic_error(what) {}
};

}  // namespace ghzbell

#endif  // GHZBELL_ERRORS_HPP

#ifndef FIELDCLICK_ERROR_HPP
#define FIELDCLICK_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fieldclick {

/// Raised for violated preconditions and invalid configurations.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fieldclick

#endif  // FIELDCLICK_ERROR_HPP

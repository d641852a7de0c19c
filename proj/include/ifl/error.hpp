#ifndef IFL_ERROR_HPP_
#define IFL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ifl {

// A caller violated an operation's documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A file or JSON value does not match the expected schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ifl

#endif  // IFL_ERROR_HPP_

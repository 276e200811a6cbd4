#pragma once

#include <stdexcept>
#include <string>

namespace blips {

// Maps to CLI exit code 2.
class InvalidArgument : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// Maps to CLI exit code 3.
class NumericFailure : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class GenerationFailure : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string &what)
{
  if (!cond) {
    throw InvalidArgument(what);
  }
}

} // namespace blips

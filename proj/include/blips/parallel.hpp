#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace blips {

// Exceptions must not leave an OpenMP region. Loop bodies run through
// capture(); afterwards rethrow() raises the error of the lowest index, so the
// reported failure does not depend on thread scheduling.
class LoopErrors
{
public:
  template <class Body>
  void capture(std::size_t index, Body &&body) noexcept
  {
    try {
      body();
    } catch (...) {
      const std::lock_guard<std::mutex> lock(mutex_);
      if (!error_ || index < index_) {
        error_ = std::current_exception();
        index_ = index;
      }
    }
  }

  void rethrow() const
  {
    if (error_) {
      std::rethrow_exception(error_);
    }
  }

private:
  std::mutex mutex_;
  std::exception_ptr error_;
  std::size_t index_ = 0;
};

} // namespace blips

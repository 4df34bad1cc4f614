#pragma once

#include <stdexcept>
#include <string>

namespace msr {

// Machine-parsable error classes. The CLI prints one line per failure:
//   error: <slug>: <message>
enum class ErrorClass {
  invalid_argument,
  capacity,
  too_many_erasures,
  repair_failure,
  corruption,
  io,
  singular_matrix,
  search_failure,
  certificate_failure,
  division_by_zero,
};

const char* error_slug(ErrorClass cls);

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, const std::string& msg)
      : std::runtime_error(msg), cls_(cls) {}
  ErrorClass cls() const { return cls_; }

private:
  ErrorClass cls_;
};

[[noreturn]] inline void fail(ErrorClass cls, const std::string& msg) {
  throw Error(cls, msg);
}

}  // namespace msr

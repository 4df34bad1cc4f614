#include "msr/gf.hpp"

#include <string>

namespace msr {

const char* error_slug(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::invalid_argument: return "invalid-argument";
    case ErrorClass::capacity: return "capacity";
    case ErrorClass::too_many_erasures: return "too-many-erasures";
    case ErrorClass::repair_failure: return "repair-failure";
    case ErrorClass::corruption: return "corruption";
    case ErrorClass::io: return "io";
    case ErrorClass::singular_matrix: return "singular-matrix";
    case ErrorClass::search_failure: return "search-failure";
    case ErrorClass::certificate_failure: return "certificate-failure";
    case ErrorClass::division_by_zero: return "division-by-zero";
  }
  return "unknown";
}

std::uint32_t FieldContext::default_poly(unsigned width) {
  // One primitive polynomial per supported width; the constructor re-proves
  // primitivity, so a bad entry here cannot slip through silently.
  switch (width) {
    case 4: return 0x13;
    case 5: return 0x25;
    case 6: return 0x43;
    case 7: return 0x89;
    case 8: return 0x11D;
    case 9: return 0x211;
    case 10: return 0x409;
    case 11: return 0x805;
    case 12: return 0x1053;
    case 13: return 0x201B;
    case 14: return 0x4443;
    case 15: return 0x8003;
    case 16: return 0x1100B;
    default:
      fail(ErrorClass::invalid_argument,
           "field width must be between 4 and 16, got " + std::to_string(width));
  }
}

FieldContext::FieldContext(unsigned width, std::uint32_t poly)
    : width_(width), poly_(poly) {
  if (width < 4 || width > 16)
    fail(ErrorClass::invalid_argument,
         "field width must be between 4 and 16, got " + std::to_string(width));
  const std::uint32_t q = 1u << width;
  if ((poly >> width) != 1u || (poly & 1u) == 0)
    fail(ErrorClass::invalid_argument,
         "reduction polynomial must have degree w and constant term 1");
  exp_.assign(2 * (q - 1), 0);
  log_.assign(q, 0);
  std::uint32_t x = 1;
  for (std::uint32_t i = 0; i < q - 1; ++i) {
    if (x == 1 && i != 0)
      fail(ErrorClass::invalid_argument,
           "reduction polynomial is not primitive: x has order " +
               std::to_string(i));
    exp_[i] = static_cast<fe_t>(x);
    log_[x] = i;
    x <<= 1;
    if (x & q) x ^= poly;
  }
  if (x != 1)
    fail(ErrorClass::invalid_argument,
         "reduction polynomial is not primitive (x does not generate)");
  for (std::uint32_t i = q - 1; i < 2 * (q - 1); ++i) exp_[i] = exp_[i - (q - 1)];
}

fe_t FieldContext::inv(fe_t a) const {
  if (a == 0) fail(ErrorClass::division_by_zero, "inverse of zero");
  const std::uint32_t l = log_[a];
  return l == 0 ? fe_t{1} : exp_[(order() - 1) - l];
}

fe_t FieldContext::pow(fe_t a, std::uint64_t e) const {
  if (a == 0) return e == 0 ? fe_t{1} : fe_t{0};
  return exp_[(static_cast<std::uint64_t>(log_[a]) * e) % (order() - 1)];
}

std::uint32_t FieldContext::log(fe_t a) const {
  if (a == 0) fail(ErrorClass::division_by_zero, "log of zero");
  return log_[a];
}

}  // namespace msr

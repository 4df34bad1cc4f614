#pragma once

#include <cstdint>
#include <vector>

#include "msr/errors.hpp"

namespace msr {

// Element of GF(2^w), 4 <= w <= 16, stored as its polynomial bitmask.
using fe_t = std::uint16_t;

// Table-based arithmetic for GF(2^w) modulo a primitive polynomial.
// theta = x (value 2) generates the multiplicative group; building the
// antilog table doubles as the primitivity proof: x must first return to 1
// after exactly 2^w - 1 multiplications.
class FieldContext {
public:
  FieldContext(unsigned width, std::uint32_t poly);

  static std::uint32_t default_poly(unsigned width);
  static FieldContext with_default_poly(unsigned width) {
    return FieldContext(width, default_poly(width));
  }

  unsigned width() const { return width_; }
  std::uint32_t poly() const { return poly_; }
  std::uint32_t order() const { return 1u << width_; }
  // Serialized size of one element: 1 byte up to GF(256), 2 bytes above.
  unsigned elem_bytes() const { return width_ <= 8 ? 1u : 2u; }

  fe_t add(fe_t a, fe_t b) const { return a ^ b; }
  fe_t sub(fe_t a, fe_t b) const { return a ^ b; }
  fe_t neg(fe_t a) const { return a; }  // characteristic 2
  fe_t mul(fe_t a, fe_t b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }
  fe_t inv(fe_t a) const;
  fe_t div(fe_t a, fe_t b) const { return mul(a, inv(b)); }
  fe_t pow(fe_t a, std::uint64_t e) const;

  fe_t theta() const { return 2; }
  fe_t exp(std::uint64_t i) const { return exp_[i % (order() - 1)]; }
  std::uint32_t log(fe_t a) const;

  bool operator==(const FieldContext& o) const {
    return width_ == o.width_ && poly_ == o.poly_;
  }

private:
  unsigned width_;
  std::uint32_t poly_;
  std::vector<fe_t> exp_;          // 2(q-1) entries so mul needs no modulo
  std::vector<std::uint32_t> log_;
};

}  // namespace msr

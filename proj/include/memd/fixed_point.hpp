#pragma once

// Q16.8 saturating fixed-point arithmetic mirroring a hardware datapath:
// 24-bit logical samples held in a 32-bit container, shift-add constant
// multiplication (canonical signed digit encoding) and reciprocal-table
// division. A wider 24-fraction-bit accumulator backs the envelope and
// spline datapaths, the software analog of a DSP slice's wide adder chain.

#include <cstdint>
#include <compare>
#include <vector>

#include "memd/errors.hpp"

namespace memd::fixed {

// Sticky status flags for one decomposition. Install with ContextScope on
// the thread running the decomposition; arithmetic on that thread records
// saturation and reciprocal-table misses here. A context must not be shared
// between concurrent decompositions.
struct Context {
  std::uint64_t saturations = 0;
  std::uint64_t table_misses = 0;

  bool saturated() const noexcept { return saturations != 0; }
  void reset() noexcept { saturations = 0; table_misses = 0; }
};

Context* active_context() noexcept;

class ContextScope {
 public:
  explicit ContextScope(Context& ctx) noexcept;
  ~ContextScope();
  ContextScope(const ContextScope&) = delete;
  ContextScope& operator=(const ContextScope&) = delete;

 private:
  Context* previous_;
};

namespace detail {
void note_saturation() noexcept;
void note_table_miss() noexcept;

// Arithmetic right shift with round-to-nearest, ties to even.
std::int64_t rne_shift(std::int64_t value, int bits) noexcept;
std::int64_t rne_shift_wide(__int128 value, int bits) noexcept;
// Rounded quotient a/b for b > 0, ties to even.
std::int64_t rne_div(std::int64_t num, std::int64_t den) noexcept;
}  // namespace detail

// One Q16.8 sample: 1 sign + 15 integer + 8 fraction bits, value = raw/2^8.
// All arithmetic saturates to [-32768.0, +32767.99609375] and reports
// saturation through the active Context.
class Fixed {
 public:
  static constexpr int kFracBits = 8;
  static constexpr std::int32_t kRawMax = (1 << 23) - 1;
  static constexpr std::int32_t kRawMin = -(1 << 23);

  constexpr Fixed() = default;

  static Fixed from_raw(std::int64_t raw) noexcept;
  static Fixed from_real(double v) noexcept;  // round-to-nearest-even
  static Fixed from_int(std::int64_t v) noexcept;

  std::int32_t raw() const noexcept { return raw_; }
  double to_real() const noexcept { return static_cast<double>(raw_) / 256.0; }

  friend Fixed operator+(Fixed a, Fixed b) noexcept {
    return from_raw(static_cast<std::int64_t>(a.raw_) + b.raw_);
  }
  friend Fixed operator-(Fixed a, Fixed b) noexcept {
    return from_raw(static_cast<std::int64_t>(a.raw_) - b.raw_);
  }
  // Full-width product, then arithmetic right shift by 8 with RNE rounding.
  friend Fixed operator*(Fixed a, Fixed b) noexcept {
    const std::int64_t p = static_cast<std::int64_t>(a.raw_) * b.raw_;
    return from_raw(detail::rne_shift(p, kFracBits));
  }
  Fixed operator-() const noexcept { return from_raw(-static_cast<std::int64_t>(raw_)); }

  friend auto operator<=>(Fixed a, Fixed b) noexcept { return a.raw_ <=> b.raw_; }
  friend bool operator==(Fixed a, Fixed b) noexcept { return a.raw_ == b.raw_; }

 private:
  std::int32_t raw_ = 0;
};

struct CsdTerm {
  std::int8_t sign;    // +1 or -1
  std::uint8_t shift;  // contributes sign * 2^-shift of the multiplicand
};

// Shift-add encoding of a real constant in (-2, 2), quantized at 26
// fractional bits with non-adjacent signed digits. Multiplying by the
// constant reduces to shifted adds/subtracts of the multiplicand.
class CsdConstant {
 public:
  static constexpr int kFracBits = 26;

  CsdConstant() = default;  // zero
  explicit CsdConstant(double value);

  double value() const noexcept { return value_; }
  const std::vector<CsdTerm>& terms() const noexcept { return terms_; }
  // Sum of the signed power-of-two terms; equals value() within 2^-27.
  double reconstructed() const noexcept;
  // Signed integer multiplier: sum of +-2^(kFracBits - shift).
  std::int64_t multiplier() const noexcept { return multiplier_; }

 private:
  double value_ = 0.0;
  std::int64_t multiplier_ = 0;
  std::vector<CsdTerm> terms_;
};

// a * c via the shift-add encoding, one rounding at the end.
Fixed csd_mul(Fixed a, const CsdConstant& c) noexcept;

// num / den through the precomputed reciprocal table (den in [2^-8, 256]).
// Positive den only; outside the table domain falls back to exact integer
// division and counts a table miss on the active context.
Fixed div_lut(Fixed num, Fixed den);

// round(2^32 / den_raw) for den_raw > 0: the Q.24 reciprocal of the Q16.8
// value den_raw/2^8. Table-backed for den_raw <= 65536.
std::int64_t recip_q24(std::int64_t den_raw);

// round(2^48 / d) for integer d > 0, table-backed for d <= 65536. Backs the
// segment-normalized spline evaluation, where the interval ratio needs more
// headroom than the Q.24 divider table provides.
std::int64_t recip_q48(std::int64_t d);

// Wide internal accumulator: int64 raw with 24 fraction bits. Used by the
// spline and envelope datapaths; never saturates at pipeline magnitudes.
class Accum {
 public:
  static constexpr int kFracBits = 24;

  constexpr Accum() = default;

  static Accum from_raw(std::int64_t raw) noexcept { return Accum(raw); }
  static Accum from_fixed(Fixed f) noexcept {
    return Accum(static_cast<std::int64_t>(f.raw()) << (kFracBits - Fixed::kFracBits));
  }
  static Accum from_int(std::int64_t v) noexcept { return Accum(v << kFracBits); }
  static Accum from_real(double v) noexcept;

  std::int64_t raw() const noexcept { return raw_; }
  double to_real() const noexcept { return static_cast<double>(raw_) / 16777216.0; }
  Fixed to_fixed() const noexcept {
    return Fixed::from_raw(detail::rne_shift(raw_, kFracBits - Fixed::kFracBits));
  }

  friend Accum operator+(Accum a, Accum b) noexcept { return Accum(a.raw_ + b.raw_); }
  friend Accum operator-(Accum a, Accum b) noexcept { return Accum(a.raw_ - b.raw_); }
  friend Accum operator*(Accum a, Accum b) noexcept {
    const __int128 p = static_cast<__int128>(a.raw_) * b.raw_;
    return Accum(detail::rne_shift_wide(p, kFracBits));
  }
  Accum operator-() const noexcept { return Accum(-raw_); }
  Accum& operator+=(Accum o) noexcept { raw_ += o.raw_; return *this; }

  // Exact product with a small integer (no rounding).
  Accum mul_int(std::int64_t k) const noexcept { return Accum(raw_ * k); }
  // Product with a CSD-encoded constant, one rounding.
  Accum mul_csd(const CsdConstant& c) const noexcept {
    const __int128 p = static_cast<__int128>(raw_) * c.multiplier();
    return Accum(detail::rne_shift_wide(p, CsdConstant::kFracBits));
  }

  // Table-backed reciprocal of a positive integer.
  static Accum recip_pos_int(std::int64_t d) { return Accum(recip_q24(d << Fixed::kFracBits)); }
  // Exact rounded quotient for positive den (the table-miss path).
  static Accum div_pos(Accum num, Accum den) noexcept;
  // num/den in [0, 1] for integers 0 <= num <= den, at full Acc precision.
  static Accum unit_ratio(std::int64_t num, std::int64_t den) {
    const __int128 p = static_cast<__int128>(num) * recip_q48(den);
    return Accum(detail::rne_shift_wide(p, 24));
  }
  // Division by a positive integer span through the fine reciprocal table;
  // the error stays near one raw ulp independent of the span.
  Accum div_int(std::int64_t den) const {
    const __int128 p = static_cast<__int128>(raw_) * recip_q48(den);
    return Accum(detail::rne_shift_wide(p, 48));
  }

  friend auto operator<=>(Accum a, Accum b) noexcept = default;

 private:
  constexpr explicit Accum(std::int64_t raw) : raw_(raw) {}
  std::int64_t raw_ = 0;
};

}  // namespace memd::fixed

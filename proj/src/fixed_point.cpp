#include "memd/fixed_point.hpp"

#include <cmath>
#include <mutex>

namespace memd::fixed {

namespace {
thread_local Context* t_active_context = nullptr;
}  // namespace

Context* active_context() noexcept { return t_active_context; }

ContextScope::ContextScope(Context& ctx) noexcept : previous_(t_active_context) {
  t_active_context = &ctx;
}

ContextScope::~ContextScope() { t_active_context = previous_; }

namespace detail {

void note_saturation() noexcept {
  if (t_active_context != nullptr) ++t_active_context->saturations;
}

void note_table_miss() noexcept {
  if (t_active_context != nullptr) ++t_active_context->table_misses;
}

std::int64_t rne_shift(std::int64_t value, int bits) noexcept {
  if (bits == 0) return value;
  const std::int64_t floor = value >> bits;
  const std::int64_t rem = value - (floor << bits);
  const std::int64_t half = std::int64_t{1} << (bits - 1);
  if (rem > half || (rem == half && (floor & 1))) return floor + 1;
  return floor;
}

std::int64_t rne_shift_wide(__int128 value, int bits) noexcept {
  const __int128 floor = value >> bits;
  const __int128 rem = value - (floor << bits);
  const __int128 half = static_cast<__int128>(1) << (bits - 1);
  __int128 out = floor;
  if (rem > half || (rem == half && (floor & 1))) out = floor + 1;
  return static_cast<std::int64_t>(out);
}

std::int64_t rne_div(std::int64_t num, std::int64_t den) noexcept {
  const std::int64_t q = num >= 0 ? num / den : -((-num) / den);
  const std::int64_t rem = num - q * den;  // sign follows num
  const std::int64_t twice = 2 * (rem >= 0 ? rem : -rem);
  if (twice > den || (twice == den && (q & 1))) return rem >= 0 ? q + 1 : q - 1;
  return q;
}

}  // namespace detail

namespace {

std::int32_t saturate(std::int64_t raw) noexcept {
  if (raw > Fixed::kRawMax) {
    detail::note_saturation();
    return Fixed::kRawMax;
  }
  if (raw < Fixed::kRawMin) {
    detail::note_saturation();
    return Fixed::kRawMin;
  }
  return static_cast<std::int32_t>(raw);
}

}  // namespace

Fixed Fixed::from_raw(std::int64_t raw) noexcept {
  Fixed f;
  f.raw_ = saturate(raw);
  return f;
}

Fixed Fixed::from_real(double v) noexcept {
  if (!std::isfinite(v)) {
    detail::note_saturation();
    Fixed f;
    f.raw_ = v > 0 ? kRawMax : (v < 0 ? kRawMin : 0);
    return f;
  }
  const double scaled = v * 256.0;
  if (scaled >= 9e15) return from_raw(std::int64_t{1} << 60);   // saturates and flags
  if (scaled <= -9e15) return from_raw(-(std::int64_t{1} << 60));
  // nearbyint honors the default FE_TONEAREST mode: round half to even.
  return from_raw(static_cast<std::int64_t>(std::nearbyint(scaled)));
}

Fixed Fixed::from_int(std::int64_t v) noexcept { return from_raw(v << kFracBits); }

CsdConstant::CsdConstant(double value) : value_(value) {
  if (!(value > -2.0 && value < 2.0))
    throw DomainError("CsdConstant: constant out of (-2, 2)");
  std::int64_t c = static_cast<std::int64_t>(std::nearbyint(value * (std::int64_t{1} << kFracBits)));
  multiplier_ = c;
  // Non-adjacent form: digits in {-1, 0, +1}, no two adjacent nonzero.
  int bit = 0;
  while (c != 0) {
    if (c & 1) {
      const int digit = 2 - static_cast<int>(c & 3);  // +1 if c % 4 == 1, -1 if == 3
      c -= digit;
      terms_.push_back(CsdTerm{static_cast<std::int8_t>(digit),
                               static_cast<std::uint8_t>(kFracBits - bit)});
    }
    c >>= 1;
    ++bit;
  }
}

double CsdConstant::reconstructed() const noexcept {
  double sum = 0.0;
  for (const CsdTerm& t : terms_) sum += t.sign * std::ldexp(1.0, -static_cast<int>(t.shift));
  return sum;
}

Fixed csd_mul(Fixed a, const CsdConstant& c) noexcept {
  // The integer multiplier equals the sum of the shifted CSD addends, so a
  // single wide product reproduces the shift-add datapath bit for bit.
  const __int128 p = static_cast<__int128>(a.raw()) * c.multiplier();
  return Fixed::from_raw(detail::rne_shift_wide(p, CsdConstant::kFracBits));
}

namespace {

constexpr std::int64_t kRecipTableLast = 65536;  // den = 256.0 in Q16.8

const std::vector<std::int64_t>& recip_table() {
  static const std::vector<std::int64_t> table = [] {
    std::vector<std::int64_t> t(kRecipTableLast + 1, 0);
    for (std::int64_t d = 1; d <= kRecipTableLast; ++d)
      t[static_cast<std::size_t>(d)] = detail::rne_div(std::int64_t{1} << 32, d);
    return t;
  }();
  return table;
}

}  // namespace

std::int64_t recip_q24(std::int64_t den_raw) {
  if (den_raw <= 0) throw DomainError("recip_q24: denominator must be positive");
  if (den_raw <= kRecipTableLast) return recip_table()[static_cast<std::size_t>(den_raw)];
  detail::note_table_miss();
  return detail::rne_div(std::int64_t{1} << 32, den_raw);
}

namespace {

const std::vector<std::int64_t>& recip48_table() {
  static const std::vector<std::int64_t> table = [] {
    std::vector<std::int64_t> t(kRecipTableLast + 1, 0);
    for (std::int64_t d = 1; d <= kRecipTableLast; ++d)
      t[static_cast<std::size_t>(d)] = detail::rne_div(std::int64_t{1} << 48, d);
    return t;
  }();
  return table;
}

}  // namespace

std::int64_t recip_q48(std::int64_t d) {
  if (d <= 0) throw DomainError("recip_q48: denominator must be positive");
  if (d <= kRecipTableLast) return recip48_table()[static_cast<std::size_t>(d)];
  return detail::rne_div(std::int64_t{1} << 48, d);
}

Fixed div_lut(Fixed num, Fixed den) {
  if (den.raw() <= 0) throw DomainError("div_lut: denominator must be positive");
  if (den.raw() <= kRecipTableLast) {
    const std::int64_t r = recip_table()[static_cast<std::size_t>(den.raw())];
    const __int128 p = static_cast<__int128>(num.raw()) * r;
    return Fixed::from_raw(detail::rne_shift_wide(p, 24));
  }
  // Beyond the table domain: exact integer division.
  detail::note_table_miss();
  return Fixed::from_raw(detail::rne_div(static_cast<std::int64_t>(num.raw()) << Fixed::kFracBits,
                                         den.raw()));
}

Accum Accum::from_real(double v) noexcept {
  const double scaled = v * 16777216.0;
  if (scaled >= 9.0e18) return Accum::from_raw(std::int64_t{1} << 62);
  if (scaled <= -9.0e18) return Accum::from_raw(-(std::int64_t{1} << 62));
  return Accum::from_raw(static_cast<std::int64_t>(std::nearbyint(scaled)));
}

Accum Accum::div_pos(Accum num, Accum den) noexcept {
  const __int128 scaled = static_cast<__int128>(num.raw_) << kFracBits;
  const __int128 d = den.raw_;
  __int128 q = scaled >= 0 ? scaled / d : -((-scaled) / d);
  const __int128 rem = scaled - q * d;
  const __int128 twice = 2 * (rem >= 0 ? rem : -rem);
  if (twice > d || (twice == d && (static_cast<std::int64_t>(q) & 1)))
    q += rem >= 0 ? 1 : -1;
  return Accum(static_cast<std::int64_t>(q));
}

}  // namespace memd::fixed

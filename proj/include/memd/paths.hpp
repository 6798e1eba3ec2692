#pragma once

// Arithmetic path policies. The pipeline is templated on one of these two:
// RealPath runs everything in double as the reference, FixedPath runs the
// bit-reproducible Q16.8 datapath with the wide Q.24 accumulator inside the
// spline and envelope stages.

#include <cstdint>

#include "memd/fixed_point.hpp"

namespace memd {

enum class ArithPath { real, fixed };

struct RealPath {
  using Scalar = double;
  using Acc = double;
  using Const = double;
  static constexpr bool kIsFixed = false;
  static constexpr ArithPath kId = ArithPath::real;

  static Scalar from_real(double v) noexcept { return v; }
  static double to_real(Scalar v) noexcept { return v; }
  static Acc widen(Scalar v) noexcept { return v; }
  static Scalar narrow(Acc v) noexcept { return v; }
  static Acc acc_int(std::int64_t v) noexcept { return static_cast<double>(v); }
  static Acc acc_zero() noexcept { return 0.0; }
  static Acc mul_int(Acc v, std::int64_t k) noexcept { return v * static_cast<double>(k); }
  static Acc recip_pos_int(std::int64_t d) { return 1.0 / static_cast<double>(d); }
  static Acc div_pos(Acc num, Acc den) noexcept { return num / den; }
  static Acc unit_ratio(std::int64_t num, std::int64_t den) noexcept {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  static Acc div_int(Acc num, std::int64_t den) noexcept {
    return num / static_cast<double>(den);
  }
  static Acc third(Acc v) noexcept { return v / 3.0; }
  static Const make_const(double v) { return v; }
  static Acc mul_const(Acc v, Const c) noexcept { return v * c; }

  template <class Dirs>
  static Scalar project_combine(const Scalar* values, int n, const Dirs& dirs, int k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += dirs.coefficient(k, i) * values[i];
    return acc;
  }
};

struct FixedPath {
  using Scalar = fixed::Fixed;
  using Acc = fixed::Accum;
  using Const = fixed::CsdConstant;
  static constexpr bool kIsFixed = true;
  static constexpr ArithPath kId = ArithPath::fixed;

  static Scalar from_real(double v) noexcept { return fixed::Fixed::from_real(v); }
  static double to_real(Scalar v) noexcept { return v.to_real(); }
  static Acc widen(Scalar v) noexcept { return fixed::Accum::from_fixed(v); }
  static Scalar narrow(Acc v) noexcept { return v.to_fixed(); }
  static Acc acc_int(std::int64_t v) noexcept { return fixed::Accum::from_int(v); }
  static Acc acc_zero() noexcept { return fixed::Accum{}; }
  static Acc mul_int(Acc v, std::int64_t k) noexcept { return v.mul_int(k); }
  static Acc recip_pos_int(std::int64_t d) { return fixed::Accum::recip_pos_int(d); }
  static Acc div_pos(Acc num, Acc den) noexcept { return fixed::Accum::div_pos(num, den); }
  static Acc unit_ratio(std::int64_t num, std::int64_t den) {
    return fixed::Accum::unit_ratio(num, den);
  }
  static Acc div_int(Acc num, std::int64_t den) { return num.div_int(den); }
  static Acc third(Acc v) noexcept { return v.mul_csd(one_third()); }
  static Const make_const(double v) { return fixed::CsdConstant(v); }
  static Acc mul_const(Acc v, const Const& c) noexcept { return v.mul_csd(c); }

  static const fixed::CsdConstant& one_third() {
    static const fixed::CsdConstant k(1.0 / 3.0);
    return k;
  }

  // Shift-add partial products summed at full width, one rounding.
  template <class Dirs>
  static Scalar project_combine(const Scalar* values, int n, const Dirs& dirs, int k) {
    std::int64_t acc = 0;
    for (int i = 0; i < n; ++i)
      acc += static_cast<std::int64_t>(values[i].raw()) * dirs.code(k, i).multiplier();
    return fixed::Fixed::from_raw(fixed::detail::rne_shift(acc, fixed::CsdConstant::kFracBits));
  }
};

// Wide-state variant of the fixed path: sifting iterates inside one IMF
// stage carry Q.24 samples so per-iteration rounding stays at the
// accumulator's resolution. Stage boundaries still exchange Q16.8 samples.
struct FixedWidePath {
  using Scalar = fixed::Accum;
  using Acc = fixed::Accum;
  using Const = fixed::CsdConstant;
  static constexpr bool kIsFixed = true;
  static constexpr ArithPath kId = ArithPath::fixed;

  static Scalar from_real(double v) noexcept { return fixed::Accum::from_real(v); }
  static double to_real(Scalar v) noexcept { return v.to_real(); }
  static Acc widen(Scalar v) noexcept { return v; }
  static Scalar narrow(Acc v) noexcept { return v; }
  static Acc acc_int(std::int64_t v) noexcept { return fixed::Accum::from_int(v); }
  static Acc acc_zero() noexcept { return fixed::Accum{}; }
  static Acc mul_int(Acc v, std::int64_t k) noexcept { return v.mul_int(k); }
  static Acc recip_pos_int(std::int64_t d) { return fixed::Accum::recip_pos_int(d); }
  static Acc div_pos(Acc num, Acc den) noexcept { return fixed::Accum::div_pos(num, den); }
  static Acc unit_ratio(std::int64_t num, std::int64_t den) {
    return fixed::Accum::unit_ratio(num, den);
  }
  static Acc div_int(Acc num, std::int64_t den) { return num.div_int(den); }
  static Acc third(Acc v) noexcept { return v.mul_csd(FixedPath::one_third()); }
  static Const make_const(double v) { return fixed::CsdConstant(v); }
  static Acc mul_const(Acc v, const Const& c) noexcept { return v.mul_csd(c); }

  template <class Dirs>
  static Scalar project_combine(const Scalar* values, int n, const Dirs& dirs, int k) {
    __int128 acc = 0;
    for (int i = 0; i < n; ++i)
      acc += static_cast<__int128>(values[i].raw()) * dirs.code(k, i).multiplier();
    return fixed::Accum::from_raw(
        fixed::detail::rne_shift_wide(acc, fixed::CsdConstant::kFracBits));
  }
};

// Policy used for the sifting iterates of path P.
template <class P>
struct WideStateOf {
  using type = P;
};
template <>
struct WideStateOf<FixedPath> {
  using type = FixedWidePath;
};
template <class P>
using WideState = typename WideStateOf<P>::type;

}  // namespace memd

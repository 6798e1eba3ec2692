#pragma once

// Quasi-uniform direction vectors on the (N-1)-sphere from the Hammersley
// low-discrepancy sequence. Coefficients are quantized to CSD constants once
// at construction, so the fixed-point projection path multiplies by frozen
// shift-add codes exactly as a coefficient ROM would.

#include <span>
#include <string>
#include <vector>

#include "memd/fixed_point.hpp"

namespace memd {

// Digit reversal of `index` in the given base, read as a fraction in [0, 1).
double radical_inverse(std::uint64_t index, unsigned base);

// Hammersley point: coordinate 0 is index/count, coordinate j >= 1 is the
// radical inverse of index in the j-th prime base (2, 3, 5, ...).
std::vector<double> hammersley_point(std::uint64_t index, std::uint64_t count, int dim);

class DirectionSet {
 public:
  // K quasi-uniform unit vectors in N-space. The first hypercube coordinate
  // maps to the final (azimuthal) angle in [0, 2pi), the remaining ones to
  // polar angles in [0, pi).
  DirectionSet(int n_channels, int n_directions);

  int n_channels() const noexcept { return n_channels_; }
  int n_directions() const noexcept { return n_directions_; }

  std::span<const double> vector(int k) const {
    return {vectors_.data() + static_cast<std::size_t>(k) * n_channels_,
            static_cast<std::size_t>(n_channels_)};
  }
  double coefficient(int k, int i) const {
    return vectors_[static_cast<std::size_t>(k) * n_channels_ + i];
  }
  const fixed::CsdConstant& code(int k, int i) const {
    return codes_[static_cast<std::size_t>(k) * n_channels_ + i];
  }

  // One row per direction, full-precision decimal coefficients.
  void write_csv(const std::string& path) const;
  static DirectionSet read_csv(const std::string& path);

 private:
  DirectionSet() = default;
  void quantize();

  int n_channels_ = 0;
  int n_directions_ = 0;
  std::vector<double> vectors_;             // K x N, row-major
  std::vector<fixed::CsdConstant> codes_;   // K x N
};

}  // namespace memd

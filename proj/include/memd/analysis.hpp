#pragma once

// Validation metrics: Pearson correlation against ground-truth tones, Welch
// power spectral density, and the IMF admissibility checks (extrema vs
// zero-crossing counts, residual envelope mean).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "memd/signal.hpp"

namespace memd {

double pearson_corr(std::span<const double> a, std::span<const double> b);

struct WelchParams {
  std::size_t segment = 256;   // power of two
  double overlap = 0.5;        // fraction of segment
};

struct PsdEstimate {
  std::vector<double> frequency;  // Hz, strictly increasing up to Nyquist
  std::vector<double> power;      // density, unit^2 / Hz
  WelchParams params;

  // Peak-bin frequency.
  double peak_frequency() const;
  // Trapezoid-integrated power over [lo, hi] Hz.
  double band_power(double lo, double hi) const;
  // Trapezoid-integrated total power.
  double total_power() const;
};

// Averaged Hann-windowed periodograms with the given overlap.
PsdEstimate psd_welch(std::span<const double> x, double sample_rate,
                      const WelchParams& params = {});

struct ImfChannelReport {
  int channel = 0;
  std::int64_t extrema = 0;         // strict-policy maxima + minima
  std::int64_t zero_crossings = 0;
  std::int64_t difference = 0;      // |extrema - zero_crossings|
  double mean_envelope_ratio = 0.0;  // max |(upper+lower)/2| / max |x|
  bool condition_one() const { return difference <= 1; }
};

std::vector<ImfChannelReport> imf_condition_check(const std::vector<std::vector<double>>& imf);

template <class P>
std::vector<ImfChannelReport> imf_condition_check(const MvSignal<P>& imf) {
  return imf_condition_check(signal_to_real(imf));
}

struct CorrelationReport {
  std::vector<std::string> row_labels;      // one per IMF row
  std::vector<std::vector<double>> values;  // rows x channels

  std::string to_text() const;
  std::string to_csv() const;
};

}  // namespace memd

#include "memd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "memd/errors.hpp"
#include "memd/extrema.hpp"
#include "memd/spline.hpp"

namespace memd {

double pearson_corr(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("pearson_corr: unequal lengths");
  if (a.size() < 2) throw TooShort("pearson_corr: need at least 2 samples");
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0)
    throw DegenerateInput("pearson_corr: zero-variance input");
  return cov / std::sqrt(var_a * var_b);
}

namespace {

// Iterative radix-2 FFT, in place.
void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wn(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wn;
      }
    }
  }
}

}  // namespace

double PsdEstimate::peak_frequency() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < power.size(); ++i)
    if (power[i] > power[best]) best = i;
  return frequency[best];
}

double PsdEstimate::band_power(double lo, double hi) const {
  double sum = 0.0;
  for (std::size_t i = 1; i < frequency.size(); ++i) {
    const double f0 = frequency[i - 1], f1 = frequency[i];
    if (f1 < lo || f0 > hi) continue;
    const double a = std::max(f0, lo), b = std::min(f1, hi);
    // linear interpolation of the density over the clipped trapezoid
    const double p0 = power[i - 1] + (power[i] - power[i - 1]) * (a - f0) / (f1 - f0);
    const double p1 = power[i - 1] + (power[i] - power[i - 1]) * (b - f0) / (f1 - f0);
    sum += 0.5 * (p0 + p1) * (b - a);
  }
  return sum;
}

double PsdEstimate::total_power() const {
  return band_power(frequency.front(), frequency.back());
}

PsdEstimate psd_welch(std::span<const double> x, double sample_rate, const WelchParams& params) {
  const std::size_t seg = params.segment;
  if (seg < 8 || (seg & (seg - 1)) != 0)
    throw ConfigError("psd_welch: segment length must be a power of two >= 8");
  if (x.size() < seg) throw TooShort("psd_welch: input shorter than one segment");
  if (!(params.overlap >= 0.0 && params.overlap < 1.0))
    throw ConfigError("psd_welch: overlap must be in [0, 1)");

  std::vector<double> window(seg);
  double window_energy = 0.0;
  for (std::size_t i = 0; i < seg; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                      static_cast<double>(seg)));
    window_energy += window[i] * window[i];
  }

  const std::size_t hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(static_cast<double>(seg) * (1.0 - params.overlap)));
  const std::size_t bins = seg / 2 + 1;
  std::vector<double> accum(bins, 0.0);
  std::size_t segments = 0;
  std::vector<std::complex<double>> buf(seg);
  for (std::size_t start = 0; start + seg <= x.size(); start += hop) {
    for (std::size_t i = 0; i < seg; ++i) buf[i] = x[start + i] * window[i];
    fft_radix2(buf);
    for (std::size_t i = 0; i < bins; ++i) {
      double p = std::norm(buf[i]) / (sample_rate * window_energy);
      if (i != 0 && i != bins - 1) p *= 2.0;  // fold the negative frequencies
      accum[i] += p;
    }
    ++segments;
  }

  PsdEstimate est;
  est.params = params;
  est.frequency.resize(bins);
  est.power.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    est.frequency[i] = static_cast<double>(i) * sample_rate / static_cast<double>(seg);
    est.power[i] = accum[i] / static_cast<double>(segments);
  }
  return est;
}

std::vector<ImfChannelReport> imf_condition_check(const std::vector<std::vector<double>>& imf) {
  std::vector<ImfChannelReport> reports;
  reports.reserve(imf.size());
  for (std::size_t ch = 0; ch < imf.size(); ++ch) {
    const std::vector<double>& x = imf[ch];
    if (x.size() < 3) throw TooShort("imf_condition_check: need at least 3 samples");
    ImfChannelReport r;
    r.channel = static_cast<int>(ch);

    auto maxima = detect_extrema(std::span<const double>(x), ExtremumKind::maximum,
                                 TiePolicy::strict_first);
    auto minima = detect_extrema(std::span<const double>(x), ExtremumKind::minimum,
                                 TiePolicy::strict_first);
    r.extrema = static_cast<std::int64_t>(maxima.size() + minima.size());

    // Sign changes; exact zeros are skipped rather than double-counted.
    int last_sign = 0;
    for (double v : x) {
      const int sign = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
      if (sign == 0) continue;
      if (last_sign != 0 && sign != last_sign) ++r.zero_crossings;
      last_sign = sign;
    }
    r.difference = std::abs(r.extrema - r.zero_crossings);

    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    if (peak > 0.0 && maxima.size() >= 1 && minima.size() >= 1) {
      auto knots_from = [&](const std::vector<ExtremaRecord<double>>& recs) {
        std::vector<Knot<RealPath>> knots;
        if (recs.size() >= 2) knots.push_back({-recs[1].index, recs[1].value});
        knots.push_back({-recs[0].index, recs[0].value});
        for (const auto& rec : recs) knots.push_back({rec.index, rec.value});
        const std::int64_t edge = static_cast<std::int64_t>(x.size()) - 1;
        const auto& last = recs[recs.size() - 1];
        knots.push_back({2 * edge - last.index, last.value});
        if (recs.size() >= 2) {
          const auto& prev = recs[recs.size() - 2];
          knots.push_back({2 * edge - prev.index, prev.value});
        }
        return knots;
      };
      const auto upper_knots = knots_from(maxima);
      const auto lower_knots = knots_from(minima);
      if (upper_knots.size() >= 3 && lower_knots.size() >= 3) {
        const auto upper = natural_spline_coeffs<RealPath>(upper_knots);
        const auto lower = natural_spline_coeffs<RealPath>(lower_knots);
        double worst = 0.0;
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(x.size()); ++t) {
          const double mid = 0.5 * (eval_spline<RealPath>(upper, t) + eval_spline<RealPath>(lower, t));
          worst = std::max(worst, std::abs(mid));
        }
        r.mean_envelope_ratio = worst / peak;
      }
    }
    reports.push_back(r);
  }
  return reports;
}

std::string CorrelationReport::to_text() const {
  std::ostringstream out;
  out.precision(4);
  out << std::fixed;
  for (std::size_t r = 0; r < values.size(); ++r) {
    out << row_labels[r] << ":";
    for (double v : values[r]) out << ' ' << v;
    out << '\n';
  }
  return out.str();
}

std::string CorrelationReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "row";
  for (std::size_t ch = 0; ch < (values.empty() ? 0 : values[0].size()); ++ch)
    out << ",ch" << ch + 1;
  out << '\n';
  for (std::size_t r = 0; r < values.size(); ++r) {
    out << row_labels[r];
    for (double v : values[r]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

}  // namespace memd

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "memd/analysis.hpp"

using namespace memd;

namespace {

std::vector<double> sine(double freq, double rate, std::size_t n, double amp = 1.0,
                         double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t)
    x[t] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(t) / rate + phase);
  return x;
}

}  // namespace

TEST_CASE("pearson correlation basics") {
  const auto s = sine(5.0, 100.0, 400);
  CHECK(pearson_corr(s, s) == doctest::Approx(1.0).epsilon(1e-12));
  auto neg = s;
  for (double& v : neg) v = -v;
  CHECK(pearson_corr(s, neg) == doctest::Approx(-1.0).epsilon(1e-12));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> a(256), b(256);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = dist(rng);
    b[i] = dist(rng);
  }
  CHECK(pearson_corr(a, b) == doctest::Approx(pearson_corr(b, a)).epsilon(1e-12));
  // invariant under positive affine transforms
  std::vector<double> scaled(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) scaled[i] = 3.5 * a[i] + 11.0;
  CHECK(pearson_corr(scaled, b) == doctest::Approx(pearson_corr(a, b)).epsilon(1e-9));

  std::vector<double> flat(a.size(), 2.0);
  CHECK_THROWS_AS(pearson_corr(flat, a), DegenerateInput);
  std::vector<double> shorter(10, 0.0);
  CHECK_THROWS_AS(pearson_corr(shorter, a), DimensionMismatch);
}

TEST_CASE("welch psd finds a pure tone") {
  const double rate = 250.0;
  const auto x = sine(10.0, rate, 2048);
  const PsdEstimate psd = psd_welch(x, rate);
  const double bin = rate / 256.0;
  CHECK(std::abs(psd.peak_frequency() - 10.0) <= bin);
  // frequency grid strictly increasing up to Nyquist
  for (std::size_t i = 1; i < psd.frequency.size(); ++i)
    CHECK(psd.frequency[i] > psd.frequency[i - 1]);
  CHECK(psd.frequency.back() == doctest::Approx(rate / 2.0));
  // unit-amplitude sine: total power 0.5 within 10%
  CHECK(psd.total_power() == doctest::Approx(0.5).epsilon(0.10));
}

TEST_CASE("welch psd of white noise is flat within 3 dB") {
  const double rate = 250.0;
  const std::size_t n = 2048;
  std::vector<double> mean_power;
  for (std::uint32_t seed = 1; seed <= 100; ++seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(n);
    for (double& v : x) v = gauss(rng);
    const PsdEstimate psd = psd_welch(x, rate);
    if (mean_power.empty()) mean_power.assign(psd.power.size(), 0.0);
    for (std::size_t i = 0; i < psd.power.size(); ++i) mean_power[i] += psd.power[i];
  }
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 1; i + 1 < mean_power.size(); ++i) {  // skip DC and Nyquist
    lo = std::min(lo, mean_power[i]);
    hi = std::max(hi, mean_power[i]);
  }
  CHECK(hi / lo <= 2.0);  // 3 dB
}

TEST_CASE("welch parameter validation") {
  const auto x = sine(5.0, 100.0, 300);
  CHECK_THROWS_AS(psd_welch(std::span<const double>(x).subspan(0, 100), 100.0), TooShort);
  WelchParams bad;
  bad.segment = 200;  // not a power of two
  CHECK_THROWS_AS(psd_welch(x, 100.0, bad), ConfigError);
  bad.segment = 256;
  bad.overlap = 1.5;
  CHECK_THROWS_AS(psd_welch(x, 100.0, bad), ConfigError);
}

TEST_CASE("imf condition check") {
  const auto s = sine(8.0, 256.0, 1024);
  auto reports = imf_condition_check({s});
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].condition_one());
  CHECK(reports[0].mean_envelope_ratio <= 0.1);

  std::vector<double> flat(64, 1.25);
  reports = imf_condition_check({flat});
  CHECK(reports[0].extrema == 0);
  CHECK(reports[0].zero_crossings == 0);
  CHECK(reports[0].difference == 0);

  // a sine plus offset violates the zero-crossing balance
  auto shifted = sine(8.0, 256.0, 1024);
  for (double& v : shifted) v += 5.0;
  reports = imf_condition_check({shifted});
  CHECK_FALSE(reports[0].condition_one());
}

TEST_CASE("correlation report serialization") {
  CorrelationReport report;
  report.row_labels = {"imf1_vs_a", "imf2_vs_b"};
  report.values = {{0.99, 0.01}, {-0.5, 1.0}};
  const std::string text = report.to_text();
  CHECK(text.find("imf1_vs_a") != std::string::npos);
  const std::string csv = report.to_csv();
  CHECK(csv.find("row,ch1,ch2") != std::string::npos);
  CHECK(csv.find("imf2_vs_b,-0.5,1") != std::string::npos);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "memd/sifting.hpp"

using namespace memd;
using fixed::Fixed;

namespace {

MvSignal<RealPath> tone_signal(const std::vector<std::vector<std::pair<double, double>>>& tones,
                               double rate, std::int64_t length) {
  std::vector<std::vector<double>> chans;
  for (const auto& list : tones) {
    std::vector<double> x(static_cast<std::size_t>(length), 0.0);
    for (auto [f, a] : list)
      for (std::int64_t t = 0; t < length; ++t)
        x[static_cast<std::size_t>(t)] +=
            a * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) / rate);
    chans.push_back(std::move(x));
  }
  return signal_from_real<RealPath>(chans, rate);
}

DirectionSet custom_directions(const std::vector<std::vector<double>>& rows) {
  const auto path = std::filesystem::temp_directory_path() / "sift_dirs.csv";
  std::ofstream out(path);
  out.precision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  out.close();
  return DirectionSet::read_csv(path.string());
}

double corr(std::span<const double> a, std::span<const double> b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double cab = 0, caa = 0, cbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cab += (a[i] - ma) * (b[i] - mb);
    caa += (a[i] - ma) * (a[i] - ma);
    cbb += (b[i] - mb) * (b[i] - mb);
  }
  return cab / std::sqrt(caa * cbb);
}

}  // namespace

TEST_CASE("projection is the direction dot product") {
  const DirectionSet dir = custom_directions({{0.6, 0.8}});
  MvSignal<RealPath> x(2, 1, 1.0);
  x.at(0, 0) = 1.0;
  x.at(1, 0) = 0.0;
  const auto proj = project(x, dir);
  REQUIRE(proj.size() == 1);
  CHECK(proj[0][0] == doctest::Approx(0.6).epsilon(1e-15));

  MvSignal<RealPath> zero(3, 64, 1.0);
  const DirectionSet dirs3(3, 4);
  for (const auto& row : project(zero, dirs3))
    for (double v : row) CHECK(v == 0.0);
}

TEST_CASE("projection matches the dot-product oracle on random data") {
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> dist(-500.0, 500.0);
  const DirectionSet dirs(4, 8);

  MvSignal<RealPath> xr(4, 256, 1.0);
  MvSignal<FixedPath> xf(4, 256, 1.0);
  for (int ch = 0; ch < 4; ++ch)
    for (std::int64_t t = 0; t < 256; ++t) {
      const double v = Fixed::from_real(dist(rng)).to_real();
      xr.at(ch, t) = v;
      xf.at(ch, t) = Fixed::from_real(v);
    }

  const auto pr = project(xr, dirs);
  const auto pf = project(xf, dirs);
  for (int k = 0; k < 8; ++k)
    for (std::int64_t t = 0; t < 256; ++t) {
      double exact = 0.0;
      for (int ch = 0; ch < 4; ++ch) exact += dirs.coefficient(k, ch) * xr.at(ch, t);
      CHECK(std::abs(pr[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)] - exact) <= 1e-12);
      CHECK(std::abs(pf[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)].to_real() - exact) <=
            1.0 / 256.0);
    }

  MvSignal<RealPath> wrong(3, 16, 1.0);
  CHECK_THROWS_AS(project(wrong, dirs), DimensionMismatch);
}

TEST_CASE("envelope knots mirror the edges") {
  std::vector<double> channel(101);
  for (std::size_t t = 0; t < channel.size(); ++t) channel[t] = static_cast<double>(t);
  std::vector<ExtremaRecord<double>> records{{10, 0.0, ExtremumKind::maximum},
                                             {20, 0.0, ExtremumKind::maximum}};
  const auto knots =
      envelope_knots<RealPath>(std::span<const double>(channel), records, 101);
  REQUIRE(knots.size() == 6);
  CHECK(knots[0].x == -20);
  CHECK(knots[1].x == -10);
  CHECK(knots[2].x == 10);
  CHECK(knots[3].x == 20);
  CHECK(knots[4].x == 180);  // 2*100 - 20
  CHECK(knots[5].x == 190);  // 2*100 - 10
  CHECK(knots[0].y == 20.0);
  CHECK(knots[1].y == 10.0);
  CHECK(knots[4].y == 20.0);
  CHECK(knots[5].y == 10.0);
  CHECK(knots.front().x <= 0);
  CHECK(knots.back().x >= 100);

  CHECK_THROWS_AS(envelope_knots<RealPath>(std::span<const double>(channel), {}, 101),
                  TooFewExtrema);
}

TEST_CASE("envelope knots of a sinusoid sit on its peaks") {
  const std::int64_t length = 256;
  MvSignal<RealPath> x = tone_signal({{{8.0, 1.0}}}, 256.0, length);  // 8 cycles
  const auto maxima = dedup_plateaus(
      detect_extrema(std::span<const double>(x.channel(0)), ExtremumKind::maximum));
  const auto knots = envelope_knots<RealPath>(x.channel(0), maxima, length);
  for (const auto& k : knots) CHECK(k.y == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("local mean of a constant signal reaches the residue condition") {
  MvSignal<RealPath> x(2, 64, 1.0);
  for (auto& v : x.samples) v = 3.0;
  const DirectionSet dirs(2, 4);
  SiftConfig cfg;
  cfg.directions = 4;
  CHECK_FALSE(local_mean(x, dirs, cfg).has_value());
  CHECK_FALSE(sift_once(x, dirs, cfg).has_value());
}

TEST_CASE("identical constant envelopes average to the offset") {
  // Alternating +-1 around an exactly representable offset on every channel.
  const std::int64_t length = 128;
  const double offset = 5.25;
  MvSignal<RealPath> xr(2, length, 1.0);
  MvSignal<FixedPath> xf(2, length, 1.0);
  for (int ch = 0; ch < 2; ++ch)
    for (std::int64_t t = 0; t < length; ++t) {
      const double v = offset + (t % 2 == 0 ? 1.0 : -1.0);
      xr.at(ch, t) = v;
      xf.at(ch, t) = Fixed::from_real(v);
    }
  const DirectionSet dirs(2, 3);  // no direction sums to zero
  SiftConfig cfg;
  cfg.directions = 3;
  cfg.mean_mode = MeanMode::envelopes_2k;

  const auto mr = local_mean(xr, dirs, cfg);
  REQUIRE(mr.has_value());
  for (int ch = 0; ch < 2; ++ch)
    for (std::int64_t t = 0; t < length; ++t)
      CHECK(mr->at(ch, t) == doctest::Approx(offset).epsilon(1e-9));

  const auto mf = local_mean(xf, dirs, cfg);
  REQUIRE(mf.has_value());
  for (int ch = 0; ch < 2; ++ch)
    for (std::int64_t t = 0; t < length; ++t)
      CHECK(std::abs(mf->at(ch, t).to_real() - offset) <= 2.0 / 256.0);
}

TEST_CASE("fixed-path local mean tracks the real path on a tone mixture") {
  const std::int64_t length = 1024;
  const double rate = 10e6;
  MvSignal<RealPath> xr = tone_signal({{{50e3, 150.0}, {350e3, 150.0}, {800e3, 150.0}},
                                       {{50e3, 150.0}, {350e3, 150.0}},
                                       {{150e3, 150.0}, {350e3, 150.0}, {800e3, 150.0}},
                                       {{50e3, 150.0}, {150e3, 150.0}, {350e3, 150.0}}},
                                      rate, length);
  MvSignal<FixedPath> xf(4, length, rate);
  for (int ch = 0; ch < 4; ++ch)
    for (std::int64_t t = 0; t < length; ++t) xf.at(ch, t) = Fixed::from_real(xr.at(ch, t));

  const DirectionSet dirs(4, 8);
  SiftConfig cfg;
  fixed::Context ctx;
  fixed::ContextScope scope(ctx);
  const auto mr = local_mean(xr, dirs, cfg);
  const auto mf = local_mean(xf, dirs, cfg);
  REQUIRE(mr.has_value());
  REQUIRE(mf.has_value());
  double worst = 0.0;
  for (int ch = 0; ch < 4; ++ch)
    for (std::int64_t t = 0; t < length; ++t)
      worst = std::max(worst, std::abs(mf->at(ch, t).to_real() - mr->at(ch, t)));
  MESSAGE("fixed vs real local mean, worst abs deviation: ", worst);
  CHECK(worst <= 0.25);
  CHECK(ctx.saturations == 0);
}

TEST_CASE("sifting a pure tone changes little and telescopes exactly") {
  const std::int64_t length = 512;
  MvSignal<RealPath> x = tone_signal({{{80e3, 100.0}}, {{80e3, 70.0}}}, 10e6, length);
  const DirectionSet dirs(2, 8);
  SiftConfig cfg;

  const auto h = sift_once(x, dirs, cfg);
  REQUIRE(h.has_value());
  for (int ch = 0; ch < 2; ++ch)
    CHECK(corr(x.channel(ch), h->channel(ch)) >= 0.99);

  const auto mean = local_mean(x, dirs, cfg);
  for (std::size_t i = 0; i < x.samples.size(); ++i)
    CHECK(std::abs((x.samples[i] - h->samples[i]) - mean->samples[i]) <= 1e-9);

  // fixed path telescope is exact at the raw level
  MvSignal<FixedPath> xf(2, length, 10e6);
  for (int ch = 0; ch < 2; ++ch)
    for (std::int64_t t = 0; t < length; ++t) xf.at(ch, t) = Fixed::from_real(x.at(ch, t));
  fixed::Context ctx;
  fixed::ContextScope scope(ctx);
  const auto hf = sift_once(xf, dirs, cfg);
  const auto mf = local_mean(xf, dirs, cfg);
  REQUIRE(hf.has_value());
  for (std::size_t i = 0; i < xf.samples.size(); ++i)
    CHECK((xf.samples[i] - hf->samples[i]) == mf->samples[i]);
  CHECK(ctx.saturations == 0);
}

TEST_CASE("extract_imf with S=1 is one sift plus subtraction") {
  const std::int64_t length = 512;
  MvSignal<RealPath> x =
      tone_signal({{{50e3, 100.0}, {400e3, 80.0}}, {{50e3, 60.0}, {400e3, 110.0}}}, 10e6, length);
  const DirectionSet dirs(2, 8);
  SiftConfig cfg;
  cfg.siftings = 1;
  const auto result = extract_imf(x, dirs, cfg);
  const auto h = sift_once(x, dirs, cfg);
  REQUIRE(h.has_value());
  CHECK_FALSE(result.residue_reached);
  CHECK(result.sifts_applied == 1);
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    CHECK(result.imf.samples[i] == h->samples[i]);
    CHECK(result.imf.samples[i] + result.residue.samples[i] ==
          doctest::Approx(x.samples[i]).epsilon(1e-12));
  }
}

TEST_CASE("residue input returns zero imf and the signal itself") {
  MvSignal<RealPath> ramp(2, 64, 1.0);
  for (int ch = 0; ch < 2; ++ch)
    for (std::int64_t t = 0; t < 64; ++t) ramp.at(ch, t) = static_cast<double>(t);
  const DirectionSet dirs(2, 4);
  SiftConfig cfg;
  cfg.directions = 4;
  const auto result = extract_imf(ramp, dirs, cfg);
  CHECK(result.residue_reached);
  for (const auto& v : result.imf.samples) CHECK(v == 0.0);
  for (std::size_t i = 0; i < ramp.samples.size(); ++i)
    CHECK(result.residue.samples[i] == ramp.samples[i]);
}

TEST_CASE("two-tone mixture: the fast tone comes out first") {
  const std::int64_t length = 2048;
  const double rate = 10e6;
  MvSignal<RealPath> x = tone_signal(
      {{{50e3, 150.0}, {800e3, 150.0}}, {{50e3, 90.0}, {800e3, 120.0}}}, rate, length);
  const DirectionSet dirs(2, 8);
  SiftConfig cfg;
  const auto result = extract_imf(x, dirs, cfg);
  REQUIRE_FALSE(result.residue_reached);

  std::vector<double> fast(static_cast<std::size_t>(length));
  for (std::int64_t t = 0; t < length; ++t)
    fast[static_cast<std::size_t>(t)] =
        std::sin(2.0 * std::numbers::pi * 800e3 * static_cast<double>(t) / rate);
  for (int ch = 0; ch < 2; ++ch) {
    const double c = corr(result.imf.channel(ch), fast);
    MESSAGE("channel ", ch, " imf vs 800 kHz tone: ", c);
    CHECK(c >= 0.95);
  }
}

TEST_CASE("real-path decomposition is scale covariant") {
  const std::int64_t length = 1024;
  MvSignal<RealPath> x = tone_signal(
      {{{50e3, 100.0}, {800e3, 90.0}}, {{50e3, 75.0}, {800e3, 115.0}}}, 10e6, length);
  MvSignal<RealPath> x2(2, length, 10e6);
  for (std::size_t i = 0; i < x.samples.size(); ++i) x2.samples[i] = 2.0 * x.samples[i];
  const DirectionSet dirs(2, 8);
  SiftConfig cfg;
  const auto r1 = extract_imf(x, dirs, cfg);
  const auto r2 = extract_imf(x2, dirs, cfg);
  for (std::size_t i = 0; i < x.samples.size(); ++i)
    CHECK(r2.imf.samples[i] == 2.0 * r1.imf.samples[i]);
}

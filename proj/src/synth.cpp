#include "memd/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "memd/errors.hpp"

namespace memd {

namespace {

std::vector<double> render_tones(const std::vector<Tone>& tones, double rate, std::int64_t length) {
  std::vector<double> out(static_cast<std::size_t>(length), 0.0);
  for (const Tone& tone : tones) {
    const double w = 2.0 * std::numbers::pi * tone.frequency_hz / rate;
    for (std::int64_t t = 0; t < length; ++t)
      out[static_cast<std::size_t>(t)] += tone.amplitude * std::sin(w * static_cast<double>(t) + tone.phase);
  }
  return out;
}

// Deterministic Gaussian draws from the portable mt19937 stream.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint32_t seed) : rng_(seed) {}
  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

 private:
  double uniform() {
    return (static_cast<double>(rng_()) + 0.5) / 4294967296.0;
  }
  std::mt19937 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace

std::vector<std::vector<double>> synth_gen(const SynthSpec& spec) {
  if (spec.channels.empty()) throw ConfigError("synth_gen: no channels");
  if (spec.length < 1) throw ConfigError("synth_gen: empty signal");
  const double nyquist = spec.sample_rate / 2.0;
  for (const auto& tones : spec.channels)
    for (const Tone& tone : tones)
      if (!(tone.frequency_hz < nyquist) || tone.frequency_hz < 0.0)
        throw NyquistViolation("synth_gen: tone at or above Nyquist");

  std::vector<std::vector<double>> out;
  out.reserve(spec.channels.size());
  for (std::size_t ch = 0; ch < spec.channels.size(); ++ch) {
    auto samples = render_tones(spec.channels[ch], spec.sample_rate, spec.length);
    if (spec.noise_sigma > 0.0) {
      GaussianSource noise(spec.seed + static_cast<std::uint32_t>(ch) * 7919u);
      for (double& v : samples) v += spec.noise_sigma * noise();
    }
    out.push_back(std::move(samples));
  }
  return out;
}

PresetSignal preset_quadtone(std::int64_t length, std::uint32_t seed) {
  // Tone mixture per channel; the 350 kHz tone is common to all four.
  const double f1 = 50e3, f2 = 150e3, f3 = 350e3, f4 = 800e3;
  const double amp = 150.0;
  const double rate = 30e6;

  SynthSpec spec;
  spec.sample_rate = rate;
  spec.length = length;
  spec.seed = seed;
  spec.channels = {
      {{f1, amp}, {f3, amp}, {f4, amp}},
      {{f1, amp}, {f3, amp}},
      {{f2, amp}, {f3, amp}, {f4, amp}},
      {{f1, amp}, {f2, amp}, {f3, amp}},
  };

  PresetSignal out;
  out.name = "paper-quadtone";
  out.sample_rate = rate;
  out.channels = synth_gen(spec);
  out.tone_frequencies = {f4, f3, f2, f1};  // IMF rows: fastest tone first
  out.tone_present = {
      {true, false, true, false},   // f4 in channels 1 and 3
      {true, true, true, true},     // f3 everywhere
      {false, false, true, true},   // f2 in channels 3 and 4
      {true, true, false, true},    // f1 in channels 1, 2 and 4
  };
  out.row_tones.reserve(out.tone_frequencies.size());
  for (double f : out.tone_frequencies)
    out.row_tones.push_back(render_tones({{f, amp}}, rate, length));
  // Widest extrema gap comes from the 50 kHz tone (600 samples per cycle);
  // the window lookahead spans several of them.
  out.recommended_k_max = 4096;
  return out;
}

PresetSignal preset_alpha_surrogate(std::int64_t length, std::uint32_t seed) {
  const double rate = 250.0;
  const int channels = 4;
  const double alpha_hz = 10.0, fast_hz = 42.0, slow_hz = 1.7;

  PresetSignal out;
  out.name = "alpha-surrogate";
  out.sample_rate = rate;
  out.recommended_k_max = 512;
  out.channels.resize(channels);
  const std::int64_t burst_end = length / 2;
  for (int ch = 0; ch < channels; ++ch) {
    const double phase = 0.3 * ch;
    std::vector<double> x(static_cast<std::size_t>(length), 0.0);
    GaussianSource noise(seed + static_cast<std::uint32_t>(ch) * 7919u);
    for (std::int64_t t = 0; t < length; ++t) {
      const double s = static_cast<double>(t) / rate;
      double v = 10.0 * std::sin(2.0 * std::numbers::pi * fast_hz * s + phase) +
                 18.0 * std::sin(2.0 * std::numbers::pi * slow_hz * s + 0.5 * phase) +
                 1.5 * noise();
      if (t < burst_end) v += 30.0 * std::sin(2.0 * std::numbers::pi * alpha_hz * s + phase);
      x[static_cast<std::size_t>(t)] = v;
    }
    out.channels[static_cast<std::size_t>(ch)] = std::move(x);
  }
  return out;
}

std::optional<PresetSignal> make_preset(const std::string& name, std::int64_t length,
                                        std::uint32_t seed) {
  if (name == "paper-quadtone") return preset_quadtone(length > 0 ? length : 12288, seed);
  if (name == "alpha-surrogate") return preset_alpha_surrogate(length > 0 ? length : 6000, seed);
  return std::nullopt;
}

}  // namespace memd

#pragma once

// Synthetic multichannel test signals: per-channel tone mixtures, the
// quad-tone validation preset with a shared mid tone, and an alpha-band
// burst surrogate for the EEG-style study. Generation is deterministic for
// a given seed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace memd {

struct Tone {
  double frequency_hz;
  double amplitude;
  double phase = 0.0;
};

struct SynthSpec {
  std::vector<std::vector<Tone>> channels;  // tone list per channel
  double sample_rate;
  std::int64_t length;
  double noise_sigma = 0.0;  // white Gaussian noise per channel
  std::uint32_t seed = 1;
};

// Rejects tones at or above Nyquist.
std::vector<std::vector<double>> synth_gen(const SynthSpec& spec);

// Ground truth for validation presets: the per-channel signal plus the pure
// tone assigned to each IMF row, at the same rate and length.
struct PresetSignal {
  std::string name;
  std::vector<std::vector<double>> channels;
  double sample_rate = 1.0;
  std::vector<double> tone_frequencies;         // Hz, one per IMF row
  std::vector<std::vector<double>> row_tones;   // rendered reference tone per row
  std::vector<std::vector<bool>> tone_present;  // rows x channels: tone mixed in?
  std::int64_t recommended_k_max = 256;         // clears the widest extrema gap
};

// Four channels mixing 50/150/350/800 kHz tones of amplitude 150 with the
// 350 kHz tone common to every channel, sampled at 30 MHz. The default
// length covers twenty cycles of the slowest tone; the per-row ground truth
// follows the mixture assignment.
PresetSignal preset_quadtone(std::int64_t length = 12288, std::uint32_t seed = 1);

// Four-channel surrogate of an alpha-band experiment: a 10 Hz burst over the
// first half of the record on top of a fast tone, a slow drift and a little
// noise, sampled at 250 Hz.
PresetSignal preset_alpha_surrogate(std::int64_t length = 6000, std::uint32_t seed = 1);

// nullopt when the name is unknown.
std::optional<PresetSignal> make_preset(const std::string& name, std::int64_t length,
                                        std::uint32_t seed);

}  // namespace memd

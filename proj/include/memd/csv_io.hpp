#pragma once

// Signal CSV ingestion and emission plus the run configuration that every
// output artifact embeds. Real-path samples serialize with 17 significant
// digits; fixed-path samples serialize as raw Q16.8 integers with a format
// marker so replays are bit-exact.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memd/signal.hpp"
#include "memd/sifting.hpp"

namespace memd {

struct RunConfig {
  int channels = 4;
  int directions = 8;
  int siftings = 4;
  int imfs = 4;
  ArithPath path = ArithPath::real;
  EnvelopeMode envelope = EnvelopeMode::cubic;
  TiePolicy tie = TiePolicy::plateau;
  BoundaryPolicy boundary = BoundaryPolicy::mirror;
  MeanMode mean_mode = MeanMode::envelopes_2k;
  std::int64_t k_max = 256;
  int window_margin = 4;
  std::size_t welch_segment = 256;  // Welch PSD estimator settings
  double welch_overlap = 0.5;
  double sample_rate = 1.0;
  std::uint32_t seed = 1;
  std::int64_t samples = 0;  // 0: preset default / from file
  std::string preset;        // empty when the input comes from a file

  SiftConfig sift() const {
    SiftConfig cfg;
    cfg.directions = directions;
    cfg.siftings = siftings;
    cfg.tie = tie;
    cfg.boundary = boundary;
    cfg.envelope = envelope;
    cfg.mean_mode = mean_mode;
    cfg.k_max = k_max;
    cfg.window_margin = window_margin;
    return cfg;
  }

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
};

struct LoadedCsv {
  std::vector<std::vector<double>> channels;       // values (raw/2^8 for fixed files)
  std::vector<std::vector<std::int32_t>> raws;     // nonempty iff fixed format
  double sample_rate = 1.0;
  bool fixed_format = false;
  std::optional<RunConfig> config;
};

// Columns map to channels with the first column as time; a `t,ch1,...`
// header row or headerless numeric columns are both accepted. Fixed-format
// files written by this project round-trip exactly.
LoadedCsv read_csv(const std::string& path);

void write_signal_csv(const std::string& path, const MvSignal<RealPath>& x, const RunConfig& cfg);
void write_signal_csv(const std::string& path, const MvSignal<FixedPath>& x, const RunConfig& cfg);

void write_text_file(const std::string& path, const std::string& content);

template <class P>
MvSignal<P> loaded_to_signal(const LoadedCsv& loaded) {
  if constexpr (P::kIsFixed) {
    if (loaded.fixed_format) {
      MvSignal<P> out(static_cast<int>(loaded.raws.size()),
                      static_cast<std::int64_t>(loaded.raws.front().size()), loaded.sample_rate);
      for (int ch = 0; ch < out.n_channels; ++ch)
        for (std::int64_t t = 0; t < out.length; ++t)
          out.at(ch, t) = fixed::Fixed::from_raw(
              loaded.raws[static_cast<std::size_t>(ch)][static_cast<std::size_t>(t)]);
      return out;
    }
  }
  return signal_from_real<P>(loaded.channels, loaded.sample_rate);
}

}  // namespace memd

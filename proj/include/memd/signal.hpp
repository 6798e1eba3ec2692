#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "memd/errors.hpp"
#include "memd/paths.hpp"

namespace memd {

// N-channel sample matrix, channel-major, with sample-rate metadata.
template <class P>
struct MvSignal {
  using Scalar = typename P::Scalar;

  int n_channels = 0;
  std::int64_t length = 0;
  double sample_rate = 1.0;
  std::vector<Scalar> samples;  // samples[ch * length + t]

  MvSignal() = default;
  MvSignal(int channels, std::int64_t len, double rate)
      : n_channels(channels), length(len), sample_rate(rate),
        samples(static_cast<std::size_t>(channels) * static_cast<std::size_t>(len)) {}

  Scalar& at(int ch, std::int64_t t) {
    return samples[static_cast<std::size_t>(ch) * length + t];
  }
  Scalar at(int ch, std::int64_t t) const {
    return samples[static_cast<std::size_t>(ch) * length + t];
  }
  std::span<Scalar> channel(int ch) {
    return {samples.data() + static_cast<std::size_t>(ch) * length,
            static_cast<std::size_t>(length)};
  }
  std::span<const Scalar> channel(int ch) const {
    return {samples.data() + static_cast<std::size_t>(ch) * length,
            static_cast<std::size_t>(length)};
  }
};

template <class P>
MvSignal<P> signal_from_real(const std::vector<std::vector<double>>& channels, double rate) {
  if (channels.empty()) throw DimensionMismatch("signal_from_real: no channels");
  const std::int64_t len = static_cast<std::int64_t>(channels.front().size());
  for (const auto& c : channels)
    if (static_cast<std::int64_t>(c.size()) != len)
      throw DimensionMismatch("signal_from_real: unequal channel lengths");
  MvSignal<P> out(static_cast<int>(channels.size()), len, rate);
  for (int ch = 0; ch < out.n_channels; ++ch)
    for (std::int64_t t = 0; t < len; ++t)
      out.at(ch, t) = P::from_real(channels[static_cast<std::size_t>(ch)][static_cast<std::size_t>(t)]);
  return out;
}

template <class P>
std::vector<std::vector<double>> signal_to_real(const MvSignal<P>& x) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(x.n_channels));
  for (int ch = 0; ch < x.n_channels; ++ch) {
    out[static_cast<std::size_t>(ch)].resize(static_cast<std::size_t>(x.length));
    for (std::int64_t t = 0; t < x.length; ++t)
      out[static_cast<std::size_t>(ch)][static_cast<std::size_t>(t)] = P::to_real(x.at(ch, t));
  }
  return out;
}

}  // namespace memd

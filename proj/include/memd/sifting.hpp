#pragma once

// One sifting iteration and the fixed-count IMF generator: project the
// multivariate signal along every direction, find each projection's extrema,
// interpolate 2K envelopes per channel through the channel samples at those
// extrema, average them into the local mean and subtract.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include "memd/directions.hpp"
#include "memd/extrema.hpp"
#include "memd/signal.hpp"
#include "memd/spline.hpp"

namespace memd {

enum class EnvelopeMode { cubic, linear };
enum class BoundaryPolicy { mirror };
// envelopes_2k averages the max and min envelopes of every projection;
// directions_k is the comparison variant that averages only the K upper
// envelopes.
enum class MeanMode { envelopes_2k, directions_k };

struct SiftConfig {
  int directions = 8;
  int siftings = 4;
  TiePolicy tie = TiePolicy::plateau;
  BoundaryPolicy boundary = BoundaryPolicy::mirror;
  EnvelopeMode envelope = EnvelopeMode::cubic;
  MeanMode mean_mode = MeanMode::envelopes_2k;
  std::int64_t k_max = 256;  // streaming lookahead cap, in samples
  // Knots on each side of the emitted interval in the sliding envelope
  // window. 0 selects the bare three-knot window; wider windows carry the
  // natural end conditions away from the emitted interval (the truncation
  // error of the spline system decays roughly 4x per extra knot).
  int window_margin = 4;

  // Future extrema a stage must see before a sample's envelopes are final.
  int lookahead_knots() const { return window_margin == 0 ? 2 : window_margin + 1; }
};

constexpr int kMaxWindowMargin = 8;

namespace detail {

// Knot positions of one projection/polarity with the ordinates of every
// channel captured at the extremum instant.
template <class P>
struct TrackKnot {
  std::int64_t x;
  std::vector<typename P::Scalar> y;  // one ordinate per channel
};

// Mirror two knots about each edge so the envelope covers [0, length).
// A single extremum mirrors itself on both sides (constant envelope).
template <class P>
std::vector<TrackKnot<P>> mirror_extend(std::vector<TrackKnot<P>> knots, std::int64_t length) {
  const std::int64_t edge = length - 1;
  const std::size_t m = knots.size();
  std::vector<TrackKnot<P>> out;
  out.reserve(m + 4);
  if (m >= 2) out.push_back({-knots[1].x, knots[1].y});
  out.push_back({-knots[0].x, knots[0].y});
  for (auto& k : knots) out.push_back(std::move(k));
  out.push_back({2 * edge - out.back().x, out.back().y});
  if (m >= 2) {
    const TrackKnot<P>& second_last = out[out.size() - 3];
    out.push_back({2 * edge - second_last.x, second_last.y});
  }
  return out;
}

// Window position for sample t inside an extended track under the bare
// three-knot rule: segment 0 of the window starting at interval j, except
// past the second-to-last knot where segment 1 of the final window takes
// over.
struct WindowRef {
  std::size_t first_knot;
  int segment;
};

inline WindowRef window_for(std::size_t interval, std::size_t n_knots) {
  if (interval + 2 <= n_knots - 1) return {interval, 0};
  return {n_knots - 3, 1};
}

// The channel-independent part of a sliding-window natural spline solve:
// the knot spacings and the eliminated Thomas diagonal with its elimination
// factors, which every channel's right-hand side reuses.
template <class P>
struct WindowFactor {
  using Acc = typename P::Acc;
  static constexpr std::size_t cap = 2 * static_cast<std::size_t>(kMaxWindowMargin) + 2;

  std::size_t first = 0;
  std::size_t count = 0;
  std::array<std::int64_t, cap> h{};
  std::array<Acc, cap> diag{};  // after forward elimination
  std::array<Acc, cap> wfac{};  // elimination factors

  template <class XAt>
  WindowFactor(XAt&& x_at, std::size_t n, std::size_t interval, int margin) {
    const std::size_t m = static_cast<std::size_t>(margin);
    first = interval >= m ? interval - m : 0;
    const std::size_t last = std::min(n - 1, interval + 1 + m);
    count = last - first + 1;
    for (std::size_t j = 0; j + 1 < count; ++j) h[j] = x_at(first + j + 1) - x_at(first + j);
    const std::size_t unknowns = count - 2;
    for (std::size_t i = 0; i < unknowns; ++i) diag[i] = P::acc_int(2 * (h[i] + h[i + 1]));
    for (std::size_t i = 1; i < unknowns; ++i) {
      wfac[i] = P::div_pos(P::acc_int(h[i]), diag[i - 1]);
      diag[i] = diag[i] - P::mul_int(wfac[i], h[i]);
    }
  }

  // Solve one channel's system and return the segment covering the interval.
  template <class YAt>
  SplineSegment<P> solve(YAt&& y_at, std::size_t interval) const {
    std::array<Acc, cap> slope{}, c{}, rhs{};
    for (std::size_t j = 0; j + 1 < count; ++j)
      slope[j] = P::div_int(P::widen(y_at(first + j + 1)) - P::widen(y_at(first + j)), h[j]);
    const std::size_t unknowns = count - 2;
    for (std::size_t i = 0; i < unknowns; ++i) rhs[i] = P::mul_int(slope[i + 1] - slope[i], 3);
    for (std::size_t i = 1; i < unknowns; ++i) rhs[i] = rhs[i] - wfac[i] * rhs[i - 1];
    c[0] = P::acc_zero();
    c[count - 1] = P::acc_zero();
    if (unknowns > 0) {
      c[unknowns] = P::div_pos(rhs[unknowns - 1], diag[unknowns - 1]);
      for (std::size_t i = unknowns - 1; i > 0; --i)
        c[i] = P::div_pos(rhs[i - 1] - P::mul_int(c[i + 1], h[i]), diag[i - 1]);
    }
    const std::size_t jl = interval - first;
    SplineSegment<P> seg;
    seg.x0 = 0;  // caller fills the abscissae
    seg.x1 = 0;
    seg.a = P::widen(y_at(interval));
    seg.b = slope[jl] - P::third(P::mul_int(c[jl] + c[jl] + c[jl + 1], h[jl]));
    seg.c = c[jl];
    seg.c_next = c[jl + 1];
    return seg;
  }
};

// Natural-spline segment covering [x_interval, x_{interval+1}) from the
// sliding window of `margin` knots on each side, clamped to the track.
// Margin 0 is the bare three-knot window. KnotAt maps a knot index to
// Knot<P>; the track must hold at least three knots, strictly increasing.
template <class P, class KnotAt>
SplineSegment<P> window_segment(KnotAt&& knot, std::size_t n, std::size_t interval, int margin) {
  if (margin == 0) {
    const WindowRef ref = window_for(interval, n);
    const WindowSpline<P> w(knot(ref.first_knot), knot(ref.first_knot + 1),
                            knot(ref.first_knot + 2));
    return w.segment(ref.segment);
  }
  const WindowFactor<P> factor([&](std::size_t i) { return knot(i).x; }, n, interval, margin);
  SplineSegment<P> seg = factor.solve([&](std::size_t i) { return knot(i).y; }, interval);
  seg.x0 = knot(interval).x;
  seg.x1 = knot(interval + 1).x;
  return seg;
}

// Adds one envelope per channel (cubic window splines or linear segments)
// onto sums[ch] over t in [0, sums[ch].size()). The window factorization is
// shared across channels.
template <class P>
void accumulate_envelope(const std::vector<TrackKnot<P>>& track, const SiftConfig& cfg,
                         std::vector<std::vector<typename P::Acc>>& sums) {
  const int n_channels = static_cast<int>(sums.size());
  const std::int64_t length = static_cast<std::int64_t>(sums.front().size());
  const std::size_t n = track.size();
  if (n == 1) {
    for (int ch = 0; ch < n_channels; ++ch) {
      const typename P::Acc v = P::widen(track[0].y[static_cast<std::size_t>(ch)]);
      for (auto& s : sums[static_cast<std::size_t>(ch)]) s += v;
    }
    return;
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const std::int64_t lo = std::max<std::int64_t>(track[j].x, 0);
    const std::int64_t hi = std::min<std::int64_t>(track[j + 1].x, length);
    if (lo >= hi) continue;
    if (cfg.envelope == EnvelopeMode::linear) {
      for (int ch = 0; ch < n_channels; ++ch) {
        const std::size_t c = static_cast<std::size_t>(ch);
        const Knot<P> a{track[j].x, track[j].y[c]};
        const Knot<P> b{track[j + 1].x, track[j + 1].y[c]};
        for (std::int64_t t = lo; t < hi; ++t)
          sums[c][static_cast<std::size_t>(t)] += linear_eval_acc<P>(a, b, t);
      }
    } else if (cfg.window_margin == 0) {
      for (int ch = 0; ch < n_channels; ++ch) {
        const std::size_t c = static_cast<std::size_t>(ch);
        auto knot = [&](std::size_t i) { return Knot<P>{track[i].x, track[i].y[c]}; };
        const SegmentEval<P> seg(window_segment<P>(knot, n, j, 0));
        for (std::int64_t t = lo; t < hi; ++t) sums[c][static_cast<std::size_t>(t)] += seg.at(t);
      }
    } else {
      const WindowFactor<P> factor([&](std::size_t i) { return track[i].x; }, n, j,
                                   cfg.window_margin);
      for (int ch = 0; ch < n_channels; ++ch) {
        const std::size_t c = static_cast<std::size_t>(ch);
        SplineSegment<P> raw =
            factor.solve([&](std::size_t i) { return track[i].y[c]; }, j);
        raw.x0 = track[j].x;
        raw.x1 = track[j + 1].x;
        const SegmentEval<P> seg(raw);
        for (std::int64_t t = lo; t < hi; ++t) sums[c][static_cast<std::size_t>(t)] += seg.at(t);
      }
    }
  }
}

template <class P>
std::optional<std::vector<TrackKnot<P>>> build_track(
    const std::vector<ExtremaRecord<typename P::Scalar>>& records, const MvSignal<P>& x) {
  if (records.empty()) return std::nullopt;
  std::vector<TrackKnot<P>> knots;
  knots.reserve(records.size());
  for (const auto& r : records) {
    TrackKnot<P> k;
    k.x = r.index;
    k.y.resize(static_cast<std::size_t>(x.n_channels));
    for (int ch = 0; ch < x.n_channels; ++ch)
      k.y[static_cast<std::size_t>(ch)] = x.at(ch, r.index);
    knots.push_back(std::move(k));
  }
  return mirror_extend<P>(std::move(knots), x.length);
}

}  // namespace detail

// Projections y_k(t) = sum_i a_i^k x_i(t). The fixed paths apply the CSD
// codes of every coefficient and round the summed partial products once.
template <class P>
std::vector<std::vector<typename P::Scalar>> project(const MvSignal<P>& x, const DirectionSet& dirs) {
  if (dirs.n_channels() != x.n_channels)
    throw DimensionMismatch("project: direction set and signal channel counts differ");
  std::vector<std::vector<typename P::Scalar>> out(static_cast<std::size_t>(dirs.n_directions()));
  for (auto& row : out) row.resize(static_cast<std::size_t>(x.length));
  std::vector<typename P::Scalar> values(static_cast<std::size_t>(x.n_channels));
  for (std::int64_t t = 0; t < x.length; ++t) {
    for (int i = 0; i < x.n_channels; ++i) values[static_cast<std::size_t>(i)] = x.at(i, t);
    for (int k = 0; k < dirs.n_directions(); ++k)
      out[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)] =
          P::project_combine(values.data(), x.n_channels, dirs, k);
  }
  return out;
}

// Envelope knots for one channel: abscissae from the projection's extrema
// records, ordinates from the channel itself, mirror-extended over the edges.
template <class P>
std::vector<Knot<P>> envelope_knots(std::span<const typename P::Scalar> channel,
                                    const std::vector<ExtremaRecord<typename P::Scalar>>& records,
                                    std::int64_t length) {
  if (records.empty()) throw TooFewExtrema("envelope_knots: no extrema on this projection");
  std::vector<detail::TrackKnot<P>> knots;
  knots.reserve(records.size());
  for (const auto& r : records)
    knots.push_back({r.index, {channel[static_cast<std::size_t>(r.index)]}});
  auto extended = detail::mirror_extend<P>(std::move(knots), length);
  std::vector<Knot<P>> out;
  out.reserve(extended.size());
  for (const auto& k : extended) out.push_back({k.x, k.y[0]});
  return out;
}

// Local mean of the multivariate signal; empty when some projection has no
// extrema left, which signals the residue condition upward.
template <class P>
std::optional<MvSignal<P>> local_mean(const MvSignal<P>& x, const DirectionSet& dirs,
                                      const SiftConfig& cfg) {
  if (cfg.window_margin < 0 || cfg.window_margin > kMaxWindowMargin)
    throw ConfigError("local_mean: window margin out of range");
  if (x.length < 3) return std::nullopt;
  const auto projections = project(x, dirs);
  const int n_polarities = cfg.mean_mode == MeanMode::envelopes_2k ? 2 : 1;

  std::vector<std::vector<detail::TrackKnot<P>>> tracks;
  tracks.reserve(projections.size() * static_cast<std::size_t>(n_polarities));
  for (const auto& proj : projections) {
    for (int pol = 0; pol < n_polarities; ++pol) {
      const ExtremumKind kind = pol == 0 ? ExtremumKind::maximum : ExtremumKind::minimum;
      const std::span<const typename P::Scalar> view(proj);
      // The residue decision needs genuine oscillation: plateau records on a
      // flat stretch do not count as extrema.
      if (detect_extrema(view, kind, TiePolicy::strict_first).empty()) return std::nullopt;
      auto records = dedup_plateaus(detect_extrema(view, kind, cfg.tie));
      auto track = detail::build_track<P>(records, x);
      if (!track) return std::nullopt;
      tracks.push_back(std::move(*track));
    }
  }

  const int envelope_count = dirs.n_directions() * n_polarities;
  const typename P::Const scale = P::make_const(1.0 / envelope_count);
  MvSignal<P> mean(x.n_channels, x.length, x.sample_rate);
  std::vector<std::vector<typename P::Acc>> sums(
      static_cast<std::size_t>(x.n_channels),
      std::vector<typename P::Acc>(static_cast<std::size_t>(x.length), P::acc_zero()));
  for (const auto& track : tracks) detail::accumulate_envelope<P>(track, cfg, sums);
  for (int ch = 0; ch < x.n_channels; ++ch)
    for (std::int64_t t = 0; t < x.length; ++t)
      mean.at(ch, t) = P::narrow(
          P::mul_const(sums[static_cast<std::size_t>(ch)][static_cast<std::size_t>(t)], scale));
  return mean;
}

template <class P>
std::optional<MvSignal<P>> sift_once(const MvSignal<P>& x, const DirectionSet& dirs,
                                     const SiftConfig& cfg) {
  auto mean = local_mean(x, dirs, cfg);
  if (!mean) return std::nullopt;
  MvSignal<P> h(x.n_channels, x.length, x.sample_rate);
  for (std::size_t i = 0; i < x.samples.size(); ++i) h.samples[i] = x.samples[i] - mean->samples[i];
  return h;
}

template <class P>
struct ImfResult {
  MvSignal<P> imf;
  MvSignal<P> residue;
  bool residue_reached = false;  // input had no extrema at all
  int sifts_applied = 0;
};

template <class P>
MvSignal<WideState<P>> widen_signal(const MvSignal<P>& x) {
  if constexpr (std::is_same_v<WideState<P>, P>) {
    return x;
  } else {
    MvSignal<WideState<P>> out(x.n_channels, x.length, x.sample_rate);
    for (std::size_t i = 0; i < x.samples.size(); ++i) out.samples[i] = P::widen(x.samples[i]);
    return out;
  }
}

template <class P>
MvSignal<P> narrow_signal(const MvSignal<WideState<P>>& x) {
  if constexpr (std::is_same_v<WideState<P>, P>) {
    return x;
  } else {
    MvSignal<P> out(x.n_channels, x.length, x.sample_rate);
    for (std::size_t i = 0; i < x.samples.size(); ++i) out.samples[i] = P::narrow(x.samples[i]);
    return out;
  }
}

template <class W>
struct WideImfResult {
  MvSignal<W> imf;
  bool residue_reached = false;
  int sifts_applied = 0;
};

// Sifting core on the wide-state signal: exactly `cfg.siftings` sifts of the
// fixed-count stopping rule. If the very first sift finds no extrema the
// input is the final residue; a later failure accepts the last successful
// candidate as the IMF.
template <class W>
WideImfResult<W> extract_imf_core(const MvSignal<W>& xw, const DirectionSet& dirs,
                                  const SiftConfig& cfg) {
  WideImfResult<W> out;
  MvSignal<W> h = xw;
  for (int s = 0; s < cfg.siftings; ++s) {
    auto next = sift_once(h, dirs, cfg);
    if (!next) {
      if (s == 0) {
        out.imf = MvSignal<W>(xw.n_channels, xw.length, xw.sample_rate);
        out.residue_reached = true;
        return out;
      }
      break;
    }
    h = std::move(*next);
    ++out.sifts_applied;
  }
  out.imf = std::move(h);
  return out;
}

// Fixed-path iterates stay in the wide accumulator format between sifts so
// repeated requantization cannot snowball; the IMF narrows to the sample
// format and the residue is the exact sample-level difference.
template <class P>
ImfResult<P> extract_imf(const MvSignal<P>& x, const DirectionSet& dirs, const SiftConfig& cfg) {
  using W = WideState<P>;
  const WideImfResult<W> core = extract_imf_core<W>(widen_signal<P>(x), dirs, cfg);
  ImfResult<P> out;
  out.residue_reached = core.residue_reached;
  out.sifts_applied = core.sifts_applied;
  if (core.residue_reached) {
    out.imf = MvSignal<P>(x.n_channels, x.length, x.sample_rate);
    out.residue = x;
    return out;
  }
  out.imf = narrow_signal<P>(core.imf);
  out.residue = MvSignal<P>(x.n_channels, x.length, x.sample_rate);
  for (std::size_t i = 0; i < x.samples.size(); ++i)
    out.residue.samples[i] = x.samples[i] - out.imf.samples[i];
  return out;
}

}  // namespace memd

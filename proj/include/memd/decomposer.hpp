#pragma once

// Two-level decomposition pipeline: a cascade of M IMF generators for batch
// runs, and a streaming engine that emits IMF samples online with bounded
// lookahead. A sample leaves a sifting stage once enough further extrema are
// visible on every projection to pin its envelope windows down, or once the
// lookahead cap forces a provisional boundary extension; emissions are never
// revised.

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "memd/sifting.hpp"

namespace memd {

template <class P>
struct ImfStack {
  std::vector<MvSignal<P>> imfs;
  MvSignal<P> residue;
  int actual_imfs = 0;  // stages that produced a non-padded IMF
  SiftConfig config;
};

// Batch decomposition: each stage's residue feeds the next. An early residue
// pads the remaining IMFs with zeros; the actual count is recorded.
// `stage_seconds`, when given, receives per-stage wall time.
//
// The internal cascade keeps the fixed path's residue in the wide format so
// stage boundaries add no fresh rounding; the emitted IMFs and residue are
// sample-format and telescope exactly back to the input.
template <class P>
ImfStack<P> decompose(const MvSignal<P>& x, int m_imfs, const DirectionSet& dirs,
                      const SiftConfig& cfg, std::vector<double>* stage_seconds = nullptr) {
  using W = WideState<P>;
  if (m_imfs < 1) throw ConfigError("decompose: need at least one IMF stage");
  if (cfg.siftings < 1) throw ConfigError("decompose: need at least one sifting iteration");
  if (x.length < 16) throw ConfigError("decompose: input shorter than 16 samples");
  if (stage_seconds) stage_seconds->assign(static_cast<std::size_t>(m_imfs), 0.0);

  ImfStack<P> out;
  out.config = cfg;
  out.imfs.reserve(static_cast<std::size_t>(m_imfs));
  MvSignal<W> wide_residue = widen_signal<P>(x);
  MvSignal<P> residue = x;
  bool done = false;
  for (int j = 0; j < m_imfs; ++j) {
    if (done) {
      out.imfs.emplace_back(x.n_channels, x.length, x.sample_rate);
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    WideImfResult<W> step = extract_imf_core<W>(wide_residue, dirs, cfg);
    if (stage_seconds)
      (*stage_seconds)[static_cast<std::size_t>(j)] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (step.residue_reached) {
      out.imfs.emplace_back(x.n_channels, x.length, x.sample_rate);
      done = true;
      continue;
    }
    MvSignal<P> imf = narrow_signal<P>(step.imf);
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
      residue.samples[i] = residue.samples[i] - imf.samples[i];
      wide_residue.samples[i] = wide_residue.samples[i] - step.imf.samples[i];
    }
    out.imfs.push_back(std::move(imf));
    ++out.actual_imfs;
  }
  out.residue = std::move(residue);
  return out;
}

// Online engine. push() accepts one sample vector per call; returned tuples
// carry (imf index, time index, channel values), with imf index == m_imfs
// denoting the residue stream. flush() applies the end-boundary policy and
// drains everything, after which the concatenated output covers the whole
// record for every IMF and the residue.
template <class P>
class MemdStream {
 public:
  using Scalar = typename P::Scalar;
  using W = WideState<P>;
  using WScalar = typename W::Scalar;

  struct Emission {
    int imf_index;  // 0-based; == m_imfs for the residue
    std::int64_t t;
    std::vector<Scalar> values;
  };

  MemdStream(int n_channels, int m_imfs, const DirectionSet& dirs, const SiftConfig& cfg)
      : n_channels_(n_channels), m_imfs_(m_imfs), dirs_(&dirs), cfg_(cfg) {
    if (dirs.n_channels() != n_channels)
      throw DimensionMismatch("MemdStream: direction set channel count mismatch");
    if (m_imfs < 1) throw ConfigError("MemdStream: need at least one IMF stage");
    if (cfg.siftings < 1) throw ConfigError("MemdStream: need at least one sifting iteration");
    if (cfg.window_margin < 0 || cfg.window_margin > kMaxWindowMargin)
      throw ConfigError("MemdStream: window margin out of range");
    stages_.reserve(static_cast<std::size_t>(m_imfs));
    for (int s = 0; s < m_imfs; ++s) stages_.emplace_back(n_channels, dirs, cfg_);
  }

  std::vector<Emission> push(std::span<const Scalar> sample) {
    if (flushed_) throw StreamFlushed("MemdStream: push after flush");
    if (static_cast<int>(sample.size()) != n_channels_)
      throw DimensionMismatch("MemdStream: sample vector size mismatch");
    std::vector<Emission> out;
    std::vector<TimedVec> carry;
    TimedVec tv;
    tv.t = t_next_++;
    tv.out.assign(sample.begin(), sample.end());
    tv.wide.resize(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) tv.wide[i] = P::widen(sample[i]);
    carry.push_back(std::move(tv));
    propagate(std::move(carry), out, /*finishing=*/false);
    return out;
  }

  std::vector<Emission> flush() {
    if (flushed_) throw StreamFlushed("MemdStream: already flushed");
    flushed_ = true;
    std::vector<Emission> out;
    propagate({}, out, /*finishing=*/true);
    return out;
  }

  bool flushed() const noexcept { return flushed_; }

  // Sample vectors currently buffered across all stages and sifting units.
  std::size_t buffered_sample_vectors() const {
    std::size_t total = 0;
    for (const auto& stage : stages_) {
      total += stage.pending.size();
      for (const auto& unit : stage.units) total += unit.buffered();
    }
    return total;
  }

 private:
  struct TimedVec {
    std::int64_t t;
    std::vector<WScalar> wide;  // cascade state fed to the sifting units
    std::vector<Scalar> out;    // sample-format chain for emitted artifacts
  };

  struct UnitOut {
    std::int64_t t;
    std::vector<WScalar> h;  // sifting iterates travel in the wide format
  };

  // One sifting iteration, online. Tracks the extrema of every projection,
  // grows the per-track knot lists (with mirrored fronts) and emits
  // h(t) = x(t) - m(t) once every track's envelope window around t is
  // determined or the lookahead cap forces a provisional extension.
  class SiftUnit {
   public:
    SiftUnit(int unit_index, int n_channels, const DirectionSet& dirs, const SiftConfig& cfg)
        : unit_index_(unit_index), n_channels_(n_channels), dirs_(&dirs), cfg_(&cfg),
          scale_(W::make_const(1.0 / (dirs.n_directions() *
                                      (cfg.mean_mode == MeanMode::envelopes_2k ? 2 : 1)))) {
      const int polarities = cfg.mean_mode == MeanMode::envelopes_2k ? 2 : 1;
      tracks_.reserve(static_cast<std::size_t>(dirs.n_directions()) * polarities);
      for (int k = 0; k < dirs.n_directions(); ++k)
        for (int pol = 0; pol < polarities; ++pol)
          tracks_.emplace_back(pol == 0 ? ExtremumKind::maximum : ExtremumKind::minimum,
                               cfg.tie, n_channels);
    }

    void push(std::int64_t t, std::span<const WScalar> x, std::vector<UnitOut>& out) {
      hist_.emplace_back(x.begin(), x.end());
      ++t_in_;

      for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
        Track& track = tracks_[ti];
        const int k = static_cast<int>(ti) / polarities();
        const WScalar y = W::project_combine(x.data(), n_channels_, *dirs_, k);
        if (track.strict_detector.push(y, t)) track.alive = true;
        if (auto rec = track.detector.push(y, t)) {
          const bool duplicate = track.last_raw &&
                                 rec->index == track.last_raw->index + 1 &&
                                 rec->value == track.last_raw->value;
          track.last_raw = *rec;
          if (!duplicate) append_real_knot(track, rec->index);
        }
      }

      drain(out);
      while (!closed_ && t_in_ - t_out_ > cfg_->k_max) emit_one(out, /*forced=*/true);
    }

    // End of input: apply the end-boundary mirror to every track and drain.
    void finish(std::vector<UnitOut>& out) {
      closed_ = true;
      bool any_dead = false;
      for (Track& track : tracks_) {
        if (!track.alive || track.knots.empty()) {
          any_dead = true;
          continue;
        }
        close_track(track);
      }
      if (any_dead) {
        while (t_out_ < t_in_) emit_special(out);
      } else {
        while (t_out_ < t_in_) emit_one(out, /*forced=*/true);
      }
    }

    std::size_t buffered() const noexcept { return hist_.size(); }

   private:
    struct Track {
      Track(ExtremumKind kind, TiePolicy tie, int n_channels)
          : detector(kind, tie), strict_detector(kind, TiePolicy::strict_first), segments() {
        segments.reserve(static_cast<std::size_t>(n_channels));
      }
      ExtremaStream<WScalar> detector;
      ExtremaStream<WScalar> strict_detector;  // aliveness: genuine oscillation
      bool alive = false;
      std::optional<ExtremaRecord<WScalar>> last_raw;
      std::deque<detail::TrackKnot<W>> knots;
      bool front_mirrored = false;
      std::optional<detail::TrackKnot<W>> last_real, second_last_real;
      std::size_t walker = 0;
      std::vector<SegmentEval<W>> segments;  // one per channel, current interval
      std::size_t cached_interval = static_cast<std::size_t>(-1);
    };

    int polarities() const noexcept {
      return cfg_->mean_mode == MeanMode::envelopes_2k ? 2 : 1;
    }

    void append_real_knot(Track& track, std::int64_t index) {
      if (!track.knots.empty() && index <= track.knots.back().x) return;  // after a cap extension
      detail::TrackKnot<W> knot;
      knot.x = index;
      knot.y.resize(static_cast<std::size_t>(n_channels_));
      for (int ch = 0; ch < n_channels_; ++ch)
        knot.y[static_cast<std::size_t>(ch)] = hist_sample(index, ch);
      track.second_last_real = track.last_real;
      track.last_real = knot;
      track.knots.push_back(std::move(knot));
      maybe_mirror_front(track);
    }

    void maybe_mirror_front(Track& track) {
      if (track.front_mirrored || track.knots.size() < 2) return;
      const detail::TrackKnot<W> first = track.knots[0];
      const detail::TrackKnot<W> second = track.knots[1];
      track.knots.push_front({-first.x, first.y});
      track.knots.push_front({-second.x, second.y});
      // No window evaluation can have happened before the front mirror, so
      // the walk restarts from the first interval.
      track.walker = 0;
      track.front_mirrored = true;
      track.cached_interval = static_cast<std::size_t>(-1);
    }

    void close_track(Track& track) {
      const std::int64_t edge = t_in_ - 1;
      if (!track.front_mirrored) {
        // Single knot over the whole record: mirror it on both sides.
        const detail::TrackKnot<W> only = track.knots[0];
        track.knots.push_front({-only.x, only.y});
        track.walker = 0;
        track.front_mirrored = true;
        append_monotonic(track, {2 * edge - only.x, only.y});
        return;
      }
      const detail::TrackKnot<W> last = *track.last_real;
      const detail::TrackKnot<W> prev =
          track.second_last_real ? *track.second_last_real : *track.last_real;
      append_monotonic(track, {2 * edge - last.x, last.y});
      if (track.second_last_real) append_monotonic(track, {2 * edge - prev.x, prev.y});
      // Mirrors of capped extensions can collide; keep extending flat until
      // the final window clears the record end.
      while (track.knots.back().x < edge + 1)
        append_monotonic(track, {track.knots.back().x + cfg_->k_max, track.knots.back().y});
    }

    void append_monotonic(Track& track, detail::TrackKnot<W> knot) {
      if (knot.x <= track.knots.back().x) return;
      track.knots.push_back(std::move(knot));
    }

    WScalar hist_sample(std::int64_t t, int ch) const {
      return hist_[static_cast<std::size_t>(t - hist_base_)][static_cast<std::size_t>(ch)];
    }

    // Window of track covering t without provisional extension. Mid-stream
    // a sample needs its interval plus the configured lookahead of future
    // knots; once closed, the clamped window always applies.
    bool coverable(const Track& track, std::int64_t t) const {
      if (!track.alive || !track.front_mirrored) return false;
      const std::size_t n = track.knots.size();
      std::size_t j = track.walker;
      while (j + 1 < n && t >= track.knots[j + 1].x) ++j;
      if (j + 1 >= n || t >= track.knots[j + 1].x) return false;
      if (closed_) return true;
      return j + static_cast<std::size_t>(cfg_->lookahead_knots()) < n;
    }

    void ensure_coverage(Track& track) {
      // Provisional extension: mirror about the last knot, or extend flat
      // from a single knot. Appended knots are final.
      while (!coverable(track, t_out_)) {
        const std::size_t n = track.knots.size();
        if (n >= 2) {
          const auto& last = track.knots[n - 1];
          const auto& prev = track.knots[n - 2];
          track.knots.push_back({2 * last.x - prev.x, prev.y});
        } else {
          track.knots.push_back({track.knots.back().x + cfg_->k_max, track.knots.back().y});
        }
        maybe_mirror_front(track);
      }
    }

    typename W::Acc track_eval(Track& track, std::int64_t t, int ch) {
      const std::size_t n = track.knots.size();
      while (track.walker + 1 < n && t >= track.knots[track.walker + 1].x) ++track.walker;
      if (track.cached_interval != track.walker ||
          track.segments.size() != static_cast<std::size_t>(n_channels_)) {
        track.segments.clear();
        if (cfg_->window_margin == 0) {
          for (int c = 0; c < n_channels_; ++c) {
            auto knot = [&](std::size_t i) {
              return Knot<W>{track.knots[i].x, track.knots[i].y[static_cast<std::size_t>(c)]};
            };
            track.segments.push_back(SegmentEval<W>(
                detail::window_segment<W>(knot, n, track.walker, 0)));
          }
        } else {
          const detail::WindowFactor<W> factor(
              [&](std::size_t i) { return track.knots[i].x; }, n, track.walker,
              cfg_->window_margin);
          for (int c = 0; c < n_channels_; ++c) {
            SplineSegment<W> raw = factor.solve(
                [&](std::size_t i) { return track.knots[i].y[static_cast<std::size_t>(c)]; },
                track.walker);
            raw.x0 = track.knots[track.walker].x;
            raw.x1 = track.knots[track.walker + 1].x;
            track.segments.push_back(SegmentEval<W>(raw));
          }
        }
        track.cached_interval = track.walker;
      }
      return track.segments[static_cast<std::size_t>(ch)].at(t);
    }

    typename W::Acc track_eval_linear(Track& track, std::int64_t t, int ch) {
      const std::size_t n = track.knots.size();
      while (track.walker + 1 < n && t >= track.knots[track.walker + 1].x) ++track.walker;
      auto knot = [&](std::size_t i) {
        return Knot<W>{track.knots[i].x, track.knots[i].y[static_cast<std::size_t>(ch)]};
      };
      return linear_eval_acc<W>(knot(track.walker), knot(track.walker + 1), t);
    }

    void drain(std::vector<UnitOut>& out) {
      while (t_out_ < t_in_) {
        bool all = true;
        for (const Track& track : tracks_)
          if (!coverable(track, t_out_)) {
            all = false;
            break;
          }
        if (!all) return;
        emit_one(out, /*forced=*/false);
      }
    }

    void emit_one(std::vector<UnitOut>& out, bool forced) {
      if (forced) {
        for (const Track& track : tracks_)
          if (!track.alive || track.knots.empty()) {
            emit_special(out);
            return;
          }
        for (Track& track : tracks_) {
          if (!coverable(track, t_out_)) {
            if (track.knots.size() == 1 && !closed_) {
              // Constant envelope from the lone knot; leave the track open.
              continue;
            }
            ensure_coverage(track);
          }
        }
      }
      UnitOut o;
      o.t = t_out_;
      o.h.resize(static_cast<std::size_t>(n_channels_));
      for (int ch = 0; ch < n_channels_; ++ch) {
        typename W::Acc sum = W::acc_zero();
        for (Track& track : tracks_) {
          if (track.knots.size() == 1) {
            sum += W::widen(track.knots[0].y[static_cast<std::size_t>(ch)]);
          } else if (cfg_->envelope == EnvelopeMode::linear) {
            sum += track_eval_linear(track, t_out_, ch);
          } else {
            sum += track_eval(track, t_out_, ch);
          }
        }
        const WScalar mean = W::narrow(W::mul_const(sum, scale_));
        o.h[static_cast<std::size_t>(ch)] = hist_sample(t_out_, ch) - mean;
      }
      out.push_back(std::move(o));
      ++t_out_;
      prune();
    }

    // Some projection has no extrema at all: the first iteration emits a
    // zero candidate (the input is residue-like), later iterations pass
    // their input through so the stage keeps the last sifted candidate.
    void emit_special(std::vector<UnitOut>& out) {
      UnitOut o;
      o.t = t_out_;
      o.h.resize(static_cast<std::size_t>(n_channels_));
      for (int ch = 0; ch < n_channels_; ++ch)
        o.h[static_cast<std::size_t>(ch)] = unit_index_ == 0 ? WScalar{} : hist_sample(t_out_, ch);
      out.push_back(std::move(o));
      ++t_out_;
      prune();
    }

    void prune() {
      while (hist_base_ < t_out_ - 2 && !hist_.empty()) {
        hist_.pop_front();
        ++hist_base_;
      }
      // Keep enough knots behind the walker for the window's back margin
      // (batch clamps at the true track start, so the prune must never bite
      // into a window the walker can still reference).
      const std::size_t keep = static_cast<std::size_t>(cfg_->window_margin) + 2;
      for (Track& track : tracks_) {
        while (track.walker > keep) {
          track.knots.pop_front();
          --track.walker;
          if (track.cached_interval != static_cast<std::size_t>(-1)) --track.cached_interval;
        }
      }
    }

    int unit_index_;
    int n_channels_;
    const DirectionSet* dirs_;
    const SiftConfig* cfg_;
    typename W::Const scale_;
    std::vector<Track> tracks_;
    std::deque<std::vector<WScalar>> hist_;
    std::int64_t hist_base_ = 0;
    std::int64_t t_in_ = 0;
    std::int64_t t_out_ = 0;
    bool closed_ = false;
  };

  struct Stage {
    Stage(int n_channels, const DirectionSet& dirs, const SiftConfig& cfg) {
      units.reserve(static_cast<std::size_t>(cfg.siftings));
      for (int s = 0; s < cfg.siftings; ++s) units.emplace_back(s, n_channels, dirs, cfg);
    }
    std::vector<SiftUnit> units;
    // stage inputs awaiting their IMF sample, in both formats
    std::deque<std::pair<std::vector<WScalar>, std::vector<Scalar>>> pending;
    std::int64_t pending_base = 0;
  };

  void propagate(std::vector<TimedVec> carry, std::vector<Emission>& out, bool finishing) {
    for (std::size_t s = 0; s < stages_.size(); ++s) {
      Stage& stage = stages_[s];
      std::vector<UnitOut> chain_out;
      for (TimedVec& tv : carry) {
        buf_a_.clear();
        stage.units[0].push(tv.t, tv.wide, buf_a_);
        stage.pending.emplace_back(std::move(tv.wide), std::move(tv.out));
        run_chain(stage, buf_a_, chain_out);
      }
      if (finishing) {
        buf_a_.clear();
        stage.units[0].finish(buf_a_);
        run_chain(stage, buf_a_, chain_out, /*finish_rest=*/true);
      }
      std::vector<TimedVec> next;
      next.reserve(chain_out.size());
      for (UnitOut& uo : chain_out) {
        auto& [wide_in, out_in] = stage.pending.front();
        TimedVec residue;
        residue.t = uo.t;
        residue.wide.resize(static_cast<std::size_t>(n_channels_));
        residue.out.resize(static_cast<std::size_t>(n_channels_));
        std::vector<Scalar> imf(static_cast<std::size_t>(n_channels_));
        for (int ch = 0; ch < n_channels_; ++ch) {
          const auto c = static_cast<std::size_t>(ch);
          imf[c] = P::narrow(uo.h[c]);
          residue.out[c] = out_in[c] - imf[c];
          residue.wide[c] = wide_in[c] - uo.h[c];
        }
        stage.pending.pop_front();
        ++stage.pending_base;
        out.push_back(Emission{static_cast<int>(s), uo.t, std::move(imf)});
        next.push_back(std::move(residue));
      }
      carry = std::move(next);
    }
    for (TimedVec& tv : carry) out.push_back(Emission{m_imfs_, tv.t, std::move(tv.out)});
  }

  // Feed buf through units 1..S-1 of the stage, optionally finishing each.
  void run_chain(Stage& stage, std::vector<UnitOut>& buf, std::vector<UnitOut>& chain_out,
                 bool finish_rest = false) {
    std::vector<UnitOut>* current = &buf;
    std::vector<UnitOut>* next = &buf_b_;
    for (std::size_t u = 1; u < stage.units.size(); ++u) {
      next->clear();
      for (UnitOut& uo : *current) stage.units[u].push(uo.t, uo.h, *next);
      if (finish_rest) stage.units[u].finish(*next);
      std::swap(current, next);
    }
    chain_out.insert(chain_out.end(), std::make_move_iterator(current->begin()),
                     std::make_move_iterator(current->end()));
  }

  int n_channels_;
  int m_imfs_;
  const DirectionSet* dirs_;
  SiftConfig cfg_;
  std::vector<Stage> stages_;
  std::vector<UnitOut> buf_a_, buf_b_;
  std::int64_t t_next_ = 0;
  bool flushed_ = false;
};

// Assemble streamed emissions into a complete stack (testing and the stream
// command use this to compare against the batch path).
template <class P>
ImfStack<P> collect_stream(const std::vector<typename MemdStream<P>::Emission>& emissions,
                           int n_channels, std::int64_t length, int m_imfs, double sample_rate,
                           const SiftConfig& cfg) {
  ImfStack<P> stack;
  stack.config = cfg;
  for (int j = 0; j < m_imfs; ++j) stack.imfs.emplace_back(n_channels, length, sample_rate);
  stack.residue = MvSignal<P>(n_channels, length, sample_rate);
  std::vector<std::int64_t> seen(static_cast<std::size_t>(m_imfs) + 1, 0);
  for (const auto& e : emissions) {
    MvSignal<P>& target = e.imf_index == m_imfs ? stack.residue
                                                : stack.imfs[static_cast<std::size_t>(e.imf_index)];
    for (int ch = 0; ch < n_channels; ++ch)
      target.at(ch, e.t) = e.values[static_cast<std::size_t>(ch)];
    ++seen[static_cast<std::size_t>(e.imf_index)];
  }
  for (std::int64_t count : seen)
    if (count != length) throw Error("collect_stream: incomplete stream output");
  stack.actual_imfs = m_imfs;
  return stack;
}

}  // namespace memd

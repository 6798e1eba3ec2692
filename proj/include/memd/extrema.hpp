#pragma once

// Streaming extrema identification over a three-sample sliding window, one
// comparator pair per stream. The plateau policy matches the hardware
// comparators (>= / <=), so flat runs emit a record per interior sample;
// strict_first keeps only the first sample of a plateau.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "memd/errors.hpp"

namespace memd {

enum class ExtremumKind { maximum, minimum };
enum class TiePolicy { plateau, strict_first };

template <typename T>
struct ExtremaRecord {
  std::int64_t index;
  T value;
  ExtremumKind kind;
};

template <typename T>
class ExtremaStream {
 public:
  explicit ExtremaStream(ExtremumKind mode, TiePolicy tie = TiePolicy::plateau)
      : mode_(mode), tie_(tie) {}

  // Samples must arrive with consecutive indices. Returns a record once the
  // window is full and the centre sample is an extremum.
  std::optional<ExtremaRecord<T>> push(T sample, std::int64_t index) {
    if (filled_ == 0) {
      next_index_ = index;
    } else if (index != next_index_) {
      throw IndexError("ExtremaStream: non-consecutive sample index");
    }
    ++next_index_;

    if (filled_ < 3) {
      window_[filled_++] = sample;
    } else {
      window_[0] = window_[1];
      window_[1] = window_[2];
      window_[2] = sample;
    }
    if (filled_ < 3) return std::nullopt;

    const T& prev = window_[0];
    const T& mid = window_[1];
    const T& next = window_[2];
    bool hit;
    if (mode_ == ExtremumKind::maximum) {
      hit = tie_ == TiePolicy::plateau ? (mid >= prev && mid >= next)
                                       : (prev < mid && mid >= next);
    } else {
      hit = tie_ == TiePolicy::plateau ? (mid <= prev && mid <= next)
                                       : (prev > mid && mid <= next);
    }
    if (!hit) return std::nullopt;
    ++count_;
    return ExtremaRecord<T>{index - 1, mid, mode_};
  }

  std::uint64_t count() const noexcept { return count_; }

 private:
  ExtremumKind mode_;
  TiePolicy tie_;
  T window_[3] = {};
  int filled_ = 0;
  std::int64_t next_index_ = 0;
  std::uint64_t count_ = 0;
};

template <typename T>
std::vector<ExtremaRecord<T>> detect_extrema(std::span<const T> signal, ExtremumKind mode,
                                             TiePolicy tie = TiePolicy::plateau) {
  if (signal.size() < 3) throw TooShort("detect_extrema: need at least 3 samples");
  ExtremaStream<T> stream(mode, tie);
  std::vector<ExtremaRecord<T>> records;
  for (std::size_t t = 0; t < signal.size(); ++t)
    if (auto r = stream.push(signal[t], static_cast<std::int64_t>(t))) records.push_back(*r);
  return records;
}

// Collapse runs of records at adjacent indices with equal values to their
// first sample. Required under the plateau tie policy before the records can
// serve as spline knots.
template <typename T>
std::vector<ExtremaRecord<T>> dedup_plateaus(const std::vector<ExtremaRecord<T>>& records) {
  std::vector<ExtremaRecord<T>> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0 && records[i].index == records[i - 1].index + 1 &&
        records[i].value == records[i - 1].value) {
      continue;  // same plateau as the previous raw record
    }
    out.push_back(records[i]);
  }
  return out;
}

}  // namespace memd

#include "memd/directions.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "memd/errors.hpp"

namespace memd {

namespace {

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
                                73, 79, 83, 89, 97, 101, 103, 107, 109, 113};

}  // namespace

double radical_inverse(std::uint64_t index, unsigned base) {
  double result = 0.0;
  double digit_weight = 1.0 / base;
  while (index != 0) {
    result += static_cast<double>(index % base) * digit_weight;
    index /= base;
    digit_weight /= base;
  }
  return result;
}

std::vector<double> hammersley_point(std::uint64_t index, std::uint64_t count, int dim) {
  if (dim < 1 || static_cast<std::size_t>(dim) > std::size(kPrimes) + 1)
    throw ConfigError("hammersley_point: unsupported dimension");
  if (index >= count) throw ConfigError("hammersley_point: index out of range");
  std::vector<double> p(static_cast<std::size_t>(dim));
  p[0] = static_cast<double>(index) / static_cast<double>(count);
  for (int j = 1; j < dim; ++j)
    p[static_cast<std::size_t>(j)] = radical_inverse(index, kPrimes[j - 1]);
  return p;
}

DirectionSet::DirectionSet(int n_channels, int n_directions)
    : n_channels_(n_channels), n_directions_(n_directions) {
  if (n_channels < 2) throw ConfigError("DirectionSet: need at least 2 channels");
  if (n_directions < 1) throw ConfigError("DirectionSet: need at least 1 direction");

  vectors_.resize(static_cast<std::size_t>(n_directions) * n_channels_);
  const int dim = n_channels - 1;
  std::vector<double> angles(static_cast<std::size_t>(dim));
  for (int k = 0; k < n_directions; ++k) {
    const std::vector<double> p =
        hammersley_point(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(n_directions), dim);
    // Polar angles from coordinates 1..dim-1, azimuth from coordinate 0.
    for (int j = 0; j + 1 < dim; ++j)
      angles[static_cast<std::size_t>(j)] = std::numbers::pi * p[static_cast<std::size_t>(j + 1)];
    angles[static_cast<std::size_t>(dim - 1)] = 2.0 * std::numbers::pi * p[0];

    double running_sin = 1.0;
    for (int i = 0; i < dim; ++i) {
      vectors_[static_cast<std::size_t>(k) * n_channels_ + i] =
          running_sin * std::cos(angles[static_cast<std::size_t>(i)]);
      running_sin *= std::sin(angles[static_cast<std::size_t>(i)]);
    }
    vectors_[static_cast<std::size_t>(k) * n_channels_ + dim] = running_sin;
  }
  quantize();
}

void DirectionSet::quantize() {
  codes_.clear();
  codes_.reserve(vectors_.size());
  for (double v : vectors_) codes_.emplace_back(v);
}

void DirectionSet::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("DirectionSet: cannot open '" + path + "' for writing");
  out.precision(17);
  for (int k = 0; k < n_directions_; ++k) {
    for (int i = 0; i < n_channels_; ++i) {
      if (i) out << ',';
      out << coefficient(k, i);
    }
    out << '\n';
  }
}

DirectionSet DirectionSet::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("DirectionSet: cannot open '" + path + "'");
  DirectionSet set;
  std::string line;
  int columns = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    int n = 0;
    while (std::getline(row, cell, ',')) {
      std::size_t used = 0;
      double v = std::stod(cell, &used);
      if (used == 0) throw ParseError("DirectionSet: bad cell '" + cell + "'");
      set.vectors_.push_back(v);
      ++n;
    }
    if (columns < 0) columns = n;
    if (n != columns) throw RaggedRows("DirectionSet: ragged rows in '" + path + "'");
    ++set.n_directions_;
  }
  if (set.n_directions_ == 0 || columns < 2)
    throw ParseError("DirectionSet: no usable rows in '" + path + "'");
  set.n_channels_ = columns;
  set.quantize();
  return set;
}

}  // namespace memd

#include "memd/csv_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace memd {

namespace {

constexpr const char* kConfigPrefix = "# memd-config ";

std::string path_name(ArithPath p) { return p == ArithPath::fixed ? "fixed" : "real"; }
std::string envelope_name(EnvelopeMode m) { return m == EnvelopeMode::linear ? "linear" : "cubic"; }
std::string tie_name(TiePolicy t) { return t == TiePolicy::strict_first ? "strict-first" : "plateau"; }
std::string mean_name(MeanMode m) { return m == MeanMode::directions_k ? "k" : "2k"; }

ArithPath parse_path(const std::string& s) {
  if (s == "fixed") return ArithPath::fixed;
  if (s == "real") return ArithPath::real;
  throw ParseError("unknown arithmetic path '" + s + "'");
}

EnvelopeMode parse_envelope(const std::string& s) {
  if (s == "linear") return EnvelopeMode::linear;
  if (s == "cubic") return EnvelopeMode::cubic;
  throw ParseError("unknown envelope mode '" + s + "'");
}

TiePolicy parse_tie(const std::string& s) {
  if (s == "strict-first") return TiePolicy::strict_first;
  if (s == "plateau") return TiePolicy::plateau;
  throw ParseError("unknown tie policy '" + s + "'");
}

MeanMode parse_mean(const std::string& s) {
  if (s == "k") return MeanMode::directions_k;
  if (s == "2k") return MeanMode::envelopes_2k;
  throw ParseError("unknown mean mode '" + s + "'");
}

}  // namespace

std::string RunConfig::to_json() const {
  nlohmann::json j;
  j["channels"] = channels;
  j["directions"] = directions;
  j["siftings"] = siftings;
  j["imfs"] = imfs;
  j["path"] = path_name(path);
  j["envelope"] = envelope_name(envelope);
  j["tie"] = tie_name(tie);
  j["boundary"] = "mirror";
  j["mean_mode"] = mean_name(mean_mode);
  j["k_max"] = k_max;
  j["window_margin"] = window_margin;
  j["welch_segment"] = welch_segment;
  j["welch_overlap"] = welch_overlap;
  j["sample_rate"] = sample_rate;
  j["seed"] = seed;
  j["samples"] = samples;
  j["preset"] = preset;
  return j.dump();
}

RunConfig RunConfig::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("RunConfig: invalid JSON");
  RunConfig cfg;
  cfg.channels = j.value("channels", cfg.channels);
  cfg.directions = j.value("directions", cfg.directions);
  cfg.siftings = j.value("siftings", cfg.siftings);
  cfg.imfs = j.value("imfs", cfg.imfs);
  cfg.path = parse_path(j.value("path", std::string("real")));
  cfg.envelope = parse_envelope(j.value("envelope", std::string("cubic")));
  cfg.tie = parse_tie(j.value("tie", std::string("plateau")));
  cfg.mean_mode = parse_mean(j.value("mean_mode", std::string("2k")));
  cfg.k_max = j.value("k_max", cfg.k_max);
  cfg.window_margin = j.value("window_margin", cfg.window_margin);
  cfg.welch_segment = j.value("welch_segment", cfg.welch_segment);
  cfg.welch_overlap = j.value("welch_overlap", cfg.welch_overlap);
  cfg.sample_rate = j.value("sample_rate", cfg.sample_rate);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.samples = j.value("samples", cfg.samples);
  cfg.preset = j.value("preset", cfg.preset);
  return cfg;
}

LoadedCsv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("read_csv: cannot open '" + path + "'");

  LoadedCsv out;
  std::vector<std::vector<double>> columns;
  std::vector<std::vector<std::int64_t>> raw_columns;
  bool saw_header = false;
  std::size_t row_number = 0;
  std::string line;
  bool any_data = false;

  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind(kConfigPrefix, 0) == 0) {
        out.config = RunConfig::from_json(line.substr(std::string(kConfigPrefix).size()));
        out.fixed_format = out.config->path == ArithPath::fixed;
        out.sample_rate = out.config->sample_rate;
      }
      continue;
    }

    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.empty()) continue;

    if (!any_data) {
      // Header row detection: any cell that does not parse as a number.
      bool numeric = true;
      for (const auto& c : cells) {
        try {
          std::size_t used = 0;
          (void)std::stod(c, &used);
          while (used < c.size() && std::isspace(static_cast<unsigned char>(c[used]))) ++used;
          if (used != c.size()) numeric = false;
        } catch (const std::exception&) {
          numeric = false;
        }
      }
      if (!numeric && !saw_header) {
        saw_header = true;
        columns.assign(cells.size(), {});
        raw_columns.assign(cells.size(), {});
        continue;
      }
    }
    if (columns.empty()) {
      columns.assign(cells.size(), {});
      raw_columns.assign(cells.size(), {});
    }
    if (cells.size() != columns.size())
      throw RaggedRows("read_csv: row " + std::to_string(row_number) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(columns.size()));

    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      std::int64_t raw = 0;
      try {
        std::size_t used = 0;
        v = std::stod(cells[c], &used);
        if (used == 0) throw ParseError("empty cell");
        if (out.fixed_format) raw = std::stoll(cells[c]);
      } catch (const std::exception&) {
        throw ParseError("read_csv: row " + std::to_string(row_number) + ", column " +
                         std::to_string(c + 1) + ": cannot parse '" + cells[c] + "'");
      }
      if (!std::isfinite(v))
        throw ParseError("read_csv: row " + std::to_string(row_number) + ", column " +
                         std::to_string(c + 1) + ": non-finite value");
      columns[c].push_back(v);
      raw_columns[c].push_back(raw);
    }
    any_data = true;
  }

  if (!any_data || columns.size() < 2)
    throw ParseError("read_csv: '" + path + "' holds no usable data rows");

  // First column is time; remaining columns are channels.
  if (out.sample_rate <= 0.0) out.sample_rate = 1.0;
  if (!out.config && columns[0].size() >= 2) {
    const double dt = columns[0][1] - columns[0][0];
    if (dt > 0.0) out.sample_rate = 1.0 / dt;
  }
  for (std::size_t c = 1; c < columns.size(); ++c) {
    if (out.fixed_format) {
      std::vector<std::int32_t> raws(raw_columns[c].size());
      std::vector<double> values(raw_columns[c].size());
      for (std::size_t i = 0; i < raws.size(); ++i) {
        raws[i] = static_cast<std::int32_t>(raw_columns[c][i]);
        values[i] = static_cast<double>(raws[i]) / 256.0;
      }
      out.raws.push_back(std::move(raws));
      out.channels.push_back(std::move(values));
    } else {
      out.channels.push_back(std::move(columns[c]));
    }
  }
  return out;
}

void write_signal_csv(const std::string& path, const MvSignal<RealPath>& x, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw ParseError("write_signal_csv: cannot open '" + path + "' for writing");
  out << kConfigPrefix << cfg.to_json() << '\n';
  out << 't';
  for (int ch = 0; ch < x.n_channels; ++ch) out << ",ch" << ch + 1;
  out << '\n';
  out.precision(17);
  for (std::int64_t t = 0; t < x.length; ++t) {
    out << static_cast<double>(t) / x.sample_rate;
    for (int ch = 0; ch < x.n_channels; ++ch) out << ',' << x.at(ch, t);
    out << '\n';
  }
}

void write_signal_csv(const std::string& path, const MvSignal<FixedPath>& x, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw ParseError("write_signal_csv: cannot open '" + path + "' for writing");
  out << kConfigPrefix << cfg.to_json() << '\n';
  out << 't';
  for (int ch = 0; ch < x.n_channels; ++ch) out << ",ch" << ch + 1;
  out << '\n';
  for (std::int64_t t = 0; t < x.length; ++t) {
    out << t;
    for (int ch = 0; ch < x.n_channels; ++ch) out << ',' << x.at(ch, t).raw();
    out << '\n';
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ParseError("write_text_file: cannot open '" + path + "' for writing");
  out << content;
}

}  // namespace memd

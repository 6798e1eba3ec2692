#pragma once

// Command implementations shared by the CLI and the test suites:
// decomposition with artifact output, threshold validation against preset
// ground truth, the streaming-vs-batch equivalence check, and the
// throughput benchmark.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "memd/analysis.hpp"
#include "memd/csv_io.hpp"
#include "memd/synth.hpp"

namespace memd {

struct RunInput {
  std::vector<std::vector<double>> channels;
  double sample_rate = 1.0;
  std::optional<PresetSignal> preset;
};

// Loads the preset or CSV named by the config/path pair and fills in the
// channel count, rate and length of `cfg`. Exactly one of cfg.preset and
// input_path must be set.
RunInput resolve_input(RunConfig& cfg, const std::string& input_path);

// Exit code 0; writes one CSV per IMF, the residue, and config.json.
// `export_dirs`, when nonempty, additionally writes the direction set as CSV
// so the run is replayable against other implementations.
int cmd_decompose(RunConfig cfg, const std::string& input_path, const std::string& out_dir,
                  std::ostream& log, const std::string& export_dirs = "");

struct ValidationOutcome {
  bool passed = true;
  RunConfig resolved;  // config after preset/file resolution
  CorrelationReport table;                                  // preset runs only
  std::vector<std::vector<ImfChannelReport>> conditions;    // per IMF, per channel
  std::vector<std::string> failures;
  std::string text;                                         // human-readable report
};

ValidationOutcome run_validate(RunConfig cfg, const std::string& input_path, std::ostream& log);
// Exit code 1 on threshold failure; writes correlation_table.csv and
// imf_conditions.txt when out_dir is nonempty.
int cmd_validate(RunConfig cfg, const std::string& input_path, const std::string& out_dir,
                 std::ostream& log);

struct StreamOutcome {
  bool exact_everywhere = false;
  bool exact_interior = false;
  std::int64_t interior_begin = 0;
  std::int64_t interior_end = 0;
  std::int64_t interior_mismatches = 0;
  double max_abs_deviation = 0.0;  // over the whole record, all outputs
  std::size_t peak_buffered = 0;
  bool reconstruction_ok = false;
};

StreamOutcome run_stream_check(RunConfig cfg, const std::string& input_path, std::ostream& log);
int cmd_stream(RunConfig cfg, const std::string& input_path, std::ostream& log);

struct BenchOutcome {
  int repetitions = 0;
  std::int64_t samples = 0;
  double real_samples_per_s_per_channel = 0.0;
  double fixed_samples_per_s_per_channel = 0.0;
  std::vector<double> real_stage_seconds;   // mean per stage
  std::vector<double> fixed_stage_seconds;
};

BenchOutcome run_bench(RunConfig cfg, const std::string& input_path, int repetitions,
                       std::ostream& log);
int cmd_bench(RunConfig cfg, const std::string& input_path, int repetitions, std::ostream& log);

// argv-level entry point used by the `memd` binary: subcommands decompose,
// validate, stream, bench. Usage errors exit 2, threshold failures exit 1.
int run_cli(int argc, const char* const* argv);

}  // namespace memd

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "memd/driver.hpp"

namespace memd {

namespace {

struct CliOptions {
  RunConfig cfg;
  std::string input;
  std::string out_dir = "memd_out";
  std::string path_name = "real";
  std::string envelope_name = "cubic";
  std::string tie_name = "plateau";
  std::string mean_name = "2k";
  std::string export_dirs;
  int repetitions = 10;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--input", opt.input, "input CSV (first column time, then channels)");
  cmd->add_option("--preset", opt.cfg.preset,
                  "synthetic preset: paper-quadtone or alpha-surrogate");
  cmd->add_option("--imfs", opt.cfg.imfs, "IMF stages")->check(CLI::PositiveNumber);
  cmd->add_option("--dirs", opt.cfg.directions, "projection directions")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--siftings", opt.cfg.siftings, "sifting iterations per IMF")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--path", opt.path_name, "arithmetic path: fixed or real")
      ->check(CLI::IsMember({"fixed", "real"}));
  cmd->add_option("--envelope", opt.envelope_name, "envelope mode: cubic or linear")
      ->check(CLI::IsMember({"cubic", "linear"}));
  cmd->add_option("--tie", opt.tie_name, "extrema tie policy: plateau or strict-first")
      ->check(CLI::IsMember({"plateau", "strict-first"}));
  cmd->add_option("--mean-mode", opt.mean_name, "local mean: 2k envelopes or k upper envelopes")
      ->check(CLI::IsMember({"2k", "k"}));
  cmd->add_option("--kmax", opt.cfg.k_max, "streaming lookahead cap in samples (256 = preset-dependent default)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--window", opt.cfg.window_margin,
                  "envelope window margin in knots (0 = bare three-knot window)")
      ->check(CLI::Range(0, 8));
  cmd->add_option("--seed", opt.cfg.seed, "preset noise seed");
  cmd->add_option("--psd-segment", opt.cfg.welch_segment, "Welch segment length (power of two)");
  cmd->add_option("--psd-overlap", opt.cfg.welch_overlap, "Welch overlap fraction")
      ->check(CLI::Range(0.0, 0.99));
  cmd->add_option("--samples", opt.cfg.samples, "preset length in samples (0 = preset default)")
      ->check(CLI::NonNegativeNumber);
}

void finish_options(CliOptions& opt) {
  opt.cfg.path = opt.path_name == "fixed" ? ArithPath::fixed : ArithPath::real;
  opt.cfg.envelope = opt.envelope_name == "linear" ? EnvelopeMode::linear : EnvelopeMode::cubic;
  opt.cfg.tie = opt.tie_name == "strict-first" ? TiePolicy::strict_first : TiePolicy::plateau;
  opt.cfg.mean_mode = opt.mean_name == "k" ? MeanMode::directions_k : MeanMode::envelopes_2k;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"streaming multivariate empirical mode decomposition"};
  app.require_subcommand(1);

  CliOptions opt;
  CLI::App* decompose = app.add_subcommand("decompose", "decompose a signal into IMFs + residue");
  add_common_flags(decompose, opt);
  decompose->add_option("--out-dir", opt.out_dir, "artifact directory");
  decompose->add_option("--export-dirs", opt.export_dirs,
                        "also write the direction vectors to this CSV");

  CLI::App* validate = app.add_subcommand("validate", "decompose and check quality thresholds");
  add_common_flags(validate, opt);
  validate->add_option("--out-dir", opt.out_dir, "artifact directory");

  CLI::App* stream = app.add_subcommand("stream", "replay sample-by-sample and compare with batch");
  add_common_flags(stream, opt);

  CLI::App* bench = app.add_subcommand("bench", "measure decomposition throughput on both paths");
  add_common_flags(bench, opt);
  bench->add_option("--reps", opt.repetitions, "timed repetitions")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints usage/help
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  finish_options(opt);
  try {
    if (app.got_subcommand(decompose))
      return cmd_decompose(opt.cfg, opt.input, opt.out_dir, std::cout, opt.export_dirs);
    if (app.got_subcommand(validate))
      return cmd_validate(opt.cfg, opt.input, opt.out_dir, std::cout);
    if (app.got_subcommand(stream)) return cmd_stream(opt.cfg, opt.input, std::cout);
    if (app.got_subcommand(bench))
      return cmd_bench(opt.cfg, opt.input, opt.repetitions, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace memd

#include "memd/driver.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "memd/decomposer.hpp"

namespace memd {

namespace {

// Correlation thresholds for the quad-tone validation: rows where the tone
// was mixed into the channel must recover it nearly intact, the remaining
// cells must stay near zero.
constexpr double kPresentThreshold = 0.90;
constexpr double kAbsentThreshold = 0.35;
constexpr double kAlphaBandLo = 8.0;
constexpr double kAlphaBandHi = 15.0;
constexpr double kAlphaBurstRatio = 3.0;

template <class F>
auto dispatch_path(ArithPath path, F&& f) {
  return path == ArithPath::fixed ? f(FixedPath{}) : f(RealPath{});
}

template <class P>
ImfStack<P> run_decomposition(const RunConfig& cfg, const RunInput& in,
                              std::vector<double>* stage_seconds = nullptr) {
  const MvSignal<P> x = signal_from_real<P>(in.channels, in.sample_rate);
  const DirectionSet dirs(cfg.channels, cfg.directions);
  return decompose(x, cfg.imfs, dirs, cfg.sift(), stage_seconds);
}

std::vector<std::vector<std::vector<double>>> stack_to_real(const RunConfig& cfg,
                                                            const RunInput& in) {
  return dispatch_path(cfg.path, [&](auto path) {
    using P = decltype(path);
    fixed::Context ctx;
    fixed::ContextScope scope(ctx);
    const ImfStack<P> stack = run_decomposition<P>(cfg, in);
    std::vector<std::vector<std::vector<double>>> out;
    out.reserve(stack.imfs.size() + 1);
    for (const auto& imf : stack.imfs) out.push_back(signal_to_real(imf));
    out.push_back(signal_to_real(stack.residue));
    return out;
  });
}

}  // namespace

RunInput resolve_input(RunConfig& cfg, const std::string& input_path) {
  if (!cfg.preset.empty() && !input_path.empty())
    throw ConfigError("give either a preset or an input file, not both");
  RunInput in;
  if (!cfg.preset.empty()) {
    auto preset = make_preset(cfg.preset, cfg.samples, cfg.seed);
    if (!preset) throw ConfigError("unknown preset '" + cfg.preset + "'");
    in.channels = preset->channels;
    in.sample_rate = preset->sample_rate;
    if (cfg.k_max == 256) cfg.k_max = preset->recommended_k_max;
    in.preset = std::move(*preset);
  } else if (!input_path.empty()) {
    LoadedCsv loaded = read_csv(input_path);
    in.channels = std::move(loaded.channels);
    in.sample_rate = loaded.sample_rate;
  } else {
    throw ConfigError("no input: set --preset or --input");
  }
  cfg.channels = static_cast<int>(in.channels.size());
  cfg.sample_rate = in.sample_rate;
  cfg.samples = static_cast<std::int64_t>(in.channels.front().size());
  return in;
}

int cmd_decompose(RunConfig cfg, const std::string& input_path, const std::string& out_dir,
                  std::ostream& log, const std::string& export_dirs) {
  const RunInput in = resolve_input(cfg, input_path);
  std::filesystem::create_directories(out_dir);
  if (!export_dirs.empty()) {
    DirectionSet(cfg.channels, cfg.directions).write_csv(export_dirs);
    log << "direction set written to " << export_dirs << "\n";
  }

  dispatch_path(cfg.path, [&](auto path) {
    using P = decltype(path);
    fixed::Context ctx;
    fixed::ContextScope scope(ctx);
    const ImfStack<P> stack = run_decomposition<P>(cfg, in);
    for (std::size_t j = 0; j < stack.imfs.size(); ++j) {
      const std::string name = out_dir + "/imf_" + std::to_string(j + 1) + ".csv";
      write_signal_csv(name, stack.imfs[j], cfg);
    }
    write_signal_csv(out_dir + "/residue.csv", stack.residue, cfg);
    log << "decomposed " << cfg.samples << " samples x " << cfg.channels << " channels into "
        << stack.actual_imfs << " IMFs (+" << (cfg.imfs - stack.actual_imfs)
        << " zero-padded) and residue\n";
    if (ctx.saturations != 0)
      log << "warning: " << ctx.saturations << " fixed-point saturation events\n";
    return 0;
  });
  write_text_file(out_dir + "/config.json", cfg.to_json() + "\n");
  log << "artifacts in " << out_dir << "\n";
  return 0;
}

namespace {

ValidationOutcome validate_quadtone(const RunConfig& cfg, const RunInput& in) {
  ValidationOutcome out;
  const PresetSignal& preset = *in.preset;
  const auto parts = stack_to_real(cfg, in);
  const std::size_t rows = preset.tone_frequencies.size();
  const std::size_t channels = in.channels.size();

  out.table.row_labels.reserve(rows);
  out.table.values.assign(rows, std::vector<double>(channels, 0.0));
  for (std::size_t r = 0; r < rows; ++r) {
    std::ostringstream label;
    label << "imf" << r + 1 << "_vs_" << preset.tone_frequencies[r] / 1e3 << "kHz";
    out.table.row_labels.push_back(label.str());
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const double corr = pearson_corr(parts[r][ch], preset.row_tones[r]);
      out.table.values[r][ch] = corr;
      const bool present = preset.tone_present[r][ch];
      if (present && corr < kPresentThreshold) {
        std::ostringstream f;
        f << "imf" << r + 1 << " ch" << ch + 1 << ": correlation " << corr << " below "
          << kPresentThreshold;
        out.failures.push_back(f.str());
      } else if (!present && std::abs(corr) > kAbsentThreshold) {
        std::ostringstream f;
        f << "imf" << r + 1 << " ch" << ch + 1 << ": stray correlation " << corr << " above "
          << kAbsentThreshold;
        out.failures.push_back(f.str());
      }
    }
  }

  for (std::size_t r = 0; r < rows; ++r) {
    out.conditions.push_back(imf_condition_check(parts[r]));
    for (const auto& report : out.conditions.back()) {
      // The count balance is enforced where the IMF carries its tone; the
      // near-zero leakage channels are reported but cannot satisfy it.
      if (!preset.tone_present[r][static_cast<std::size_t>(report.channel)]) continue;
      if (!report.condition_one()) {
        std::ostringstream f;
        f << "imf" << r + 1 << " ch" << report.channel + 1 << ": |extrema - zero crossings| = "
          << report.difference;
        out.failures.push_back(f.str());
      }
    }
  }
  return out;
}

ValidationOutcome validate_alpha(const RunConfig& cfg, const RunInput& in) {
  ValidationOutcome out;
  const WelchParams welch{cfg.welch_segment, cfg.welch_overlap};
  const auto parts = stack_to_real(cfg, in);
  const std::size_t channels = in.channels.size();
  const std::size_t rows = parts.size() - 1;  // drop the residue
  const std::int64_t half = cfg.samples / 2;

  int in_band = -1;
  out.table.values.assign(rows, std::vector<double>(1, 0.0));
  for (std::size_t r = 0; r < rows; ++r) {
    out.table.row_labels.push_back("imf" + std::to_string(r + 1) + "_peak_hz");
    // Mode alignment lets the channel-averaged PSD stand for the IMF.
    std::vector<double> mean_power;
    std::vector<double> freqs;
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const PsdEstimate psd = psd_welch(parts[r][ch], cfg.sample_rate, welch);
      if (mean_power.empty()) {
        mean_power.assign(psd.power.size(), 0.0);
        freqs = psd.frequency;
      }
      for (std::size_t i = 0; i < psd.power.size(); ++i) mean_power[i] += psd.power[i];
    }
    std::size_t peak = 0;
    for (std::size_t i = 1; i < mean_power.size(); ++i)
      if (mean_power[i] > mean_power[peak]) peak = i;
    const double peak_hz = freqs[peak];
    out.table.values[r][0] = peak_hz;
    if (peak_hz >= kAlphaBandLo && peak_hz <= kAlphaBandHi) {
      if (in_band >= 0)
        out.failures.push_back("more than one IMF peaks inside the alpha band");
      in_band = static_cast<int>(r);
    }
  }
  if (in_band < 0) {
    out.failures.push_back("no IMF peaks inside the alpha band");
  } else {
    double active = 0.0, inactive = 0.0;
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const auto& x = parts[static_cast<std::size_t>(in_band)][ch];
      const std::vector<double> first(x.begin(), x.begin() + half);
      const std::vector<double> second(x.begin() + half, x.end());
      active += psd_welch(first, cfg.sample_rate, welch).band_power(kAlphaBandLo, kAlphaBandHi);
      inactive += psd_welch(second, cfg.sample_rate, welch).band_power(kAlphaBandLo, kAlphaBandHi);
    }
    if (!(active >= kAlphaBurstRatio * inactive)) {
      std::ostringstream f;
      f << "alpha-band power ratio " << (inactive > 0.0 ? active / inactive : 0.0) << " below "
        << kAlphaBurstRatio;
      out.failures.push_back(f.str());
    }
  }
  return out;
}

double rms(const std::vector<double>& x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return std::sqrt(sum / static_cast<double>(x.size()));
}

ValidationOutcome validate_generic(const RunConfig& cfg, const RunInput& in) {
  ValidationOutcome out;
  const auto parts = stack_to_real(cfg, in);
  for (std::size_t r = 0; r + 1 < parts.size(); ++r) {
    out.conditions.push_back(imf_condition_check(parts[r]));
    for (const auto& report : out.conditions.back()) {
      // Enforce the count balance only where the IMF carries real energy;
      // trace-level components are reported but not gated.
      const std::size_t ch = static_cast<std::size_t>(report.channel);
      if (rms(parts[r][ch]) < 0.01 * rms(in.channels[ch])) continue;
      if (!report.condition_one()) {
        std::ostringstream f;
        f << "imf" << r + 1 << " ch" << report.channel + 1 << ": |extrema - zero crossings| = "
          << report.difference;
        out.failures.push_back(f.str());
      }
    }
  }
  return out;
}

}  // namespace

ValidationOutcome run_validate(RunConfig cfg, const std::string& input_path, std::ostream& log) {
  const RunInput in = resolve_input(cfg, input_path);
  ValidationOutcome out;
  if (in.preset && in.preset->name == "paper-quadtone") {
    out = validate_quadtone(cfg, in);
  } else if (in.preset && in.preset->name == "alpha-surrogate") {
    out = validate_alpha(cfg, in);
  } else {
    out = validate_generic(cfg, in);
  }
  out.resolved = cfg;
  out.passed = out.failures.empty();

  std::ostringstream text;
  if (!out.table.values.empty()) text << out.table.to_text();
  for (std::size_t r = 0; r < out.conditions.size(); ++r)
    for (const auto& rep : out.conditions[r])
      text << "imf" << r + 1 << " ch" << rep.channel + 1 << ": extrema " << rep.extrema
           << ", zero crossings " << rep.zero_crossings << ", |diff| " << rep.difference << "\n";
  for (const auto& f : out.failures) text << "FAIL " << f << "\n";
  text << (out.passed ? "validation passed\n" : "validation failed\n");
  out.text = text.str();
  log << out.text;
  return out;
}

int cmd_validate(RunConfig cfg, const std::string& input_path, const std::string& out_dir,
                 std::ostream& log) {
  const ValidationOutcome out = run_validate(std::move(cfg), input_path, log);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::string config_line = "# memd-config " + out.resolved.to_json() + "\n";
    if (!out.table.values.empty())
      write_text_file(out_dir + "/correlation_table.csv", config_line + out.table.to_csv());
    write_text_file(out_dir + "/imf_conditions.txt", config_line + out.text);
    write_text_file(out_dir + "/config.json", out.resolved.to_json() + "\n");
  }
  return out.passed ? 0 : 1;
}

StreamOutcome run_stream_check(RunConfig cfg, const std::string& input_path, std::ostream& log) {
  const RunInput in = resolve_input(cfg, input_path);
  return dispatch_path(cfg.path, [&](auto path) {
    using P = decltype(path);
    using Scalar = typename P::Scalar;
    fixed::Context ctx;
    fixed::ContextScope scope(ctx);

    const MvSignal<P> x = signal_from_real<P>(in.channels, in.sample_rate);
    const DirectionSet dirs(cfg.channels, cfg.directions);
    const SiftConfig sift = cfg.sift();
    const ImfStack<P> batch = decompose(x, cfg.imfs, dirs, sift);

    MemdStream<P> stream(cfg.channels, cfg.imfs, dirs, sift);
    std::vector<typename MemdStream<P>::Emission> emissions;
    StreamOutcome out;
    std::vector<Scalar> sample(static_cast<std::size_t>(cfg.channels));
    for (std::int64_t t = 0; t < x.length; ++t) {
      for (int ch = 0; ch < cfg.channels; ++ch) sample[static_cast<std::size_t>(ch)] = x.at(ch, t);
      auto emitted = stream.push(sample);
      out.peak_buffered = std::max(out.peak_buffered, stream.buffered_sample_vectors());
      emissions.insert(emissions.end(), std::make_move_iterator(emitted.begin()),
                       std::make_move_iterator(emitted.end()));
    }
    auto tail = stream.flush();
    emissions.insert(emissions.end(), std::make_move_iterator(tail.begin()),
                     std::make_move_iterator(tail.end()));

    const ImfStack<P> streamed =
        collect_stream<P>(emissions, cfg.channels, x.length, cfg.imfs, in.sample_rate, sift);

    out.interior_begin = std::min<std::int64_t>(cfg.k_max, x.length);
    out.interior_end = std::max<std::int64_t>(out.interior_begin, x.length - cfg.k_max);
    out.exact_everywhere = true;
    auto compare = [&](const MvSignal<P>& a, const MvSignal<P>& b) {
      for (int ch = 0; ch < cfg.channels; ++ch)
        for (std::int64_t t = 0; t < x.length; ++t) {
          const double da = P::to_real(a.at(ch, t));
          const double db = P::to_real(b.at(ch, t));
          if (!(a.at(ch, t) == b.at(ch, t))) {
            out.exact_everywhere = false;
            out.max_abs_deviation = std::max(out.max_abs_deviation, std::abs(da - db));
            if (t >= out.interior_begin && t < out.interior_end) ++out.interior_mismatches;
          }
        }
    };
    for (int j = 0; j < cfg.imfs; ++j) compare(batch.imfs[static_cast<std::size_t>(j)],
                                               streamed.imfs[static_cast<std::size_t>(j)]);
    compare(batch.residue, streamed.residue);
    out.exact_interior = out.interior_mismatches == 0;

    // Streamed reconstruction: sum of streamed IMFs plus residue vs input.
    out.reconstruction_ok = true;
    for (int ch = 0; ch < cfg.channels && out.reconstruction_ok; ++ch)
      for (std::int64_t t = 0; t < x.length; ++t) {
        typename P::Scalar sum = streamed.residue.at(ch, t);
        for (int j = 0; j < cfg.imfs; ++j) sum = sum + streamed.imfs[static_cast<std::size_t>(j)].at(ch, t);
        const double dev = std::abs(P::to_real(sum) - P::to_real(x.at(ch, t)));
        if (dev > (P::kIsFixed ? 0.0 : 1e-9)) {
          out.reconstruction_ok = false;
          break;
        }
      }

    log << "streamed " << x.length << " samples; interior [" << out.interior_begin << ", "
        << out.interior_end << ") match: " << (out.exact_interior ? "exact" : "MISMATCH") << "\n";
    if (out.exact_everywhere) log << "full-record match: exact\n";
    log << "peak buffered sample vectors: " << out.peak_buffered << "\n";
    return out;
  });
}

int cmd_stream(RunConfig cfg, const std::string& input_path, std::ostream& log) {
  const StreamOutcome out = run_stream_check(std::move(cfg), input_path, log);
  return out.exact_interior && out.reconstruction_ok ? 0 : 1;
}

BenchOutcome run_bench(RunConfig cfg, const std::string& input_path, int repetitions,
                       std::ostream& log) {
  if (repetitions < 1) throw ConfigError("bench: need at least one repetition");
  const RunInput in = resolve_input(cfg, input_path);
  BenchOutcome out;
  out.repetitions = repetitions;
  out.samples = cfg.samples;

  auto bench_path = [&](ArithPath path, std::vector<double>& stage_means) {
    RunConfig run = cfg;
    run.path = path;
    return dispatch_path(path, [&](auto tag) {
      using P = decltype(tag);
      fixed::Context ctx;
      fixed::ContextScope scope(ctx);
      const MvSignal<P> x = signal_from_real<P>(in.channels, in.sample_rate);
      const DirectionSet dirs(run.channels, run.directions);
      const SiftConfig sift = run.sift();
      std::vector<double> stage_seconds;
      (void)decompose(x, run.imfs, dirs, sift, &stage_seconds);  // warmup
      stage_means.assign(stage_seconds.size(), 0.0);
      const auto start = std::chrono::steady_clock::now();
      for (int r = 0; r < repetitions; ++r) {
        (void)decompose(x, run.imfs, dirs, sift, &stage_seconds);
        for (std::size_t s = 0; s < stage_seconds.size(); ++s) stage_means[s] += stage_seconds[s];
      }
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (double& s : stage_means) s /= repetitions;
      return static_cast<double>(x.length) * repetitions / elapsed;
    });
  };

  out.real_samples_per_s_per_channel = bench_path(ArithPath::real, out.real_stage_seconds);
  out.fixed_samples_per_s_per_channel = bench_path(ArithPath::fixed, out.fixed_stage_seconds);

  log << "bench: " << out.samples << " samples x " << cfg.channels << " channels, "
      << repetitions << " repetitions (+1 warmup)\n";
  auto report = [&](const char* name, double rate, const std::vector<double>& stages) {
    log << "  " << name << " path: " << static_cast<std::int64_t>(rate)
        << " samples/s/channel\n";
    for (std::size_t s = 0; s < stages.size(); ++s)
      log << "    stage " << s + 1 << ": " << stages[s] * 1e3 << " ms\n";
  };
  report("real", out.real_samples_per_s_per_channel, out.real_stage_seconds);
  report("fixed", out.fixed_samples_per_s_per_channel, out.fixed_stage_seconds);
  return out;
}

int cmd_bench(RunConfig cfg, const std::string& input_path, int repetitions, std::ostream& log) {
  (void)run_bench(std::move(cfg), input_path, repetitions, log);
  return 0;
}

}  // namespace memd

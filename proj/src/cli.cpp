#include "thermotrack/cli.hpp"

#include "thermotrack/config.hpp"
#include "thermotrack/data.hpp"
#include "thermotrack/eval.hpp"
#include "thermotrack/log.hpp"
#include "thermotrack/translate.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <thread>

namespace thermotrack {
namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCategory::io, "write failed: " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::io, "cannot create " + dir.string() + ": " + ec.message());
}

RunConfig load_config(const std::string& path) { return path.empty() ? RunConfig{} : parse_config(path); }

// Effective settings plus the version, written next to every output.
void write_provenance(const fs::path& dir, const RunConfig& config, const std::string& extra = {}) {
  write_text(dir / "effective_config.ini",
             std::string("# thermotrack ") + THERMOTRACK_VERSION + "\n" + extra + format_config(config));
}

struct TrackArgs {
  std::string sequence, config, out;
};

void track(const TrackArgs& a, std::ostream& out) {
  const RunConfig config = load_config(a.config);
  const Sequence seq = load_sequence(a.sequence);
  EcoTracker tracker(config.tracker);
  make_dir(a.out);

  std::string trajectory;
  double overlap = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    BoundingBox box = seq.groundtruth[0];
    if (t == 0) {
      tracker.start(seq.frame(0), box, nullptr);
    } else {
      box = tracker.update(seq.frame(t));
    }
    overlap += iou(box, seq.groundtruth[t]);
    trajectory += format_trajectory_line(box) + "\n";
  }
  write_text(fs::path(a.out) / "trajectory.txt", trajectory);
  write_provenance(a.out, config);
  out << "frames " << seq.size() << " mean_iou " << fixed6(overlap / seq.size()) << "\n";
}

struct EvalArgs {
  std::string dataset, protocol, report, config;
  int jobs = 0;
};

void eval(const EvalArgs& a, std::ostream& out) {
  RunConfig config = load_config(a.config);
  if (!a.protocol.empty()) config.protocol = parse_protocol(a.protocol);
  const std::vector<Sequence> sequences = load_dataset(DatasetManifest::scan(a.dataset));
  const TrackerFactory factory = [&config] { return std::make_unique<EcoTracker>(config.tracker); };
  const int jobs = a.jobs > 0 ? a.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  EvalReport report;
  report.burn_in = config.vot.burn_in;
  if (config.protocol != ProtocolChoice::ope) {
    report.vot = evaluate(factory, sequences, Protocol::vot, config.vot, jobs);
    const auto interval =
        config.eao_low > 0 ? std::pair<int, int>{config.eao_low, config.eao_high} : default_eao_interval(report.vot);
    report.eao_curve = eao(report.vot, interval);
    report.attributes = attribute_breakdown(report.vot, sequences, interval);
    out << "accuracy " << fixed6(accuracy(report.vot, report.burn_in)) << " robustness "
        << fixed6(robustness(report.vot)) << " eao " << fixed6(report.eao_curve->eao) << "\n";
  }
  if (config.protocol != ProtocolChoice::vot) {
    report.ope = evaluate(factory, sequences, Protocol::ope, config.vot, jobs);
    report.success = ope_success(report.ope);
    out << "auc " << fixed6(report.success->auc) << "\n";
  }
  write_report(a.report, report);
  write_provenance(a.report, config);
}

struct SynthArgs {
  std::string out, suite, config;
  int count = 0;
  std::optional<std::uint64_t> seed;
};

void synth(const SynthArgs& a, std::ostream& out) {
  RunConfig config = load_config(a.config);
  if (a.seed) config.seed = *a.seed;
  make_dir(a.out);
  if (a.suite.empty()) {
    SynthSpec spec = config.synth;
    spec.name = fs::path(a.out).filename().string();
    spec.seed = config.seed;
    const Sequence seq = synth_sequence(spec, a.out);
    write_provenance(a.out, config);
    out << "wrote " << seq.size() << " frames to " << a.out << "\n";
    return;
  }
  std::vector<SynthSpec> specs;
  if (a.suite == "easy") {
    const int count = a.count > 0 ? a.count : 5;
    specs = a.seed ? easy_suite(count, *a.seed) : easy_suite(count);
  } else {
    const int count = a.count > 0 ? a.count : 10;
    specs = a.seed ? low_contrast_suite(count, *a.seed) : low_contrast_suite(count);
  }
  std::string list;
  for (const auto& spec : specs) {
    synth_sequence(spec, fs::path(a.out) / spec.name);
    list += spec.name + "\n";
  }
  write_text(fs::path(a.out) / "list.txt", list);
  write_provenance(a.out, config, "# suite " + a.suite + "\n");
  out << "wrote " << specs.size() << " sequences to " << a.out << "\n";
}

struct StatsArgs {
  std::vector<std::string> images;
  std::string out;
  int bins = 64;
  double low = 0.0, high = 64.0;
  int pseudo_tir_radius = -1;
};

void stats(const StatsArgs& a, std::ostream& out) {
  std::vector<Frame> frames;
  for (const auto& dir : a.images)
    for (const auto& path : list_images(dir)) {
      const Frame f = read_image(path);
      frames.push_back(a.pseudo_tir_radius >= 0 ? pseudo_tir(f, a.pseudo_tir_radius) : f);
    }
  const Histogram h = grad_histogram(frames, a.bins, a.low, a.high);
  make_dir(a.out);
  std::ofstream csv(fs::path(a.out) / "histogram.csv", std::ios::binary);
  if (!csv) throw Error(ErrorCategory::io, "cannot write " + (fs::path(a.out) / "histogram.csv").string());
  h.write_csv(csv);
  write_provenance(a.out, RunConfig{},
                   "# stats bins " + std::to_string(a.bins) + " range " + fixed6(a.low) + " " + fixed6(a.high) +
                       " pseudo_tir " + std::to_string(a.pseudo_tir_radius) + "\n");
  out << "images " << frames.size() << " pixels " << h.pixels << "\n";
}

struct ScoreArgs {
  std::string pred, ref, out;
};

void translate_score(const ScoreArgs& a, std::ostream& out) {
  auto load = [](const std::string& dir) {
    Batch frames;
    for (const auto& path : list_images(dir)) frames.push_back(read_image(path));
    if (frames.empty()) throw Error(ErrorCategory::data, "no images in " + dir);
    return frames;
  };
  const TranslationDistance d = translation_distance(load(a.pred), load(a.ref));
  make_dir(a.out);
  write_text(fs::path(a.out) / "distance.txt", "distance=" + fixed6(d.mean) + "\n");
  std::string csv = "frame,distance\n";
  for (std::size_t i = 0; i < d.per_frame.size(); ++i) csv += std::to_string(i + 1) + "," + fixed6(d.per_frame[i]) + "\n";
  write_text(fs::path(a.out) / "per_frame.csv", csv);
  write_provenance(a.out, RunConfig{});
  out << "distance=" << fixed6(d.mean) << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Correlation-filter tracking, evaluation and dataset tools for thermal-style video", "thermotrack"};
  app.require_subcommand(1);
  app.set_version_flag("--version", THERMOTRACK_VERSION);

  TrackArgs track_args;
  auto* track_cmd = app.add_subcommand("track", "Track one sequence from its first ground-truth box");
  track_cmd->add_option("--sequence", track_args.sequence, "Sequence directory")->required()->check(CLI::ExistingDirectory);
  track_cmd->add_option("--config", track_args.config, "Configuration file")->check(CLI::ExistingFile);
  track_cmd->add_option("--out", track_args.out, "Output directory")->required();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate the tracker on a dataset");
  eval_cmd->add_option("--dataset", eval_args.dataset, "Dataset root")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--protocol", eval_args.protocol, "vot, ope or both (default from config)")
      ->check(CLI::IsMember({"vot", "ope", "both"}));
  eval_cmd->add_option("--report", eval_args.report, "Report directory")->required();
  eval_cmd->add_option("--config", eval_args.config, "Configuration file")->check(CLI::ExistingFile);
  eval_cmd->add_option("--jobs", eval_args.jobs, "Worker threads (default: logical CPUs)")->check(CLI::NonNegativeNumber);

  SynthArgs synth_args;
  std::uint64_t seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic sequence or benchmark suite");
  synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();
  synth_cmd->add_option("--suite", synth_args.suite, "easy or low-contrast")->check(CLI::IsMember({"easy", "low-contrast"}));
  synth_cmd->add_option("--count", synth_args.count, "Sequences in the suite")->check(CLI::PositiveNumber);
  auto* seed_opt = synth_cmd->add_option("--seed", seed, "Random seed");
  synth_cmd->add_option("--config", synth_args.config, "Configuration file")->check(CLI::ExistingFile);

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("stats", "Gradient-magnitude histogram of image directories");
  stats_cmd->add_option("--images", stats_args.images, "Image directory (repeatable)")->required()->check(CLI::ExistingDirectory);
  stats_cmd->add_option("--out", stats_args.out, "Output directory")->required();
  stats_cmd->add_option("--bins", stats_args.bins, "Bin count")->capture_default_str();
  stats_cmd->add_option("--low", stats_args.low, "Lower edge")->capture_default_str();
  stats_cmd->add_option("--high", stats_args.high, "Upper edge")->capture_default_str();
  stats_cmd->add_option("--pseudo-tir", stats_args.pseudo_tir_radius,
                        "Apply the pseudo-thermal translator with this blur radius first");

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("translate-score", "Distance between translated and reference frames");
  score_cmd->add_option("--pred", score_args.pred, "Translated frames")->required()->check(CLI::ExistingDirectory);
  score_cmd->add_option("--ref", score_args.ref, "Reference frames")->required()->check(CLI::ExistingDirectory);
  score_cmd->add_option("--out", score_args.out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help, --version
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    err << "usage: " << message << "\n" << app.help();
    return 2;
  }

  try {
    if (*track_cmd) track(track_args, out);
    if (*eval_cmd) eval(eval_args, out);
    if (*synth_cmd) {
      if (*seed_opt) synth_args.seed = seed;
      synth(synth_args, out);
    }
    if (*stats_cmd) stats(stats_args, out);
    if (*score_cmd) translate_score(score_args, out);
  } catch (const Error& e) {
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    err << to_string(e.category()) << ": " << message << "\n";
    return e.category() == ErrorCategory::usage ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "io: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "data: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace thermotrack

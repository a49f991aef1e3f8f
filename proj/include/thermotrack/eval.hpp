#pragma once

#include "thermotrack/core.hpp"
#include "thermotrack/tracker.hpp"

#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace thermotrack {

/// Overlap recorded for frames the tracker did not see after a failure.
inline constexpr double kSkipped = std::numeric_limits<double>::quiet_NaN();

struct VotOptions {
  /// A frame fails when its overlap is at or below this value.
  double failure_threshold = 0.0;
  /// The failure frame and the frames after it that are not tracked; the
  /// tracker restarts on frame failure + skip.
  int skip = 5;
  /// Frames from each re-initialization excluded from accuracy.
  int burn_in = 10;
};

/// One tracker pass over one sequence. Frame indices are 0-based; frame 0
/// initializes the tracker and scores overlap 1.
struct EvalRun {
  std::string sequence;
  std::vector<double> overlaps;
  std::vector<std::size_t> failures;
  std::vector<std::size_t> reinits;
  int skip = 5;

  std::size_t size() const { return overlaps.size(); }
  /// True for a failure frame and the untracked frames after it.
  bool skipped(std::size_t t) const;
};

/// Reset-based run: restarts from ground truth `skip` frames after each failure.
EvalRun run_vot(Tracker& tracker, const Sequence& seq, const VotOptions& options = {});

/// One pass without resets.
EvalRun run_ope(Tracker& tracker, const Sequence& seq);

/// Mean overlap over counted frames, averaged per sequence and then across
/// sequences. Runs with no counted frame are left out with a warning.
double accuracy(const std::vector<EvalRun>& runs, int burn_in = 10);

/// Mean failure count per sequence.
double robustness(const std::vector<EvalRun>& runs);

struct EAOCurve {
  std::vector<double> phi;  // phi[n - 1] is the expected overlap at length n
  int low = 1;
  int high = 1;
  double eao = 0.0;
  std::size_t segments = 0;
};

/// [100, 356] when the mean sequence length reaches 356, else
/// [ceil(0.1 L), ceil(0.5 L)] of the mean length L.
std::pair<int, int> default_eao_interval(const std::vector<EvalRun>& runs);

/// Expected average overlap over failure-free segments starting at frame 0
/// and at each re-initialization. Segments that end in a failure count as zero
/// past it; segments that reach the end of the sequence only enter lengths
/// they cover.
EAOCurve eao(const std::vector<EvalRun>& runs, std::pair<int, int> interval);

struct SuccessCurve {
  std::vector<double> thresholds;
  std::vector<double> success;
  double auc = 0.0;
};

std::vector<double> default_thresholds();

/// Fraction of frames with overlap strictly above each threshold; AUC is the
/// mean over thresholds.
SuccessCurve ope_success(const EvalRun& run, const std::vector<double>& thresholds = default_thresholds());

/// Per-sequence curves averaged pointwise.
SuccessCurve ope_success(const std::vector<EvalRun>& runs,
                         const std::vector<double>& thresholds = default_thresholds());

/// EAO restricted to segments of sequences carrying a sequence-level tag, or
/// to segments containing at least one frame with a frame-level tag. With an
/// empty `tags`, every tag present in the data is reported. Tags without any
/// segment are omitted with a warning.
std::map<std::string, EAOCurve> attribute_breakdown(const std::vector<EvalRun>& runs,
                                                    const std::vector<Sequence>& sequences,
                                                    std::pair<int, int> interval,
                                                    const std::vector<std::string>& tags = {});

using TrackerFactory = std::function<std::unique_ptr<Tracker>()>;

enum class Protocol { vot, ope };

/// Evaluates every sequence with a fresh tracker on up to `jobs` threads.
/// Results are in sequence order regardless of scheduling.
std::vector<EvalRun> evaluate(const TrackerFactory& factory, const std::vector<Sequence>& sequences,
                              Protocol protocol, const VotOptions& options = {}, int jobs = 1);

struct EvalReport {
  std::vector<EvalRun> vot;
  std::vector<EvalRun> ope;
  std::optional<EAOCurve> eao_curve;
  std::optional<SuccessCurve> success;
  std::map<std::string, EAOCurve> attributes;
  int burn_in = 10;
};

/// Writes report.json, eao_curve.csv, attributes.json and success_curve.csv
/// for whichever parts are present. Floats carry 6 decimals.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

}  // namespace thermotrack

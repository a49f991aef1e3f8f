#include "thermotrack/eval.hpp"

#include "thermotrack/log.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace thermotrack {
namespace {

struct Segment {
  std::size_t run = 0;
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last frame, failure frame included
  bool failed = false;
};

std::vector<Segment> segments_of(const EvalRun& run, std::size_t index) {
  std::vector<Segment> out;
  std::size_t begin = 0;
  std::size_t next_reinit = 0;
  for (std::size_t f : run.failures) {
    out.push_back({index, begin, f + 1, true});
    while (next_reinit < run.reinits.size() && run.reinits[next_reinit] <= f) ++next_reinit;
    if (next_reinit == run.reinits.size()) return out;
    begin = run.reinits[next_reinit];
  }
  out.push_back({index, begin, run.size(), false});
  return out;
}

void require_runs(const std::vector<EvalRun>& runs, const char* what) {
  if (runs.empty()) throw Error(ErrorCategory::data, std::string(what) + " of an empty run set");
}

EAOCurve eao_of_segments(const std::vector<EvalRun>& runs, const std::vector<Segment>& segments,
                         std::pair<int, int> interval) {
  if (segments.empty()) throw Error(ErrorCategory::data, "expected average overlap needs at least one segment");
  const auto [low, high] = interval;
  std::size_t longest = 0;
  for (const auto& run : runs) longest = std::max(longest, run.size());
  if (low < 1 || high < low || static_cast<std::size_t>(high) > longest)
    throw Error(ErrorCategory::config, "EAO interval [" + std::to_string(low) + ", " + std::to_string(high) +
                                           "] outside 1.." + std::to_string(longest));

  EAOCurve curve;
  curve.low = low;
  curve.high = high;
  curve.segments = segments.size();
  curve.phi.assign(longest, 0.0);
  std::vector<std::size_t> count(longest, 0);
  for (const Segment& s : segments) {
    const auto& ov = runs[s.run].overlaps;
    const std::size_t length = s.end - s.begin;
    // Running average of the first n frames; zeros past a failure.
    double sum = 0.0;
    for (std::size_t n = 1; n <= longest; ++n) {
      if (n <= length) {
        sum += ov[s.begin + n - 1];
      } else if (!s.failed) {
        break;
      }
      curve.phi[n - 1] += sum / n;
      ++count[n - 1];
    }
  }
  for (std::size_t n = 0; n < longest; ++n)
    if (count[n] > 0) curve.phi[n] /= count[n];

  double total = 0.0;
  for (int n = low; n <= high; ++n) total += curve.phi[n - 1];
  curve.eao = total / (high - low + 1);
  return curve;
}

Error at_frame(const Error& e, const std::string& sequence, std::size_t t) {
  return Error(e.category(), sequence + " frame " + std::to_string(t) + ": " + e.what());
}

}  // namespace

bool EvalRun::skipped(std::size_t t) const {
  for (std::size_t f : failures)
    if (t >= f && t < f + static_cast<std::size_t>(skip)) return true;
  return false;
}

EvalRun run_vot(Tracker& tracker, const Sequence& seq, const VotOptions& options) {
  if (options.skip < 1) throw Error(ErrorCategory::config, "VOT skip must be at least 1");
  if (options.burn_in < 0) throw Error(ErrorCategory::config, "VOT burn-in must be non-negative");
  seq.validate();
  EvalRun run;
  run.sequence = seq.name;
  run.skip = options.skip;
  run.overlaps.assign(seq.size(), kSkipped);

  std::optional<Frame> previous;
  bool running = false;
  std::size_t restart = 0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (!running && t < restart) continue;
    try {
      const Frame frame = seq.frame(t);
      if (!running) {
        if (!previous && t > 0) previous = seq.frame(t - 1);
        tracker.start(frame, seq.groundtruth[t], previous ? &*previous : nullptr);
        if (t > 0) run.reinits.push_back(t);
        run.overlaps[t] = 1.0;
        running = true;
      } else {
        const double o = iou(tracker.update(frame), seq.groundtruth[t]);
        run.overlaps[t] = o;
        if (o <= options.failure_threshold) {
          run.failures.push_back(t);
          running = false;
          restart = t + options.skip;
          previous.reset();
          continue;
        }
      }
      previous = frame;
    } catch (const Error& e) {
      throw at_frame(e, seq.name, t);
    }
  }
  return run;
}

EvalRun run_ope(Tracker& tracker, const Sequence& seq) {
  seq.validate();
  EvalRun run;
  run.sequence = seq.name;
  run.overlaps.reserve(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    try {
      const Frame frame = seq.frame(t);
      if (t == 0) {
        tracker.start(frame, seq.groundtruth[0], nullptr);
        run.overlaps.push_back(1.0);
      } else {
        run.overlaps.push_back(iou(tracker.update(frame), seq.groundtruth[t]));
      }
    } catch (const Error& e) {
      throw at_frame(e, seq.name, t);
    }
  }
  return run;
}

double accuracy(const std::vector<EvalRun>& runs, int burn_in) {
  require_runs(runs, "accuracy");
  double total = 0.0;
  std::size_t used = 0;
  for (const auto& run : runs) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < run.size(); ++t) {
      if (run.skipped(t) || std::isnan(run.overlaps[t])) continue;
      const bool warming = std::any_of(run.reinits.begin(), run.reinits.end(), [&](std::size_t r) {
        return t >= r && t < r + static_cast<std::size_t>(burn_in);
      });
      if (warming) continue;
      sum += run.overlaps[t];
      ++n;
    }
    if (n == 0) {
      log::warn("accuracy: " + run.sequence + " has no counted frame and is left out");
      continue;
    }
    total += sum / n;
    ++used;
  }
  if (used == 0) throw Error(ErrorCategory::data, "accuracy: no run has a counted frame");
  return total / used;
}

double robustness(const std::vector<EvalRun>& runs) {
  require_runs(runs, "robustness");
  double failures = 0.0;
  for (const auto& run : runs) failures += run.failures.size();
  return failures / runs.size();
}

std::pair<int, int> default_eao_interval(const std::vector<EvalRun>& runs) {
  require_runs(runs, "EAO interval");
  double mean = 0.0;
  for (const auto& run : runs) mean += run.size();
  mean /= runs.size();
  if (mean >= 356.0) return {100, 356};
  return {static_cast<int>(std::ceil(0.1 * mean)), static_cast<int>(std::ceil(0.5 * mean))};
}

EAOCurve eao(const std::vector<EvalRun>& runs, std::pair<int, int> interval) {
  require_runs(runs, "EAO");
  std::vector<Segment> segments;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto s = segments_of(runs[i], i);
    segments.insert(segments.end(), s.begin(), s.end());
  }
  return eao_of_segments(runs, segments, interval);
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 100; ++i) t.push_back(i / 100.0);
  return t;
}

SuccessCurve ope_success(const EvalRun& run, const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw Error(ErrorCategory::config, "success curve needs thresholds");
  SuccessCurve curve;
  curve.thresholds = thresholds;
  std::size_t frames = 0;
  for (double o : run.overlaps) frames += !std::isnan(o);
  for (double tau : thresholds) {
    std::size_t above = 0;
    for (double o : run.overlaps) above += !std::isnan(o) && o > tau;
    curve.success.push_back(frames ? static_cast<double>(above) / frames : 0.0);
  }
  double sum = 0.0;
  for (double s : curve.success) sum += s;
  curve.auc = sum / curve.success.size();
  return curve;
}

SuccessCurve ope_success(const std::vector<EvalRun>& runs, const std::vector<double>& thresholds) {
  require_runs(runs, "success curve");
  SuccessCurve mean;
  mean.thresholds = thresholds;
  mean.success.assign(thresholds.size(), 0.0);
  for (const auto& run : runs) {
    const SuccessCurve c = ope_success(run, thresholds);
    for (std::size_t i = 0; i < c.success.size(); ++i) mean.success[i] += c.success[i] / runs.size();
    mean.auc += c.auc / runs.size();
  }
  return mean;
}

std::map<std::string, EAOCurve> attribute_breakdown(const std::vector<EvalRun>& runs,
                                                    const std::vector<Sequence>& sequences,
                                                    std::pair<int, int> interval,
                                                    const std::vector<std::string>& tags) {
  if (runs.size() != sequences.size())
    throw Error(ErrorCategory::data, "attribute breakdown: " + std::to_string(runs.size()) + " runs for " +
                                         std::to_string(sequences.size()) + " sequences");
  std::vector<std::string> wanted = tags;
  if (wanted.empty()) {
    TagSet all;
    for (const auto& seq : sequences) {
      all.insert(seq.sequence_attributes.begin(), seq.sequence_attributes.end());
      for (const auto& f : seq.frame_attributes) all.insert(f.begin(), f.end());
    }
    wanted.assign(all.begin(), all.end());
  }

  std::map<std::string, EAOCurve> out;
  for (const auto& tag : wanted) {
    std::vector<Segment> chosen;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const Sequence& seq = sequences[i];
      const bool whole = seq.sequence_attributes.count(tag) > 0;
      for (const Segment& s : segments_of(runs[i], i)) {
        bool carries = whole;
        for (std::size_t t = s.begin; !carries && t < s.end && t < seq.frame_attributes.size(); ++t)
          carries = seq.frame_attributes[t].count(tag) > 0;
        if (carries) chosen.push_back(s);
      }
    }
    if (chosen.empty()) {
      log::warn("attribute " + tag + " has no segments and is omitted");
      continue;
    }
    out.emplace(tag, eao_of_segments(runs, chosen, interval));
  }
  return out;
}

std::vector<EvalRun> evaluate(const TrackerFactory& factory, const std::vector<Sequence>& sequences,
                              Protocol protocol, const VotOptions& options, int jobs) {
  std::vector<EvalRun> runs(sequences.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < sequences.size(); i = next++) {
      try {
        auto tracker = factory();
        runs[i] = protocol == Protocol::vot ? run_vot(*tracker, sequences[i], options)
                                            : run_ope(*tracker, sequences[i]);
        log::info(sequences[i].name + ": " + std::to_string(runs[i].failures.size()) + " failures");
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = sequences.size();
      }
    }
  };

  const std::size_t threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(sequences.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return runs;
}

}  // namespace thermotrack

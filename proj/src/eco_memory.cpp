#include "thermotrack/eco.hpp"

#include <limits>

namespace thermotrack::eco {

SampleMemory::SampleMemory(int capacity, double gamma) : capacity_(capacity), gamma_(gamma) {
  if (capacity < 1) throw Error(ErrorCategory::config, "memory capacity must be at least 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCategory::config, "learning rate must lie in (0, 1)");
}

void SampleMemory::insert(Sample sample, Eigen::MatrixXcd label) {
  if (!samples_.empty()) {
    const Sample& first = samples_.front();
    bool same = first.size() == sample.size();
    for (std::size_t d = 0; same && d < sample.size(); ++d)
      same = first[d].K == sample[d].K && first[d].channel_count() == sample[d].channel_count();
    if (!same) throw Error(ErrorCategory::data, "sample layout differs from the samples in memory");
  }
  for (double& u : raw_) u *= 1.0 - gamma_;
  samples_.push_back(std::move(sample));
  labels_.push_back(std::move(label));
  raw_.push_back(1.0);
  while (samples_.size() > static_cast<std::size_t>(capacity_)) merge_closest();
}

std::vector<double> SampleMemory::weights() const {
  double total = 0.0;
  for (double u : raw_) total += u;
  std::vector<double> alpha(raw_.size());
  for (std::size_t j = 0; j < raw_.size(); ++j) alpha[j] = raw_[j] / total;
  return alpha;
}

double sample_distance_sq(const Sample& a, const Sample& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d)
    for (std::size_t c = 0; c < a[d].channels.size(); ++c) s += (a[d].channels[c] - b[d].channels[c]).squaredNorm();
  return s;
}

void SampleMemory::merge_closest() {
  std::size_t bi = 0, bj = 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples_.size(); ++i)
    for (std::size_t j = i + 1; j < samples_.size(); ++j) {
      const double dist = sample_distance_sq(samples_[i], samples_[j]);
      if (dist < best) {
        best = dist;
        bi = i;
        bj = j;
      }
    }
  const double u = raw_[bi] + raw_[bj];
  const double a = raw_[bi] / u, b = raw_[bj] / u;
  Sample& target = samples_[bi];
  for (std::size_t d = 0; d < target.size(); ++d)
    for (std::size_t c = 0; c < target[d].channels.size(); ++c)
      target[d].channels[c] = a * target[d].channels[c] + b * samples_[bj][d].channels[c];
  labels_[bi] = a * labels_[bi] + b * labels_[bj];
  raw_[bi] = u;
  samples_.erase(samples_.begin() + static_cast<std::ptrdiff_t>(bj));
  labels_.erase(labels_.begin() + static_cast<std::ptrdiff_t>(bj));
  raw_.erase(raw_.begin() + static_cast<std::ptrdiff_t>(bj));
}

SampleMemory SampleMemory::restore(int capacity, double gamma, std::vector<Sample> samples,
                                   std::vector<Eigen::MatrixXcd> labels, std::vector<double> raw) {
  if (samples.size() != labels.size() || samples.size() != raw.size())
    throw Error(ErrorCategory::data, "memory state vectors differ in length");
  if (samples.size() > static_cast<std::size_t>(capacity))
    throw Error(ErrorCategory::data, "memory state exceeds its capacity");
  SampleMemory m(capacity, gamma);
  m.samples_ = std::move(samples);
  m.labels_ = std::move(labels);
  m.raw_ = std::move(raw);
  return m;
}

}  // namespace thermotrack::eco

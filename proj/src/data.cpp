#include "thermotrack/data.hpp"

#include "thermotrack/log.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace thermotrack {
namespace {

class FileFrames : public FrameSource {
 public:
  explicit FileFrames(std::vector<fs::path> files) : files_(std::move(files)) {}
  std::size_t size() const override { return files_.size(); }
  Frame load(std::size_t index) const override { return read_image(files_.at(index)); }

 private:
  std::vector<fs::path> files_;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm";
}

void read_attributes(const fs::path& dir, Sequence& seq) {
  const fs::path attr_dir = dir / "attributes";
  if (!fs::is_directory(attr_dir)) return;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(attr_dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    if (file.filename() == "sequence.tags") {
      for (const auto& line : read_lines(file))
        if (!trim(line).empty()) seq.sequence_attributes.insert(trim(line));
    } else if (file.extension() == ".tag") {
      const std::string tag = file.stem().string();
      const auto lines = read_lines(file);
      if (lines.size() != seq.size())
        throw Error(ErrorCategory::data, file.string() + ": " + std::to_string(lines.size()) +
                                             " flags for " + std::to_string(seq.size()) + " frames");
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string v = trim(lines[i]);
        if (v == "1") {
          seq.frame_attributes[i].insert(tag);
        } else if (v != "0") {
          throw Error(ErrorCategory::data, file.string() + ":" + std::to_string(i + 1) + ": expected 0 or 1");
        }
      }
    }
  }
}

}  // namespace

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCategory::io, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_image(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return natural_less(a.filename().string(), b.filename().string()); });
  return files;
}

BoundingBox parse_groundtruth_line(const std::string& line, std::size_t line_number) {
  std::vector<double> values;
  std::stringstream ss(trim(line));
  for (std::string field; std::getline(ss, field, ',');) {
    const std::string t = trim(field);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || end != t.data() + t.size() || !std::isfinite(v))
      throw Error(ErrorCategory::data, "groundtruth line " + std::to_string(line_number) + ": bad value '" + t + "'");
    values.push_back(v);
  }
  if (values.size() == 4) {
    if (!(values[2] > 0.0 && values[3] > 0.0))
      throw Error(ErrorCategory::data, "groundtruth line " + std::to_string(line_number) + ": non-positive size");
    return BoundingBox(values[0], values[1], values[2], values[3]);
  }
  if (values.size() == 8) {
    Polygon poly;
    for (int i = 0; i < 4; ++i) poly.corners[i] = Eigen::Vector2d(values[2 * i], values[2 * i + 1]);
    try {
      return polygon_to_box(poly);
    } catch (const Error& e) {
      throw Error(ErrorCategory::data, "groundtruth line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  throw Error(ErrorCategory::data, "groundtruth line " + std::to_string(line_number) + ": expected 4 or 8 values, got " +
                                       std::to_string(values.size()));
}

std::string format_groundtruth(const BoundingBox& box) {
  std::string out;
  for (double v : {box.x, box.y, box.w, box.h}) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (!out.empty()) out += ',';
    out.append(buf, end);
  }
  return out;
}

Sequence load_sequence(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCategory::io, "not a sequence directory: " + dir.string());
  const fs::path gt_path = dir / "groundtruth.txt";
  if (!fs::exists(gt_path)) throw Error(ErrorCategory::io, "missing " + gt_path.string());

  Sequence seq;
  seq.name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
  const auto lines = read_lines(gt_path);
  for (std::size_t i = 0; i < lines.size(); ++i) seq.groundtruth.push_back(parse_groundtruth_line(lines[i], i + 1));

  std::vector<fs::path> files = list_images(dir);
  if (files.size() != seq.groundtruth.size())
    throw Error(ErrorCategory::data, dir.string() + ": " + std::to_string(files.size()) + " images but " +
                                         std::to_string(seq.groundtruth.size()) + " groundtruth lines");
  if (files.size() < 2) throw Error(ErrorCategory::data, dir.string() + ": a sequence needs at least 2 frames");
  seq.frames = std::make_shared<FileFrames>(std::move(files));
  seq.frame_attributes.assign(seq.groundtruth.size(), {});
  read_attributes(dir, seq);
  seq.validate();
  return seq;
}

DatasetManifest DatasetManifest::scan(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(ErrorCategory::io, "dataset root is not a directory: " + root.string());
  DatasetManifest manifest;
  manifest.root = root;
  std::vector<std::string> names;
  if (fs::exists(root / "list.txt")) {
    for (const auto& line : read_lines(root / "list.txt"))
      if (!trim(line).empty()) names.push_back(trim(line));
  } else {
    for (const auto& entry : fs::directory_iterator(root))
      if (entry.is_directory() && fs::exists(entry.path() / "groundtruth.txt"))
        names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end(), natural_less);
  }
  if (names.empty()) throw Error(ErrorCategory::data, "dataset " + root.string() + " lists no sequences");
  for (const auto& name : names) {
    const fs::path dir = root / name;
    if (!fs::exists(dir / "groundtruth.txt"))
      throw Error(ErrorCategory::io, "listed sequence missing: " + dir.string());
    const Sequence seq = load_sequence(dir);
    Entry entry{name, seq.size(), seq.sequence_attributes};
    for (const auto& tags : seq.frame_attributes) entry.tags.insert(tags.begin(), tags.end());
    manifest.sequences.push_back(std::move(entry));
  }
  return manifest;
}

std::vector<Sequence> load_dataset(const DatasetManifest& manifest) {
  std::vector<Sequence> out;
  for (const auto& entry : manifest.sequences) out.push_back(load_sequence(manifest.root / entry.name));
  return out;
}

void Histogram::write_csv(std::ostream& out) const {
  out << "bin_low,bin_high,frequency\n";
  char line[128];
  for (std::size_t i = 0; i < frequency.size(); ++i) {
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f\n", edges[i], edges[i + 1], frequency[i]);
    out << line;
  }
}

Histogram grad_histogram(const std::vector<Frame>& images, int bins, double low, double high) {
  if (bins < 2) throw Error(ErrorCategory::config, "histogram needs at least 2 bins");
  if (!(high > low)) throw Error(ErrorCategory::config, "histogram range is empty");
  if (images.empty()) throw Error(ErrorCategory::data, "histogram of an empty image set");

  Histogram h;
  const double width = (high - low) / bins;
  for (int i = 0; i <= bins; ++i) h.edges.push_back(low + i * width);
  std::vector<std::size_t> counts(bins, 0);
  for (const Frame& image : images) {
    const Eigen::ArrayXXd g = image.luma();
    const Eigen::Index R = g.rows(), C = g.cols();
    for (Eigen::Index r = 0; r < R; ++r) {
      for (Eigen::Index c = 0; c < C; ++c) {
        const double gx = (g(r, std::min(c + 1, C - 1)) - g(r, std::max<Eigen::Index>(c - 1, 0))) / 2.0;
        const double gy = (g(std::min(r + 1, R - 1), c) - g(std::max<Eigen::Index>(r - 1, 0), c)) / 2.0;
        const double m = std::sqrt(gx * gx + gy * gy);
        const long bin = static_cast<long>(std::floor((m - low) / width));
        ++counts[std::clamp<long>(bin, 0, bins - 1)];
      }
    }
    h.pixels += static_cast<std::size_t>(R * C);
  }
  for (std::size_t n : counts) h.frequency.push_back(static_cast<double>(n) / h.pixels);
  return h;
}

}  // namespace thermotrack

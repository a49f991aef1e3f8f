#include "thermotrack/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace thermotrack {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

std::string shortest(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// Thrown by value parsers; the caller adds the key and line.
struct BadValue {
  std::string expected;
};

template <typename T>
T parse_number(const std::string& text, const char* expected) {
  T v{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) throw BadValue{expected};
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(v)) throw BadValue{expected};
  return v;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
  if (text == "false" || text == "no" || text == "off" || text == "0") return false;
  throw BadValue{"true or false"};
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

Key real(std::string section, std::string name, double& field) {
  return {std::move(section), std::move(name), [&field](const std::string& v) { field = parse_number<double>(v, "a number"); },
          [&field] { return shortest(field); }};
}

Key integer(std::string section, std::string name, int& field) {
  return {std::move(section), std::move(name), [&field](const std::string& v) { field = parse_number<int>(v, "an integer"); },
          [&field] { return std::to_string(field); }};
}

Key flag(std::string section, std::string name, bool& field) {
  return {std::move(section), std::move(name), [&field](const std::string& v) { field = parse_bool(v); },
          [&field] { return std::string(field ? "true" : "false"); }};
}

std::string format_occluder(const std::optional<OccluderSpec>& o) {
  if (!o) return "none";
  return std::to_string(o->first_frame) + "," + std::to_string(o->last_frame) + "," + format_groundtruth(o->box) + "," +
         shortest(o->intensity);
}

std::optional<OccluderSpec> parse_occluder(const std::string& text) {
  if (text == "none") return std::nullopt;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) parts.push_back(trim(p));
  if (parts.size() != 7) throw BadValue{"none or first,last,x,y,w,h,intensity"};
  OccluderSpec o;
  o.first_frame = parse_number<int>(parts[0], "an integer frame index");
  o.last_frame = parse_number<int>(parts[1], "an integer frame index");
  double b[4];
  for (int i = 0; i < 4; ++i) b[i] = parse_number<double>(parts[2 + i], "a number");
  if (!(b[2] > 0 && b[3] > 0)) throw BadValue{"a positive occluder size"};
  o.box = BoundingBox(b[0], b[1], b[2], b[3]);
  o.intensity = parse_number<double>(parts[6], "a number");
  return o;
}

std::vector<Key> keys_of(RunConfig& c) {
  TrackerConfig& t = c.tracker;
  FeatureConfig& f = c.tracker.features;
  SynthSpec& s = c.synth;
  return {
      integer("tracker", "scales", t.scales),
      real("tracker", "scale_step", t.scale_step),
      real("tracker", "scale_damping", t.scale_damping),
      real("tracker", "sigma_factor", t.sigma_factor),
      real("tracker", "reg_base", t.reg_base),
      real("tracker", "reg_edge_ratio", t.reg_edge_ratio),
      real("tracker", "lambda", t.lambda),
      real("tracker", "gamma", t.gamma),
      integer("tracker", "memory_capacity", t.memory_capacity),
      integer("tracker", "update_interval", t.update_interval),
      integer("tracker", "init_cg_iterations", t.init_cg_iterations),
      integer("tracker", "update_cg_iterations", t.update_cg_iterations),
      real("tracker", "cg_tolerance", t.cg_tolerance),
      integer("tracker", "gn_iterations", t.gn_iterations),
      flag("tracker", "learn_projection", t.learn_projection),
      integer("tracker", "projection_dims", t.projection_dims),
      integer("tracker", "score_upsample", t.score_upsample),

      flag("features", "intensity", f.intensity),
      flag("features", "hog", f.hog),
      real("features", "crop_factor", f.crop_factor),
      integer("features", "patch_size", f.patch_size),
      integer("features", "intensity_cell", f.intensity_cell),
      integer("features", "hog_cell", f.hog_cell),

      flag("motion", "enabled", f.motion.enabled),
      real("motion", "threshold", f.motion.threshold),

      {"eval", "protocol", [&c](const std::string& v) { c.protocol = parse_protocol(v); },
       [&c] { return std::string(to_string(c.protocol)); }},
      real("eval", "failure_threshold", c.vot.failure_threshold),
      integer("eval", "skip", c.vot.skip),
      integer("eval", "burn_in", c.vot.burn_in),
      integer("eval", "eao_low", c.eao_low),
      integer("eval", "eao_high", c.eao_high),

      integer("synth", "width", s.width),
      integer("synth", "height", s.height),
      integer("synth", "length", s.length),
      {"synth", "shape",
       [&s](const std::string& v) {
         if (v == "rectangle") s.shape = TargetShape::rectangle;
         else if (v == "disc") s.shape = TargetShape::disc;
         else throw BadValue{"rectangle or disc"};
       },
       [&s] { return std::string(s.shape == TargetShape::disc ? "disc" : "rectangle"); }},
      real("synth", "target_w", s.target_w),
      real("synth", "target_h", s.target_h),
      real("synth", "start_x", s.start_x),
      real("synth", "start_y", s.start_y),
      {"synth", "motion",
       [&s](const std::string& v) {
         if (v == "fixed") s.motion = MotionModel::fixed;
         else if (v == "linear") s.motion = MotionModel::linear;
         else if (v == "sinusoidal") s.motion = MotionModel::sinusoidal;
         else throw BadValue{"fixed, linear or sinusoidal"};
       },
       [&s] {
         return std::string(s.motion == MotionModel::fixed    ? "fixed"
                            : s.motion == MotionModel::linear ? "linear"
                                                              : "sinusoidal");
       }},
      real("synth", "velocity_x", s.velocity_x),
      real("synth", "velocity_y", s.velocity_y),
      real("synth", "amplitude_x", s.amplitude_x),
      real("synth", "amplitude_y", s.amplitude_y),
      real("synth", "period", s.period),
      real("synth", "phase", s.phase),
      real("synth", "scale_per_frame", s.scale_per_frame),
      real("synth", "foreground", s.foreground),
      real("synth", "background", s.background),
      real("synth", "noise_sigma", s.noise_sigma),
      real("synth", "texture", s.texture),
      integer("synth", "distractors", s.distractors),
      {"synth", "occluder", [&s](const std::string& v) { s.occluder = parse_occluder(v); },
       [&s] { return format_occluder(s.occluder); }},

      {"run", "seed", [&c](const std::string& v) { c.seed = parse_number<std::uint64_t>(v, "a non-negative integer"); },
       [&c] { return std::to_string(c.seed); }},
  };
}

}  // namespace

ProtocolChoice parse_protocol(const std::string& name) {
  if (name == "vot") return ProtocolChoice::vot;
  if (name == "ope") return ProtocolChoice::ope;
  if (name == "both") return ProtocolChoice::both;
  throw Error(ErrorCategory::usage, "unknown protocol '" + name + "' (expected vot, ope or both)");
}

const char* to_string(ProtocolChoice protocol) {
  switch (protocol) {
    case ProtocolChoice::vot: return "vot";
    case ProtocolChoice::ope: return "ope";
    case ProtocolChoice::both: return "both";
  }
  return "vot";
}

void RunConfig::validate() const {
  tracker.validate();
  if (vot.skip < 1) throw Error(ErrorCategory::config, "skip: at least 1 required");
  if (vot.burn_in < 0) throw Error(ErrorCategory::config, "burn_in: must be non-negative");
  if (!(vot.failure_threshold >= 0.0 && vot.failure_threshold < 1.0))
    throw Error(ErrorCategory::config, "failure_threshold: must lie in [0, 1)");
  if ((eao_low == 0) != (eao_high == 0))
    throw Error(ErrorCategory::config, "eao_low and eao_high: set both or neither");
  if (eao_low != 0 && !(eao_low >= 1 && eao_high >= eao_low))
    throw Error(ErrorCategory::config, "eao_low, eao_high: need 1 <= eao_low <= eao_high");
  SynthSpec s = synth;
  s.seed = seed;
  s.validate();
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
  RunConfig config;
  const std::vector<Key> keys = keys_of(config);
  std::string section;
  std::istringstream in(text);
  std::size_t number = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++number;
    const std::string where = source + ":" + std::to_string(number) + ": ";
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCategory::config, where + "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      const bool known = std::any_of(keys.begin(), keys.end(), [&](const Key& k) { return k.section == section; });
      if (!known) throw Error(ErrorCategory::config, where + "unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCategory::config, where + "expected key = value, got '" + line + "'");
    const std::string name = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto key = std::find_if(keys.begin(), keys.end(), [&](const Key& k) {
      return k.name == name && (section.empty() || k.section == section);
    });
    if (key == keys.end())
      throw Error(ErrorCategory::config, where + "unknown key '" + name + "'" +
                                             (section.empty() ? std::string() : " in [" + section + "]"));
    try {
      key->set(value);
    } catch (const BadValue& bad) {
      throw Error(ErrorCategory::config, where + "key '" + name + "' expects " + bad.expected + ", got '" + value + "'");
    } catch (const Error& e) {
      throw Error(ErrorCategory::config, where + "key '" + name + "': " + e.what());
    }
  }
  try {
    config.validate();
  } catch (const Error& e) {
    throw Error(ErrorCategory::config, source + ": " + e.what());
  }
  return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.string());
}

std::string format_config(const RunConfig& config) {
  RunConfig copy = config;
  std::string out;
  std::string section;
  for (const Key& key : keys_of(copy)) {
    if (key.section != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + key.section + "]\n";
      section = key.section;
    }
    out += key.name + " = " + key.get() + "\n";
  }
  return out;
}

}  // namespace thermotrack

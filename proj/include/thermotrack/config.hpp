#pragma once

#include "thermotrack/data.hpp"
#include "thermotrack/eval.hpp"
#include "thermotrack/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace thermotrack {

enum class ProtocolChoice { vot, ope, both };

/// Everything a command line run can be configured with.
///
/// The file format is `key = value` lines grouped under `[tracker]`,
/// `[features]`, `[motion]`, `[eval]`, `[synth]` and `[run]` headers. Key
/// names are unique across sections, so keys before the first header are
/// looked up by name alone. `#` starts a comment.
struct RunConfig {
  TrackerConfig tracker;
  VotOptions vot;
  ProtocolChoice protocol = ProtocolChoice::vot;
  /// EAO interval; 0 picks it from the mean sequence length.
  int eao_low = 0;
  int eao_high = 0;
  SynthSpec synth;
  std::uint64_t seed = 1;

  void validate() const;
};

RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>");

/// Reads and validates a config file. Unknown keys, malformed values and
/// missing files are errors naming the key and line.
RunConfig parse_config(const std::filesystem::path& path);

/// Every key with its effective value, in a form parse_config_text accepts.
std::string format_config(const RunConfig& config);

/// Parses "vot", "ope" or "both".
ProtocolChoice parse_protocol(const std::string& name);
const char* to_string(ProtocolChoice protocol);

}  // namespace thermotrack

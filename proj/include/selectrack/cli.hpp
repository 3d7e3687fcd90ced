#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "selectrack/gating.hpp"
#include "selectrack/tracker.hpp"

namespace selectrack::cli {

/// Exit code for malformed command lines.
inline constexpr int kUsageError = 2;
/// Exit code for I/O, configuration and evaluation failures.
inline constexpr int kRunError = 1;

/// Effective tracker configuration after merging defaults, config file and
/// flags.
struct TrackerSettings {
    GateConfig gate;
    MatchConfig match;
};

/// Builds settings from key=value pairs. Keys: mode, theta_iou, theta_alpha,
/// ars, match, appearance_gate, iou_gate, fused_weight, conf_high,
/// byte_low, min_hits, max_age, ema_alpha, output. Unset keys keep their
/// module defaults; `match` is applied first since it picks the defaults
/// of the rest. Throws std::invalid_argument on unknown keys or bad values.
TrackerSettings settings_from(const std::map<std::string, std::string>& values);

/// Reads "key=value" lines; blank lines and lines starting with '#' are
/// ignored.
std::map<std::string, std::string> read_key_values(const std::string& path);

/// "config.<key>=<value>" lines for every key accepted by settings_from.
std::string echo_settings(const TrackerSettings& settings);

/// Runs one command line (without the program name). Returns the process
/// exit code.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace selectrack::cli

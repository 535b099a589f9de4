#pragma once

#include <stdexcept>
#include <string>

#include "lightyear/sim.hpp"

namespace lightyear {

// Bad user input: unreadable or malformed config, unknown keys, out-of-range
// values. Exit code 2 at the CLI boundary (runtime failures use 3).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Reads a JSON experiment config. Every key is optional; omitted keys take
// the documented defaults. Unknown keys are fatal and the error names the
// closest known key. Validation failures name the violated range, e.g.
// "gamma must satisfy gamma in (0,1]".
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

// Fully-resolved config as canonical JSON (sorted keys, every field
// present). Embedded in summary.json so a run records its exact inputs.
std::string config_to_json(const ExperimentConfig& cfg);

// Stable identifier: hash of the resolved config minus execution-only
// knobs (worker count), so changing parallelism never changes outputs.
std::string run_id(const ExperimentConfig& cfg);

}  // namespace lightyear

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace normnet {

struct Diagnostic {
    std::string field;
    std::string message;
};

// Declarative description of one experiment run; `params` carries the
// kind-specific table from the config file.
struct ExperimentConfig {
    std::string kind;  // construct-sweep | probe-sweep | regress-sweep | gan-run
    std::uint64_t seed = 0;
    std::string out_dir;
    nlohmann::json params;
    nlohmann::json raw;

    static ExperimentConfig from_json(const nlohmann::json& j, const std::string& out_dir);
};

/// Empty iff the config is runnable; each entry names the offending field.
std::vector<Diagnostic> validate(const ExperimentConfig& cfg);

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version;
    long wall_clock_ms = 0;
    long points_total = 0;
    long points_failed = 0;
    std::vector<std::string> point_status;  // "ok" or the error message
};

// Executes every grid point (optionally in parallel, capped by the
// NORMNET_THREADS environment variable), writes CSV + JSON artifacts with
// write-temp-then-rename, and returns the manifest that was also saved as
// manifest.json. Per-point failures are recorded without aborting the sweep.
RunManifest run(const ExperimentConfig& cfg);

/// Shortest round-trip decimal formatting used for all CSV numbers.
std::string format_double(double v);

void atomic_write(const std::string& path, const std::string& contents);

std::uint64_t fnv1a_hash(const std::string& data);

inline constexpr const char* kVersion = "normnet 0.1.0";

}  // namespace normnet

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace cylmart {

// Campaign configuration. The JSON schema is versioned and fail-closed:
// unknown keys are rejected, kind-specific requirements are validated before
// anything runs. (config, seed) fully determines every numeric output.
struct ExperimentConfig {
    int schema_version = 1;
    std::string kind;  // simulate | reconstruct | timechange |
                       // counterexample | calculus-selftest
    int d_h = 2;
    int d_x = 2;
    double horizon = 1.0;  // grid T
    int k_steps = 2000;    // grid K
    int trials = 200;
    std::uint64_t seed = 42;
    int band_depth = 4;
    int n_series = 4;              // ladder block count N
    int n_terms = 1;               // clock truncation
    int n_max = 1;                 // ucp horizon cap
    double tolerance_scale = 1.0;  // multiplies every default tolerance
    std::string out_dir;           // empty: no artifacts written

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;
};

// One named check. pass is derived from the stored numbers, never hand-set:
//   relation "le":  pass  <=>  value <= target + tolerance + 4 * std_error
//   relation "ge":  pass  <=>  value >= target - tolerance - 4 * std_error
// Deviation-style checks store value = |observed - expected|, target = 0.
struct CheckRecord {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    double std_error = 0.0;  // 0 for exact checks
    std::string relation = "le";
    bool pass = false;
};

struct RunReport {
    ExperimentConfig config;
    std::string library_version;
    std::vector<CheckRecord> checks;
    bool all_pass = false;
    double wall_clock_ms = 0.0;  // excluded from determinism comparisons

    nlohmann::json to_json() const;
};

// Executes the configured campaign. When out_dir is set, writes report.json
// plus kind-specific CSV/JSON artifacts there (directory is created).
RunReport run(const ExperimentConfig& cfg);

// Human-readable check table; never alters pass/fail.
std::string report_render(const RunReport& report);

}  // namespace cylmart

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqi/protocols.hpp"
#include "eqi/scene.hpp"

namespace eqi::config {

inline constexpr const char* kToolVersion = "echo-imager 1.0.0";
inline constexpr int kSchemaVersion = 1;

/// Config validation failure; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// Numerical failure during execution; the CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RunKind { rayleigh_sweep, mle, noise_matrix };
enum class MeasurementStrategy { direct, spade, twin_beam_echo };

struct ScenarioConfig {
    scene::Scene scene;
    protocols::ProbeConfig probe;
    protocols::NoiseConfig noise;
    MeasurementStrategy strategy = MeasurementStrategy::spade;
    int hg_modes = 20;
    int pixels_per_sigma = 40;
    double half_width_sigmas = 6.0;
    RunKind run_kind = RunKind::rayleigh_sweep;
    std::vector<double> d_grid;
    double d_over_sigma = 0.1;
    long trials = 1000000;
    std::uint64_t seed = 42;
    int replications = 200;
};

/// Parses and validates; throws ConfigError with a field path on failure.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioConfig& cfg);

/// FNV-1a hash of the canonical (serialized) config, for provenance.
std::string config_hash(const nlohmann::json& j);

/// RFC-4180 CSV with 17-significant-digit numbers.
struct CsvWriter {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(const std::vector<std::string>& row);
    std::string render() const;
};
std::string format_double(double v);

/// Writes atomically (temp file in the same directory, then rename).
void atomic_write(const std::filesystem::path& path, const std::string& contents);

/// Threads resolution: explicit flag wins, then ECHO_IMAGER_THREADS, then 1.
int resolve_threads(std::optional<int> flag_value);

}  // namespace eqi::config

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "json.hpp"

#include "homoclinic/sweep.hpp"

namespace homoclinic::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

/// Parses "lo:hi" into two numbers.
std::pair<double, double> parse_range(std::string_view text);
/// Parses "a:b" into two unsigned integers.
std::pair<std::uint32_t, std::uint32_t> parse_pair_u32(std::string_view text);

/// Canonical key=value rendering of every setting that influences sweep data.
std::string canonical_config_text(const SweepConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

nlohmann::json sweep_config_to_json(const SweepConfig& cfg);
SweepConfig sweep_config_from_json(const nlohmann::json& j);

struct RunManifest {
    std::uint64_t config_hash = 0;
    std::string tool_version{kToolVersion};
    double wall_time = 0.0;
    unsigned worker_count = 1;
    nlohmann::json config;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

/// Manifest path stored next to a data or image artifact.
std::filesystem::path manifest_path_for(const std::filesystem::path& artifact);

void write_manifest(const std::filesystem::path& artifact, const RunManifest& m);
std::optional<RunManifest> read_manifest(const std::filesystem::path& artifact);

/// Worker count: explicit flag, then CHAOS_WORKERS, then available cores.
unsigned resolve_workers(std::optional<unsigned> flag);

/// Report of cmd_models_info as JSON.
nlohmann::json models_info_json(ModelKind kind, double a, double b);

/// Entry point shared by the executable and the tests. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace homoclinic::cli

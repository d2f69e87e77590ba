#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sadd/eval.hpp"

namespace sadd {

struct ManifestDataset {
    std::string name;
    std::filesystem::path path;
    std::optional<std::filesystem::path> schema;
};

/// Benchmark description: every dataset is run under every config.
struct RunManifest {
    std::vector<ManifestDataset> datasets;
    std::vector<PipelineConfig> configs;
    std::filesystem::path output_dir = "results";
    std::uint64_t seed = 1;
    int folds = 10;
    std::size_t jobs = 1;
    std::string missing_token = "?";
    /// Config name the t-tests compare against; defaults to the first config.
    std::optional<std::string> reference;

    /// Throws sadd::Error("config", ...) when no dataset or no config is given.
    void validate() const;
};

/// Parses a JSON manifest; relative paths resolve against `base_dir`.
RunManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
RunManifest load_manifest(const std::filesystem::path& path);

/// FNV-1a (64 bit, hex) of the canonical manifest content that affects results.
std::string config_hash(const RunManifest& manifest);

/// Runs every dataset x config; per-run failures are collected, not thrown.
BenchReport run_manifest(const RunManifest& manifest);

/// Entry point for the `sadd` tool. Returns the process exit status:
/// 0 on success, 1 on a runtime failure, 2 on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sadd

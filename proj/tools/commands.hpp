#pragma once

#include "config.hpp"

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace igbm::app {

inline constexpr const char* kToolVersion = "0.1.0";

// Collects the files a command writes and its stage timings, then writes
// manifest.json (atomically) with a SHA-256 per output.
class RunRecord {
public:
    RunRecord(std::string command, const RunConfig& config);

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path path(const std::string& name) const { return dir_ / name; }
    // Registers an output already written under dir().
    void add(const std::string& name);
    void stage(const std::string& name, double seconds) { timings_.emplace_back(name, seconds); }
    void write_manifest();
    const std::vector<std::string>& files() const { return files_; }

private:
    std::string command_;
    std::string mode_;
    const RunConfig& config_;
    std::filesystem::path dir_;
    std::vector<std::string> files_;
    std::vector<std::pair<std::string, double>> timings_;
    std::chrono::steady_clock::time_point start_;
};

// Each command writes into config.out and returns the output file names.
// Errors propagate as igbm exceptions; the entry point maps them to exit codes.
std::vector<std::string> cmd_simulate(const RunConfig& config);
std::vector<std::string> cmd_meanfield(const RunConfig& config);
std::vector<std::string> cmd_returns(const RunConfig& config);
std::vector<std::string> cmd_pricing(const RunConfig& config);
// True when every acceptance criterion passed.
bool cmd_validate(const RunConfig& config, bool print = true);

// Symmetric grid of n points on [-half_width, half_width].
std::vector<double> symmetric_grid(double half_width, int n);

}  // namespace igbm::app

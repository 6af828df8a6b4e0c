#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hq {

constexpr const char* kSoftwareVersion = "0.3.0";
constexpr int kRecordSchemaVersion = 1;

std::vector<std::string> experiment_names();

// Embedded defaults; every key a config may set appears here.
nlohmann::json default_config();

// Defaults, then the user config, then key=value overrides (dotted paths,
// values parsed as JSON when possible, else taken as strings). Unknown keys
// and ill-typed values raise config errors.
nlohmann::json resolve_config(const nlohmann::json& user, const std::vector<std::string>& overrides = {});

// FNV-1a over the compact dump of the resolved config (keys sorted).
std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const nlohmann::json& resolved);

struct RunOutput {
    nlohmann::json record;
    std::vector<std::string> files;
    int exit_code = 0;  // 0 success, 2 config or validation failure, 3 numerical failure
    std::string message;
};

// Runs cfg["experiment"] and writes <experiment>_<hash>.json plus CSV curves
// into out_dir (cfg["output"]["directory"] when empty). workers caps threads.
RunOutput run_experiment(const nlohmann::json& resolved, const std::string& out_dir = {}, int workers = 1);

struct ReportOutput {
    std::string table;  // aligned text
    std::string csv;
    int rows = 0;
    int attention = 0;
    std::vector<std::string> warnings;
    std::vector<std::string> files;
};

// Summarizes every record in `dir`, ordered by config hash, and writes
// report.txt and report.csv there.
ReportOutput report(const std::string& dir);

}  // namespace hq

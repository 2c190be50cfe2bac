#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mvbif/types.hpp"

namespace mvbif {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Resolved key/value configuration. Every key has a default; unknown keys are rejected.
class RunConfig {
public:
    RunConfig();
    static const std::map<std::string, std::string>& defaults();

    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;
    double number(const std::string& key) const;
    int integer(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> list(const std::string& key) const;
    const std::map<std::string, std::string>& values() const { return values_; }

    // type and range checks across all keys
    void validate() const;

private:
    std::map<std::string, std::string> values_;
};

// "key = value" lines, '#' comments
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::string& path);
// MVBIF_<KEY> environment overrides, KEY in upper case
void apply_environment(RunConfig& cfg, char** envp);
void apply_assignment(RunConfig& cfg, const std::string& key_eq_value);

PotentialSpectrum build_potential(const RunConfig& cfg);

std::string format_number(double x);  // %.17g

// Each command writes into out_dir and returns the written file names (relative to out_dir).
std::vector<std::string> cmd_spectrum(const RunConfig& cfg, const std::string& out_dir);
std::vector<std::string> cmd_bifurcate(const RunConfig& cfg, const std::string& out_dir);
std::vector<std::string> cmd_continue(const RunConfig& cfg, const std::string& out_dir);
std::vector<std::string> cmd_energy(const RunConfig& cfg, const std::string& out_dir);
std::vector<std::string> cmd_density(const RunConfig& cfg, const std::string& out_dir);
std::vector<std::string> cmd_simulate(const RunConfig& cfg, const std::string& out_dir);

// Full front end; returns the process exit code (0 ok, 2 invalid input, 3 numerical failure).
int cli_main(int argc, char** argv, char** envp);

}  // namespace mvbif

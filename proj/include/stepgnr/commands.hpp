#ifndef STEPGNR_COMMANDS_HPP
#define STEPGNR_COMMANDS_HPP

#include "stepgnr/config.hpp"

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace stepgnr {

struct CommandOptions {
    std::filesystem::path out_dir;  ///< empty: config out_dir, else "."
    bool linear_response = false;
    int threads = 1;                ///< 0 = hardware concurrency
};

/// "%.9e" with the exponent written without padding or '+', e.g.
/// 1.250000000e-3, 0.000000000e0. Negative zero prints as zero.
std::string format_number(double v);

/// T_vb{millivolts}.csv, e.g. T_vb300.csv, T_vb-100.csv.
std::string transmission_file_name(double v_b);

/// Sites (position, normal, tags), bonds and the resolved profile.
std::string geometry_json(const DeviceGeometry& geom);

// Each command writes into the output directory and returns nothing; errors
// propagate as the library's exception types. `diag` receives warnings.
void cmd_build(const RunConfig& cfg, const CommandOptions& opts, std::ostream& diag);
void cmd_transmission(const RunConfig& cfg, const CommandOptions& opts, std::ostream& diag);
void cmd_ldos(const RunConfig& cfg, const CommandOptions& opts, std::ostream& diag);
void cmd_iv(const RunConfig& cfg, const CommandOptions& opts, std::ostream& diag);
void cmd_sweep(const RunConfig& cfg, const CommandOptions& opts, std::ostream& diag);

/// 2 config/validation, 3 I/O, 4 non-convergence or numerical failure, 1 other.
int exit_code_for(const std::exception& e);

/// Loads the config, dispatches by command name and maps errors to exit codes
/// (message on diag). Returns 0 on success.
int run_command(const std::string& command, const std::filesystem::path& config, const CommandOptions& opts,
                std::ostream& diag);

}  // namespace stepgnr

#endif

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

// The four CLI operations, exposed as library functions so they can be
// driven from tests. Each returns a process exit code:
//   0 success, 2 config error, 3 I/O error, 4 numeric failure.

namespace levidm::cli {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

int cmd_simulate(const std::string& config_path, const Overrides& ov,
                 std::ostream& diag);

int cmd_spectra(const std::vector<std::string>& trajectory_patterns,
                const std::string& config_path, const Overrides& ov,
                std::ostream& diag);

// mode: "isotropic" or "directional"; scan handled by the preset size.
int cmd_decohere(const std::string& preset_name, const std::string& config_path,
                 const std::string& mode, const Overrides& ov,
                 std::ostream& diag);

// format: "text", "json" or "csv".
int cmd_table(const std::string& format, std::ostream& out, std::ostream& diag);

} // namespace levidm::cli

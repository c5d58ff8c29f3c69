#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dinof {

// Exit codes: 0 success, 2 config error, 3 checkpoint error, 4 data error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCheckpoint = 3;
inline constexpr int kExitData = 4;

// Subcommand bodies; each catches the library error types and maps them to
// the exit codes above, printing diagnostics to stderr.
int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides);

int cmd_sample(const std::string& checkpoint_path, int64_t n, bool baseline,
               const std::string& out_dir, std::optional<uint64_t> seed,
               const std::vector<std::string>& overrides);

int cmd_eval(const std::string& samples_a, const std::string& samples_b_or_dist,
             const std::string& out_path, int64_t n_ref, uint64_t seed);

int cmd_sweep_tm(const std::string& config_path, const std::string& tm_list,
                 const std::vector<std::string>& overrides);

std::vector<double> parse_tm_list(const std::string& csv);

}  // namespace dinof

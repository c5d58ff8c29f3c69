#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dinof {

struct ConfigError : std::runtime_error {
    ConfigError(std::string message, int line_no = 0, std::string key_name = "")
        : std::runtime_error(std::move(message)), line(line_no), key(std::move(key_name)) {}
    int line;
    std::string key;
};

// Flat `key = value` experiment description. Unknown keys are rejected;
// every run writes back the fully resolved document next to its outputs.
struct ExperimentConfig {
    // data
    std::string dataset = "gmm8";
    int64_t dim = 2;
    std::vector<double> gaussian_mean;      // single_gaussian only
    std::vector<double> gaussian_cov_diag;  // single_gaussian only

    // forward SDE
    std::string sde_family = "ve";
    double sigma_min = 0.01;
    double sigma_max = 50.0;
    double beta_min = 0.1;
    double beta_max = 20.0;
    double T = 1.0;
    int64_t N = 1000;

    // hybrid cut
    double tm = 0.6;
    bool train_t_full_range = false;

    // score network
    std::vector<int64_t> score_hidden = {128, 128, 128};
    int64_t time_embed_dim = 64;

    // flow network
    int64_t flow_blocks = 16;
    int64_t flow_hidden = 256;
    double flow_scale_cap = 2.0;

    // sampler
    std::string predictor = "euler_maruyama";
    std::string corrector = "langevin";
    int64_t corrector_steps = 1;
    double snr = 0.16;
    int64_t sampler_steps = 0;  // 0 -> round(N * tm / T)
    bool denoise_final = true;
    bool corrector_first = true;
    bool corrector_at_start = true;

    // training
    double joint_weight = 1.0;
    int64_t train_iterations = 1000;
    int64_t batch_size = 256;
    double lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    bool freeze_tm_noise = false;
    int64_t frozen_pool = 8192;
    uint64_t seed = 0;
    int64_t checkpoint_interval = 0;  // 0 -> final checkpoint only

    // outputs
    std::string output_dir = "out";
    bool plot = true;
    double axis_range = 6.0;

    // sweep
    int64_t sweep_samples = 4000;
    int64_t sweep_train_iterations = 0;  // 0 -> train_iterations

    static ExperimentConfig parse_file(const std::string& path);
    static ExperimentConfig parse_text(const std::string& text);

    // "key=value" override (--set)
    void apply_override(const std::string& assignment);

    void validate() const;                  // throws ConfigError
    std::string serialize() const;          // resolved document, fixed key order
    int64_t resolved_sampler_steps() const;
};

}  // namespace dinof

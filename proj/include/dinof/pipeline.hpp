#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dinof/adam.hpp"
#include "dinof/config.hpp"
#include "dinof/data.hpp"
#include "dinof/flow.hpp"
#include "dinof/metrics.hpp"
#include "dinof/rng.hpp"
#include "dinof/samplers.hpp"
#include "dinof/score.hpp"
#include "dinof/sde.hpp"

namespace dinof {

struct TrainLosses {
    double score_loss = 0.0;
    double flow_nll = 0.0;
};

// Full experiment state: models, optimizers and the single RNG stream that
// drives batches and noise. Serializes to a checkpoint bit-exactly.
struct TrainState {
    ExperimentConfig cfg;
    SdeSpec spec;
    ToyDistribution dataset;
    MlpScoreModel score;
    FlowModel flow;
    std::vector<AdamState> score_opt;
    std::vector<AdamState> flow_opt;
    AdamParams adam;
    Rng rng;
    int64_t iteration = 0;
    Tensor frozen_x0;   // populated when cfg.freeze_tm_noise
    Tensor frozen_eps;

    static TrainState create(const ExperimentConfig& cfg);

    ScoreFn score_fn() const;
    SamplerConfig sampler_config() const;
    double train_t_hi() const;  // tm, or T when train_t_full_range
    Tensor draw_batch();        // from the dataset (or the frozen pool)
};

// One joint update: DSM step on the score parameters, then a flow NLL step
// on x(T_m) formed from the same clean batch with fresh noise. The two
// parameter sets are disjoint, so the joint objective decouples.
TrainLosses joint_train_step(TrainState& state, const Tensor& x0);
TrainLosses joint_train_step(TrainState& state);

// z ~ N(0,I) -> flow inverse -> reverse SDE from tm down to the floor.
Tensor dinof_sample(const TrainState& state, int64_t n, Rng& rng);

// Pure reverse SDE over the full grid from the family's terminal prior.
Tensor baseline_sample(const TrainState& state, int64_t n, Rng& rng);

// Ablation arm: reverse SDE from tm, started from N(0, sigma(tm)^2 I)
// instead of the flow prior (same step count as dinof_sample).
Tensor truncated_gaussian_sample(const TrainState& state, int64_t n, Rng& rng);

struct SweepRow {
    double tm = 0.0;
    int64_t sampling_steps = 0;
    double energy_distance = 0.0;
    double mmd = 0.0;
    double score_mse = 0.0;      // NaN when the dataset has no analytic score
    double mode_coverage = 0.0;  // NaN likewise
    double wall_ms_per_1k_samples = 0.0;
};

// Trains one model per tm value (fresh seed-identical start) and evaluates
// it against a shared reference draw.
std::vector<SweepRow> tm_sweep(const ExperimentConfig& base, const std::vector<double>& tm_list);

// ---- checkpoint container ----

struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& m) : std::runtime_error(m) {}
};

// "DINOF1" magic, u64-LE JSON header length, UTF-8 JSON header (config,
// shapes, layer inventory, optimizer steps, RNG state), then raw
// little-endian f64 blocks in header-declared order.
void save_checkpoint(const TrainState& state, const std::string& path);
TrainState load_checkpoint(const std::string& path);

}  // namespace dinof

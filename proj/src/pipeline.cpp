#include "dinof/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dinof {

namespace {

SdeSpec spec_from_config(const ExperimentConfig& cfg) {
    SdeSpec spec;
    spec.family = sde_family_from_string(cfg.sde_family);
    spec.sigma_min = cfg.sigma_min;
    spec.sigma_max = cfg.sigma_max;
    spec.beta_min = cfg.beta_min;
    spec.beta_max = cfg.beta_max;
    spec.T = cfg.T;
    spec.N = cfg.N;
    spec.validate();
    return spec;
}

ToyDistribution dataset_from_config(const ExperimentConfig& cfg) {
    ToyDistribution d = ToyDistribution::named(cfg.dataset, cfg.dim);
    if (d.kind == ToyKind::SINGLE_GAUSSIAN) {
        if (!cfg.gaussian_mean.empty()) {
            if (static_cast<int64_t>(cfg.gaussian_mean.size()) != cfg.dim)
                throw ConfigError("config: gaussian_mean length must equal dim", 0, "gaussian_mean");
            d.gauss_mean = cfg.gaussian_mean;
        }
        if (!cfg.gaussian_cov_diag.empty()) {
            if (static_cast<int64_t>(cfg.gaussian_cov_diag.size()) != cfg.dim)
                throw ConfigError("config: gaussian_cov_diag length must equal dim", 0,
                                  "gaussian_cov_diag");
            d.gauss_cov.assign(static_cast<size_t>(cfg.dim * cfg.dim), 0.0);
            for (int64_t i = 0; i < cfg.dim; ++i)
                d.gauss_cov[static_cast<size_t>(i * cfg.dim + i)] = cfg.gaussian_cov_diag[static_cast<size_t>(i)];
        }
    }
    return d;
}

}  // namespace

TrainState TrainState::create(const ExperimentConfig& cfg) {
    cfg.validate();
    TrainState st;
    st.cfg = cfg;
    st.spec = spec_from_config(cfg);
    st.dataset = dataset_from_config(cfg);
    st.rng = Rng(cfg.seed);
    st.score = MlpScoreModel::create(cfg.dim, cfg.score_hidden, cfg.time_embed_dim, st.rng);
    st.flow = FlowModel::create(cfg.dim, cfg.flow_blocks, cfg.flow_hidden, cfg.flow_scale_cap,
                                st.rng);
    st.score_opt = make_adam_states(st.score.params);
    st.flow_opt = make_adam_states(st.flow.params_copy());
    st.adam = AdamParams{cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps};
    if (cfg.freeze_tm_noise) {
        st.frozen_x0 = st.dataset.sample(cfg.frozen_pool, st.rng);
        st.frozen_eps = Tensor::randn({cfg.frozen_pool, cfg.dim}, st.rng);
    }
    return st;
}

ScoreFn TrainState::score_fn() const { return score.as_score_fn(); }

SamplerConfig TrainState::sampler_config() const {
    SamplerConfig sc;
    sc.predictor = predictor_from_string(cfg.predictor);
    sc.corrector = corrector_from_string(cfg.corrector);
    sc.corrector_steps = static_cast<int>(cfg.corrector_steps);
    sc.snr = cfg.snr;
    sc.steps = cfg.resolved_sampler_steps();
    sc.denoise_final = cfg.denoise_final;
    sc.corrector_first = cfg.corrector_first;
    sc.corrector_at_start = cfg.corrector_at_start;
    sc.validate();
    return sc;
}

double TrainState::train_t_hi() const { return cfg.train_t_full_range ? cfg.T : cfg.tm; }

Tensor TrainState::draw_batch() {
    if (cfg.freeze_tm_noise) {
        Tensor x0({cfg.batch_size, cfg.dim});
        for (int64_t i = 0; i < cfg.batch_size; ++i) {
            const auto r = static_cast<int64_t>(rng.below(static_cast<uint64_t>(cfg.frozen_pool)));
            for (int64_t j = 0; j < cfg.dim; ++j) x0.at(i, j) = frozen_x0.at(r, j);
        }
        return x0;
    }
    return dataset.sample(cfg.batch_size, rng);
}

namespace {

// x(tm) batch paired with the frozen pool when requested; fresh noise
// otherwise (stochastic augmentation).
Tensor noised_tm_batch(TrainState& st, const Tensor& x0) {
    if (st.cfg.freeze_tm_noise) {
        // x0 rows come from the pool; reuse the pooled eps by nearest lookup
        // is ill-defined, so the frozen variant re-noises the whole pool once
        // and draws row indices (both tensors were drawn at create()).
        const KernelStats ks = perturbation_kernel(st.spec, st.cfg.tm);
        Tensor xt({st.cfg.batch_size, st.cfg.dim});
        for (int64_t i = 0; i < st.cfg.batch_size; ++i) {
            const auto r = static_cast<int64_t>(st.rng.below(static_cast<uint64_t>(st.cfg.frozen_pool)));
            for (int64_t j = 0; j < st.cfg.dim; ++j)
                xt.at(i, j) = ks.mean_coef * st.frozen_x0.at(r, j) + ks.std * st.frozen_eps.at(r, j);
        }
        return xt;
    }
    auto [xt, eps] = sample_marginal(st.spec, x0, st.cfg.tm, st.rng);
    (void)eps;
    return xt;
}

}  // namespace

TrainLosses joint_train_step(TrainState& state, const Tensor& x0) {
    if (x0.rank() != 2 || x0.shape[1] != state.cfg.dim)
        throw std::invalid_argument("train step: x0 must be [batch," +
                                    std::to_string(state.cfg.dim) + "]");
    TrainLosses losses;

    // --- score / DSM part ---
    {
        Tensor t_batch, eps;
        draw_dsm_batch(state.spec, x0.shape[0], state.cfg.dim, kEpsFloor, state.train_t_hi(),
                       state.rng, t_batch, eps);
        Tape tape;
        std::vector<Var> pv = tape.leaves(state.score.params);
        Var loss = dsm_loss_build(tape, state.score, pv, state.spec, x0, t_batch, eps,
                                  LossWeighting::SIGMA2);
        losses.score_loss = loss.value()[0];
        if (!std::isfinite(losses.score_loss))
            throw std::runtime_error("training aborted: score loss non-finite at iteration " +
                                     std::to_string(state.iteration));
        tape.backward(loss);
        std::vector<Tensor> grads;
        grads.reserve(pv.size());
        for (Var v : pv) grads.push_back(tape.grad(v));
        adam_step_all(state.score.params, grads, state.score_opt, state.adam);
    }

    // --- flow / NLL part on x(tm) ---
    {
        Tensor x_tm = noised_tm_batch(state, x0);
        if (!state.flow.initialized) state.flow.init_actnorm(x_tm);
        std::vector<Tensor> params = state.flow.params_copy();
        Tape tape;
        std::vector<Var> pv = tape.leaves(params);
        Var nll = state.flow.nll_build(tape, pv, x_tm);
        losses.flow_nll = nll.value()[0];
        if (!std::isfinite(losses.flow_nll))
            throw std::runtime_error("training aborted: flow NLL non-finite at iteration " +
                                     std::to_string(state.iteration));
        if (state.cfg.joint_weight > 0.0) {
            Var weighted = tape.scale(nll, state.cfg.joint_weight);
            tape.backward(weighted);
            std::vector<Tensor> grads;
            grads.reserve(pv.size());
            for (Var v : pv) grads.push_back(tape.grad(v));
            adam_step_all(params, grads, state.flow_opt, state.adam);
            state.flow.set_params(params);
        }
    }

    state.iteration += 1;
    return losses;
}

TrainLosses joint_train_step(TrainState& state) {
    Tensor x0 = state.draw_batch();
    return joint_train_step(state, x0);
}

Tensor dinof_sample(const TrainState& state, int64_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("dinof_sample: n must be >= 1");
    Tensor z = Tensor::randn({n, state.cfg.dim}, rng);
    Tensor x_tm = state.flow.inverse(z);
    return pc_sample(state.spec, state.score_fn(), std::move(x_tm), state.cfg.tm, 0.0,
                     state.sampler_config(), rng);
}

Tensor baseline_sample(const TrainState& state, int64_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("baseline_sample: n must be >= 1");
    Tensor x = t_scale(Tensor::randn({n, state.cfg.dim}, rng), terminal_prior_std(state.spec));
    SamplerConfig sc = state.sampler_config();
    sc.steps = state.spec.N;  // full chain
    return pc_sample(state.spec, state.score_fn(), std::move(x), state.spec.T, 0.0, sc, rng);
}

Tensor truncated_gaussian_sample(const TrainState& state, int64_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("truncated_gaussian_sample: n must be >= 1");
    const KernelStats ks = perturbation_kernel(state.spec, state.cfg.tm);
    Tensor x = t_scale(Tensor::randn({n, state.cfg.dim}, rng), ks.std);
    return pc_sample(state.spec, state.score_fn(), std::move(x), state.cfg.tm, 0.0,
                     state.sampler_config(), rng);
}

std::vector<SweepRow> tm_sweep(const ExperimentConfig& base, const std::vector<double>& tm_list) {
    base.validate();
    std::vector<SweepRow> rows;
    const double nan = std::nan("");

    // shared ground-truth reference draw
    const ToyDistribution ref_dist = dataset_from_config(base);
    Rng ref_rng(base.seed + 2000003);
    const Tensor reference = ref_dist.sample(base.sweep_samples, ref_rng);

    for (double tm : tm_list) {
        if (!(tm > 0.0 && tm <= base.T))
            throw ConfigError("sweep: tm value " + std::to_string(tm) + " outside (0, T]", 0, "tm");
        ExperimentConfig cfg = base;
        cfg.tm = tm;
        cfg.sampler_steps = 0;  // per-tm accounting
        if (base.sweep_train_iterations > 0) cfg.train_iterations = base.sweep_train_iterations;

        TrainState st = TrainState::create(cfg);
        for (int64_t i = 0; i < cfg.train_iterations; ++i) joint_train_step(st);

        Rng sample_rng(base.seed + 1000003);
        const auto t0 = std::chrono::steady_clock::now();
        Tensor samples = dinof_sample(st, base.sweep_samples, sample_rng);
        const auto t1 = std::chrono::steady_clock::now();
        const double wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

        SweepRow row;
        row.tm = tm;
        row.sampling_steps = cfg.resolved_sampler_steps();
        row.energy_distance = energy_distance(samples, reference);
        row.mmd = mmd_rbf(samples, reference);
        if (st.dataset.has_mixture()) {
            const GaussianMixture mix = st.dataset.mixture();
            Rng mse_rng(base.seed + 3000003);
            std::vector<double> t_grid;
            for (int k = 1; k <= 5; ++k) t_grid.push_back(tm * static_cast<double>(k) / 5.0);
            row.score_mse = score_mse(st.score_fn(), mix, st.spec, t_grid, 2048, mse_rng);
            row.mode_coverage = mode_coverage(samples, st.dataset);
        } else {
            row.score_mse = nan;
            row.mode_coverage = nan;
        }
        row.wall_ms_per_1k_samples =
            wall_ms * 1000.0 / static_cast<double>(base.sweep_samples);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dinof

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "dinof/data.hpp"
#include "dinof/gmm.hpp"
#include "dinof/metrics.hpp"
#include "dinof/samplers.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dinof;

namespace {

SdeSpec ve_spec() {
    SdeSpec s;
    s.family = SdeFamily::VE;
    return s;
}

SdeSpec vp_spec() {
    SdeSpec s;
    s.family = SdeFamily::VP;
    return s;
}

ScoreFn zero_score() {
    return [](const Tensor& x, double) { return Tensor(x.shape); };
}

// exact score of N(0, v) in any dimension
ScoreFn gaussian_score(double v) {
    return [v](const Tensor& x, double) { return t_scale(x, -1.0 / v); };
}

// exact diffused score for gaussian data N(0, v0 I)
ScoreFn diffused_gaussian_score(const SdeSpec& spec, double v0) {
    return [spec, v0](const Tensor& x, double t) {
        const KernelStats ks = perturbation_kernel(spec, t);
        const double var = ks.mean_coef * ks.mean_coef * v0 + ks.std * ks.std;
        return t_scale(x, -1.0 / var);
    };
}

}  // namespace

TEST_CASE("predictor step: score-free VE reduces to pure noise injection") {
    const SdeSpec spec = ve_spec();
    Tensor x = Tensor::from2d(2, 2, {1, 2, 3, 4});
    const double t = 0.5, dt = 1e-3;
    Rng r1(42);
    Tensor got = predictor_step(spec, zero_score(), x, t, dt, r1);
    // same draw stream gives the w used inside
    Rng r2(42);
    Tensor w = Tensor::randn(x.shape, r2);
    const double g = diffusion(spec, t);
    for (int64_t i = 0; i < x.numel(); ++i)
        CHECK(got[i] == doctest::Approx(x[i] + g * std::sqrt(dt) * w[i]).epsilon(1e-15));
}

TEST_CASE("predictor step: drift-only VP reversal once the noise term is removed") {
    const SdeSpec spec = vp_spec();
    Tensor x = Tensor::from2d(1, 2, {2.0, -1.0});
    const double t = 0.4, dt = 1e-3;
    Rng r1(7);
    Tensor got = predictor_step(spec, zero_score(), x, t, dt, r1);
    Rng r2(7);
    Tensor w = Tensor::randn(x.shape, r2);
    const double g = diffusion(spec, t);
    const double b = beta_t(spec, t);
    for (int64_t i = 0; i < x.numel(); ++i) {
        const double no_noise = got[i] - g * std::sqrt(dt) * w[i];
        // x' = x + 1/2 beta(t) x dt  (hypothetical g=0 contraction reversal)
        CHECK(no_noise == doctest::Approx(x[i] + 0.5 * b * x[i] * dt).epsilon(1e-12));
    }
}

TEST_CASE("predictor-only chain recovers a 1-D gaussian variance (OU oracle)") {
    const SdeSpec spec = vp_spec();
    const double v0 = 2.25;  // data N(0, 1.5^2)
    const int64_t n = 100000, steps = 1000;
    Rng rng(11);
    // exact terminal marginal
    const KernelStats kT = perturbation_kernel(spec, spec.T);
    const double vT = kT.mean_coef * kT.mean_coef * v0 + kT.std * kT.std;
    Tensor x = t_scale(Tensor::randn({n, 1}, rng), std::sqrt(vT));

    SamplerConfig cfg;
    cfg.corrector = CorrectorKind::NONE;
    cfg.steps = steps;
    cfg.denoise_final = false;
    Tensor out = pc_sample(spec, diffused_gaussian_score(spec, v0), x, spec.T, 0.0, cfg, rng);
    std::vector<double> xs(out.data.begin(), out.data.end());
    const double var = test::var_of(xs);
    CHECK(std::abs(var - v0) / v0 <= 0.03);
}

TEST_CASE("langevin: zero steps is the identity") {
    Rng rng(5);
    Tensor x = Tensor::randn({4, 2}, rng);
    Tensor out = langevin_correct(gaussian_score(1.0), x, 0.5, 0.16, 0, rng);
    CHECK(t_max_abs_diff(out, x) == 0.0);
}

TEST_CASE("langevin at an exact mode: capped gamma, pure diffusion move") {
    Tensor x({1, 2});  // at the mode of N(0,I): score = 0
    Rng r1(9);
    Tensor got = langevin_correct(gaussian_score(1.0), x, 0.5, 0.16, 1, r1);
    Rng r2(9);
    Tensor w = Tensor::randn(x.shape, r2);
    for (int64_t i = 0; i < x.numel(); ++i)
        CHECK(got[i] == doctest::Approx(std::sqrt(kGammaMax) * w[i]).epsilon(1e-15));
}

TEST_CASE("long-run langevin targets N(0,1): Kolmogorov-Smirnov at alpha=0.01") {
    const int64_t n = 10000;
    Tensor x = Tensor::full({n, 1}, 5.0);
    Rng rng(13);
    Tensor out = langevin_correct(gaussian_score(1.0), x, 0.5, 0.16, 5000, rng);
    std::vector<double> xs(out.data.begin(), out.data.end());
    const double d = test::ks_statistic_normal(xs);
    // critical value at alpha = 0.01
    CHECK(d <= 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("pc_sample: 600 predictor evaluations for tm=0.6 with N=1000") {
    const SdeSpec spec = ve_spec();
    int64_t calls = 0;
    ScoreFn counting = [&calls](const Tensor& x, double) {
        ++calls;
        return Tensor(x.shape);
    };
    SamplerConfig cfg;
    cfg.corrector = CorrectorKind::NONE;
    cfg.steps = steps_for_tm(spec, 0.6);
    cfg.denoise_final = false;
    REQUIRE(cfg.steps == 600);
    Rng rng(1);
    Tensor x = Tensor::randn({16, 2}, rng);
    pc_sample(spec, counting, x, 0.6, 0.0, cfg, rng);
    CHECK(calls == 600);
}

TEST_CASE("pc_sample: no predictor, no corrector returns the input unchanged") {
    const SdeSpec spec = ve_spec();
    SamplerConfig cfg;
    cfg.predictor = PredictorKind::NONE;
    cfg.corrector = CorrectorKind::NONE;
    cfg.steps = 50;
    Rng rng(3);
    Tensor x = Tensor::randn({8, 2}, rng);
    Tensor out = pc_sample(spec, zero_score(), x, 1.0, 0.0, cfg, rng);
    CHECK(t_max_abs_diff(out, x) == 0.0);
}

TEST_CASE("pc_sample: symmetric 2-component mixture splits 50/50") {
    const SdeSpec spec = ve_spec();
    GaussianMixture mix = GaussianMixture::isotropic(2, {{-2.0, 0.0}, {2.0, 0.0}}, 0.25);
    ScoreFn oracle = [&](const Tensor& x, double t) { return gmm_score(mix, x, t, spec); };
    const int64_t n = 10000;
    Rng rng(17);
    Tensor x = t_scale(Tensor::randn({n, 2}, rng), terminal_prior_std(spec));
    SamplerConfig cfg;
    cfg.steps = 1000;
    Tensor out = pc_sample(spec, oracle, x, spec.T, 0.0, cfg, rng);
    auto occ = mode_occupancy(out, mix);
    REQUIRE(occ.size() == 2);
    CHECK(std::abs(occ[0] - 0.5) <= 0.03);
    CHECK(std::abs(occ[1] - 0.5) <= 0.03);
}

TEST_CASE("pc_sample with analytic gmm8 scores recovers weights, means, traces") {
    const SdeSpec spec = ve_spec();
    GaussianMixture mix = gmm8_mixture(2);
    ScoreFn oracle = [&](const Tensor& x, double t) { return gmm_score(mix, x, t, spec); };
    const int64_t n = 10000;
    Rng rng(19);
    Tensor x = t_scale(Tensor::randn({n, 2}, rng), terminal_prior_std(spec));
    SamplerConfig cfg;
    cfg.steps = 1000;
    Tensor out = pc_sample(spec, oracle, x, spec.T, 0.0, cfg, rng);

    auto occ = mode_occupancy(out, mix);
    // per-component sums for mean/covariance estimates
    const int64_t d = 2;
    std::vector<std::vector<double>> sums(8, std::vector<double>(2, 0.0));
    std::vector<std::vector<double>> sq(8, std::vector<double>(2, 0.0));
    std::vector<int64_t> counts(8, 0);
    for (int64_t i = 0; i < n; ++i) {
        double best = 1e300;
        size_t bk = 0;
        for (size_t k = 0; k < 8; ++k) {
            double r = 0.0;
            for (int64_t j = 0; j < d; ++j) {
                const double v = out.at(i, j) - mix.comps[k].mean[static_cast<size_t>(j)];
                r += v * v;
            }
            if (r < best) {
                best = r;
                bk = k;
            }
        }
        if (best <= 0.45 * 0.45) {
            counts[bk] += 1;
            for (int64_t j = 0; j < d; ++j) sums[bk][static_cast<size_t>(j)] += out.at(i, j);
        }
    }
    for (size_t k = 0; k < 8; ++k) {
        CHECK(std::abs(occ[k] - 0.125) <= 0.125 * 0.05 + 0.02);  // weights within ~5% + MC slack
        REQUIRE(counts[k] > 100);
        for (int64_t j = 0; j < d; ++j) {
            const double mean_j = sums[k][static_cast<size_t>(j)] / static_cast<double>(counts[k]);
            CHECK(std::abs(mean_j - mix.comps[k].mean[static_cast<size_t>(j)]) <= 0.2);  // 5% of radius 4
        }
    }
    // trace of the within-mode covariance, pooled over modes
    double trace = 0.0;
    int64_t used = 0;
    for (int64_t i = 0; i < n; ++i) {
        double best = 1e300;
        size_t bk = 0;
        for (size_t k = 0; k < 8; ++k) {
            double r = 0.0;
            for (int64_t j = 0; j < d; ++j) {
                const double v = out.at(i, j) - mix.comps[k].mean[static_cast<size_t>(j)];
                r += v * v;
            }
            if (r < best) {
                best = r;
                bk = k;
            }
        }
        if (best <= 0.45 * 0.45) {
            for (int64_t j = 0; j < d; ++j) {
                const double mean_j = sums[bk][static_cast<size_t>(j)] / static_cast<double>(counts[bk]);
                const double v = out.at(i, j) - mean_j;
                trace += v * v;
            }
            ++used;
        }
    }
    trace /= static_cast<double>(used);
    const double expect_trace = 2.0 * 0.15 * 0.15;
    CHECK(std::abs(trace - expect_trace) <= 0.10 * expect_trace);
}

TEST_CASE("ode: zero score under VE leaves x unchanged") {
    const SdeSpec spec = ve_spec();
    Rng rng(23);
    Tensor x = Tensor::randn({6, 2}, rng);
    Tensor out = ode_sample(spec, zero_score(), x, ode_grid(spec, 1.0, 0.0, 100));
    CHECK(t_max_abs_diff(out, x) == 0.0);
}

TEST_CASE("ode: bit deterministic") {
    const SdeSpec spec = vp_spec();
    Rng rng(29);
    Tensor x = Tensor::randn({6, 2}, rng);
    ScoreFn fn = diffused_gaussian_score(spec, 1.0);
    Tensor a = ode_sample(spec, fn, x, ode_grid(spec, 1.0, 0.0, 500));
    Tensor b = ode_sample(spec, fn, x, ode_grid(spec, 1.0, 0.0, 500));
    CHECK(t_max_abs_diff(a, b) == 0.0);
}

TEST_CASE("ode transport: terminal std matches the data std within 2%") {
    const SdeSpec spec = vp_spec();
    const double v0 = 4.0;  // data N(0, 2^2)
    const int64_t n = 20000;
    Rng rng(31);
    const KernelStats kT = perturbation_kernel(spec, spec.T);
    const double vT = kT.mean_coef * kT.mean_coef * v0 + kT.std * kT.std;
    Tensor x = t_scale(Tensor::randn({n, 1}, rng), std::sqrt(vT));
    Tensor out = ode_sample(spec, diffused_gaussian_score(spec, v0), x,
                            ode_grid(spec, spec.T, 0.0, 2000));
    std::vector<double> xs(out.data.begin(), out.data.end());
    const double sd = std::sqrt(test::var_of(xs));
    CHECK(std::abs(sd - 2.0) / 2.0 <= 0.02);

    // quantile mapping: deterministic transport preserves ordering, so the
    // q-th sample quantile should map near 2 * Phi^-1(q); check the medians
    std::sort(xs.begin(), xs.end());
    CHECK(std::abs(xs[static_cast<size_t>(n / 2)]) <= 0.05);
}

TEST_CASE("more predictor steps monotonically improve the gmm benchmark") {
    const SdeSpec spec = ve_spec();
    GaussianMixture mix = gmm8_mixture(2);
    ScoreFn oracle = [&](const Tensor& x, double t) { return gmm_score(mix, x, t, spec); };
    Rng ref_rng(37);
    Tensor ref = mix.sample(4000, ref_rng);

    // estimator noise floor: energy distance between two fresh ground-truth
    // draws of the same size; the trend is only resolvable above it
    Rng floor_rng(38);
    const double floor = energy_distance(mix.sample(4000, floor_rng), ref);

    auto run = [&](int64_t steps) {
        Rng rng(41);
        Tensor x = t_scale(Tensor::randn({4000, 2}, rng), terminal_prior_std(spec));
        SamplerConfig cfg;
        cfg.steps = steps;
        Tensor out = pc_sample(spec, oracle, x, spec.T, 0.0, cfg, rng);
        return energy_distance(out, ref);
    };
    const double e100 = run(100), e300 = run(300), e1000 = run(1000);
    // monotone within 5% slack plus the measured noise floor
    CHECK(e300 <= e100 * 1.05 + floor);
    CHECK(e1000 <= e300 * 1.05 + floor);
    CHECK(e1000 <= e100 * 1.05 + floor);
}

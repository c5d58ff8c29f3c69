#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "dinof/data.hpp"
#include "dinof/gmm.hpp"
#include "dinof/metrics.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dinof;

namespace {
SdeSpec ve_spec() {
    SdeSpec s;
    s.family = SdeFamily::VE;
    return s;
}
}  // namespace

TEST_CASE("gmm8: mode occupancy is balanced") {
    Rng rng(2024);
    ToyDistribution dist = ToyDistribution::named("gmm8");
    Tensor x = sample_dataset(dist, 8000, rng);
    auto occ = mode_occupancy(x, dist.mixture());
    REQUIRE(occ.size() == 8);
    for (double o : occ) CHECK(std::abs(o - 0.125) <= 0.015);
}

TEST_CASE("single gaussian: sample mean within CLT bound") {
    Rng rng(7);
    ToyDistribution dist = ToyDistribution::named("single_gaussian", 2);
    Tensor x = sample_dataset(dist, 100000, rng);
    // 4 standard errors of the mean: 4 / sqrt(n) = 0.0126; spec bound 0.02
    for (int64_t j = 0; j < 2; ++j) {
        double m = 0.0;
        for (int64_t i = 0; i < x.shape[0]; ++i) m += x.at(i, j);
        m /= static_cast<double>(x.shape[0]);
        CHECK(std::abs(m) <= 0.02);
    }
}

TEST_CASE("sample_dataset: n=1 has shape [1,d]") {
    Rng rng(1);
    Tensor x = sample_dataset(ToyDistribution::named("gmm8"), 1, rng);
    CHECK(x.shape == std::vector<int64_t>{1, 2});
}

TEST_CASE("sample_dataset: deterministic under seed, all kinds draw") {
    for (const char* name : {"gmm8", "two_moons", "checkerboard", "swiss_roll", "single_gaussian"}) {
        Rng r1(5), r2(5);
        ToyDistribution d = ToyDistribution::named(name);
        Tensor a = d.sample(200, r1);
        Tensor b = d.sample(200, r2);
        CHECK(t_max_abs_diff(a, b) == 0.0);
        CHECK(a.all_finite());
    }
    CHECK_THROWS_AS(ToyDistribution::named("no_such"), std::invalid_argument);
}

TEST_CASE("gmm8 generalizes to d>2 with means on coordinate axes") {
    GaussianMixture mix = gmm8_mixture(5);
    CHECK(mix.dim == 5);
    CHECK(mix.comps.size() == 8);
    for (const auto& c : mix.comps) {
        int nonzero = 0;
        for (double v : c.mean)
            if (v != 0.0) ++nonzero;
        CHECK(nonzero == 1);
    }
}

TEST_CASE("energy distance: identical sets give exactly zero") {
    Rng rng(3);
    Tensor a = Tensor::randn({50, 2}, rng);
    CHECK(energy_distance(a, a) == 0.0);
}

TEST_CASE("energy distance: separated Gaussians exceed the 99th permutation percentile") {
    Rng rng(11);
    Tensor a = Tensor::randn({2000, 1}, rng);
    Tensor b = Tensor::randn({2000, 1}, rng);
    for (int64_t i = 0; i < b.shape[0]; ++i) b.at(i, 0) += 5.0;
    Rng prng(12);
    auto pt = energy_permutation_test(a, b, 99, prng);
    CHECK(pt.statistic > pt.percentile99);
    CHECK(pt.pvalue <= 0.01);
}

TEST_CASE("energy distance: invariant under a common rigid rotation") {
    Rng rng(13);
    Tensor a = Tensor::randn({120, 2}, rng);
    Tensor b = Tensor::randn({150, 2}, rng);
    const double th = 0.83;
    auto rot = [&](const Tensor& x) {
        Tensor y = x;
        for (int64_t i = 0; i < x.shape[0]; ++i) {
            y.at(i, 0) = std::cos(th) * x.at(i, 0) - std::sin(th) * x.at(i, 1);
            y.at(i, 1) = std::sin(th) * x.at(i, 0) + std::cos(th) * x.at(i, 1);
        }
        return y;
    };
    CHECK(energy_distance(rot(a), rot(b)) ==
          doctest::Approx(energy_distance(a, b)).epsilon(1e-12));
}

TEST_CASE("mmd: disjoint halves of one distribution sit inside the permutation band") {
    Rng rng(17);
    Tensor pool = Tensor::randn({1200, 2}, rng);
    Tensor a({600, 2}), b({600, 2});
    std::copy(pool.data.begin(), pool.data.begin() + 1200, a.data.begin());
    std::copy(pool.data.begin() + 1200, pool.data.end(), b.data.begin());
    const double bw = median_heuristic_bandwidth(a, b);
    const double observed = mmd_rbf(a, b, bw);

    // permutation band for the MMD under H0
    Rng prng(18);
    std::vector<double> null_stats;
    Tensor merged = pool;
    for (int p = 0; p < 60; ++p) {
        for (int64_t i = merged.shape[0] - 1; i > 0; --i) {
            const auto j = static_cast<int64_t>(prng.below(static_cast<uint64_t>(i + 1)));
            for (int64_t c = 0; c < 2; ++c) std::swap(merged.at(i, c), merged.at(j, c));
        }
        Tensor pa({600, 2}), pb({600, 2});
        std::copy(merged.data.begin(), merged.data.begin() + 1200, pa.data.begin());
        std::copy(merged.data.begin() + 1200, merged.data.end(), pb.data.begin());
        null_stats.push_back(mmd_rbf(pa, pb, bw));
    }
    std::sort(null_stats.begin(), null_stats.end());
    CHECK(observed <= null_stats[static_cast<size_t>(0.95 * 60)]);
}

TEST_CASE("score_mse: the analytic score against itself is zero") {
    Rng rng(19);
    GaussianMixture mix = gmm8_mixture(2);
    const SdeSpec spec = ve_spec();
    ScoreFn oracle = [&](const Tensor& x, double t) { return gmm_score(mix, x, t, spec); };
    const double mse = score_mse(oracle, mix, spec, {0.2, 0.5, 0.8}, 256, rng);
    CHECK(mse == 0.0);
}

TEST_CASE("mode coverage: collapsed sampler sees 1 of 8 modes") {
    ToyDistribution dist = ToyDistribution::named("gmm8");
    GaussianMixture mix = dist.mixture();
    Rng rng(23);
    // all samples hug the first mode
    Tensor x({500, 2});
    for (int64_t i = 0; i < 500; ++i) {
        x.at(i, 0) = mix.comps[0].mean[0] + 0.1 * rng.normal();
        x.at(i, 1) = mix.comps[0].mean[1] + 0.1 * rng.normal();
    }
    CHECK(mode_coverage(x, dist) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK_THROWS_AS(mode_coverage(x, ToyDistribution::named("two_moons")), std::invalid_argument);
}

TEST_CASE("metrics symmetry and order invariance") {
    Rng rng(29);
    Tensor a = Tensor::randn({90, 2}, rng);
    Tensor b = Tensor::randn({110, 2}, rng);
    CHECK(energy_distance(a, b) == doctest::Approx(energy_distance(b, a)).epsilon(1e-12));
    const double bw = median_heuristic_bandwidth(a, b);
    CHECK(mmd_rbf(a, b, bw) == doctest::Approx(mmd_rbf(b, a, bw)).epsilon(1e-12));

    // permuting rows leaves both unchanged
    Tensor ap = a;
    for (int64_t i = a.shape[0] - 1; i > 0; --i) {
        const auto j = static_cast<int64_t>(rng.below(static_cast<uint64_t>(i + 1)));
        for (int64_t c = 0; c < 2; ++c) std::swap(ap.at(i, c), ap.at(j, c));
    }
    CHECK(energy_distance(ap, b) == doctest::Approx(energy_distance(a, b)).epsilon(1e-12));
}

TEST_CASE("permutation machinery: H0 rejection rate is calibrated") {
    // 400 trials at alpha = 0.05 with an exact-level test (99 permutations,
    // reject when p <= 0.05); expect 5% +- 2%
    Rng rng(31);
    int rejections = 0;
    const int trials = 400;
    for (int trial = 0; trial < trials; ++trial) {
        Tensor a = Tensor::randn({100, 1}, rng);
        Tensor b = Tensor::randn({100, 1}, rng);
        auto pt = energy_permutation_test(a, b, 99, rng);
        if (pt.pvalue <= 0.05) rejections += 1;
    }
    const double rate = static_cast<double>(rejections) / trials;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
}

TEST_CASE("gmm_score: analytic single-gaussian reduction") {
    // K=1, mu=0, Sigma=I, VE: score = -x / (1 + sigma(t)^2)
    GaussianMixture mix;
    mix.dim = 2;
    GaussianComponent c;
    c.weight = 1.0;
    c.mean = {0.0, 0.0};
    c.cov = {1.0, 0.0, 0.0, 1.0};
    mix.comps.push_back(c);
    const SdeSpec spec = ve_spec();
    Rng rng(37);
    Tensor x = Tensor::randn({16, 2}, rng);
    for (double t : {0.1, 0.6, 1.0}) {
        const double sig = perturbation_kernel(spec, t).std;
        Tensor s = gmm_score(mix, x, t, spec);
        for (int64_t i = 0; i < x.numel(); ++i)
            CHECK(s[i] == doctest::Approx(-x[i] / (1.0 + sig * sig)).epsilon(1e-10));
    }
}

TEST_CASE("gmm_score: continuity toward the data score at the eps floor") {
    GaussianMixture mix = gmm8_mixture(2);
    const SdeSpec spec = ve_spec();
    Rng rng(41);
    Tensor x = mix.sample(64, rng);
    Tensor near = gmm_score(mix, x, kEpsFloor, spec);
    Tensor at0 = gmm_score(mix, x, 0.0, spec);
    // VE sigma(eps) ~ sigma_min, so the scores differ only through the tiny
    // added variance; relative difference stays small
    for (int64_t i = 0; i < x.numel(); ++i)
        CHECK(std::abs(near[i] - at0[i]) <= 5e-3 * std::max(1.0, std::abs(at0[i])));
}

TEST_CASE("gmm_score: symmetric two-component mixture vanishes at the midpoint") {
    GaussianMixture mix = GaussianMixture::isotropic(2, {{-2.0, 0.0}, {2.0, 0.0}}, 0.5);
    const SdeSpec spec = ve_spec();
    Tensor x({1, 2});  // midpoint on the symmetry axis
    Tensor s = gmm_score(mix, x, 0.3, spec);
    CHECK(std::abs(s.at(0, 0)) <= 1e-12);
    CHECK(std::abs(s.at(0, 1)) <= 1e-12);
}

TEST_CASE("gmm sampling matches analytic density (moment check)") {
    // mixture sampler vs analytic mean/cov of the diffused mixture
    GaussianMixture mix = GaussianMixture::isotropic(2, {{-1.0, 0.0}, {3.0, 1.0}}, 0.4);
    Rng rng(43);
    Tensor x = mix.sample(60000, rng);
    double m0 = 0.0, m1 = 0.0;
    for (int64_t i = 0; i < x.shape[0]; ++i) {
        m0 += x.at(i, 0);
        m1 += x.at(i, 1);
    }
    m0 /= static_cast<double>(x.shape[0]);
    m1 /= static_cast<double>(x.shape[0]);
    CHECK(m0 == doctest::Approx(1.0).epsilon(0.05));   // (-1+3)/2
    CHECK(m1 == doctest::Approx(0.5).epsilon(0.05));   // (0+1)/2
}

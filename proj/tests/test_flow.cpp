#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "dinof/adam.hpp"
#include "dinof/flow.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dinof;

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Random non-trivial parameters (the default construction is the identity).
void randomize(FlowModel& m, Rng& rng, double scale = 0.4) {
    for (Tensor* p : m.param_ptrs())
        for (double& v : p->data) v = scale * rng.normal();
    m.initialized = true;
}

Tensor flow_point(const FlowModel& m, const std::vector<double>& x) {
    Tensor t({1, static_cast<int64_t>(x.size())});
    for (size_t j = 0; j < x.size(); ++j) t.at(0, static_cast<int64_t>(j)) = x[j];
    return t;
}

}  // namespace

TEST_CASE("identity flow: z is the permuted input with zero logdet") {
    Rng rng(1);
    FlowModel m = FlowModel::create(4, 3, 16, 2.0, rng);
    m.initialized = true;  // unit actnorm
    Tensor x = Tensor::randn({6, 4}, rng);
    auto [z, logdet] = m.forward(x);
    for (int64_t i = 0; i < logdet.numel(); ++i) CHECK(logdet[i] == 0.0);

    // composition of the fixed permutations applied to x
    Tensor expect = x;
    for (const FlowBlock& b : m.blocks) {
        Tensor y(expect.shape);
        for (int64_t i = 0; i < y.shape[0]; ++i)
            for (int64_t j = 0; j < 4; ++j) y.at(i, j) = expect.at(i, b.perm[static_cast<size_t>(j)]);
        expect = y;
    }
    CHECK(t_max_abs_diff(z, expect) == 0.0);

    // inverse is the un-permutation
    CHECK(t_max_abs_diff(m.inverse(z), x) == 0.0);
}

TEST_CASE("uninitialized actnorm is a state error in strict mode") {
    Rng rng(2);
    FlowModel m = FlowModel::create(2, 2, 8, 2.0, rng);
    Tensor x = Tensor::randn({3, 2}, rng);
    CHECK_THROWS_AS(m.forward(x), std::logic_error);
    CHECK_NOTHROW(m.forward(x, false));
}

TEST_CASE("round trip: inverse(forward(x)) = x over 100 seeds") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        FlowModel m = FlowModel::create(2 + static_cast<int64_t>(seed % 5), 4, 24, 2.0, rng);
        randomize(m, rng);
        Tensor x = Tensor::randn({8, m.dim}, rng);
        auto [z, logdet] = m.forward(x);
        (void)logdet;
        CHECK(t_max_abs_diff(m.inverse(z), x) <= 1e-8);
    }
}

TEST_CASE("two-sided inverse: forward(inverse(z)) = z") {
    Rng rng(7);
    FlowModel m = FlowModel::create(3, 5, 16, 2.0, rng);
    randomize(m, rng);
    Tensor z = Tensor::randn({10, 3}, rng);
    auto [z2, logdet] = m.forward(m.inverse(z));
    (void)logdet;
    CHECK(t_max_abs_diff(z2, z) <= 1e-8);
}

TEST_CASE("batch duplicate rows give duplicate outputs") {
    Rng rng(9);
    FlowModel m = FlowModel::create(2, 4, 16, 2.0, rng);
    randomize(m, rng);
    Tensor x({3, 2});
    for (int64_t i = 0; i < 3; ++i) {
        x.at(i, 0) = 1.3;
        x.at(i, 1) = -0.4;
    }
    auto [z, logdet] = m.forward(x);
    for (int64_t i = 1; i < 3; ++i) {
        CHECK(z.at(i, 0) == z.at(0, 0));
        CHECK(z.at(i, 1) == z.at(0, 1));
        CHECK(logdet[i] == logdet[0]);
    }
}

TEST_CASE("single-coupling logdet matches a numerical 2x2 Jacobian") {
    Rng rng(11);
    FlowModel m = FlowModel::create(2, 1, 8, 2.0, rng);
    randomize(m, rng, 0.7);
    const std::vector<double> x0 = {0.3, -1.1};
    auto [z, analytic] = m.forward(flow_point(m, x0));

    const double h = 1e-6;
    std::vector<double> jac(4);
    for (int64_t j = 0; j < 2; ++j) {
        std::vector<double> xp = x0, xm = x0;
        xp[static_cast<size_t>(j)] += h;
        xm[static_cast<size_t>(j)] -= h;
        auto [zp, lp] = m.forward(flow_point(m, xp));
        auto [zm, lm] = m.forward(flow_point(m, xm));
        for (int64_t i = 0; i < 2; ++i)
            jac[static_cast<size_t>(i * 2 + j)] = (zp.at(0, i) - zm.at(0, i)) / (2.0 * h);
    }
    const double numeric = test::lu_log_abs_det(jac, 2);
    CHECK(test::rel_err(analytic[0], numeric) <= 1e-5);
}

TEST_CASE("logdet correctness for d in {2,4,8} against the numerical Jacobian") {
    for (int64_t d : {2, 4, 8}) {
        Rng rng(100 + static_cast<uint64_t>(d));
        FlowModel m = FlowModel::create(d, 3, 16, 2.0, rng);
        randomize(m, rng, 0.5);
        std::vector<double> x0(static_cast<size_t>(d));
        for (auto& v : x0) v = rng.normal();
        auto [z, analytic] = m.forward(flow_point(m, x0));

        const double h = 1e-6;
        std::vector<double> jac(static_cast<size_t>(d * d));
        for (int64_t j = 0; j < d; ++j) {
            std::vector<double> xp = x0, xm = x0;
            xp[static_cast<size_t>(j)] += h;
            xm[static_cast<size_t>(j)] -= h;
            auto [zp, lp] = m.forward(flow_point(m, xp));
            auto [zm, lm] = m.forward(flow_point(m, xm));
            for (int64_t i = 0; i < d; ++i)
                jac[static_cast<size_t>(i * d + j)] = (zp.at(0, i) - zm.at(0, i)) / (2.0 * h);
        }
        const double numeric = test::lu_log_abs_det(jac, d);
        INFO("d=", d);
        CHECK(test::rel_err(analytic[0], numeric) <= 1e-5);
    }
}

TEST_CASE("identity flow NLL equals the standard normal negative log density") {
    Rng rng(13);
    FlowModel m = FlowModel::create(2, 2, 8, 2.0, rng);
    m.initialized = true;
    Tensor x = Tensor::randn({64, 2}, rng);
    double expect = 0.0;
    for (int64_t i = 0; i < 64; ++i) {
        const double q = x.at(i, 0) * x.at(i, 0) + x.at(i, 1) * x.at(i, 1);
        expect += 0.5 * q + kLog2Pi;
    }
    expect /= 64.0;
    CHECK(m.nll(x) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("scaling actnorm scales shifts logdet by d log c per sample") {
    // identity couplings (zero heads) so only the diagonal scale matters
    Rng rng(17);
    FlowModel m = FlowModel::create(3, 1, 8, 2.0, rng);
    for (int64_t j = 0; j < 3; ++j) {
        m.blocks[0].actnorm.log_scale[j] = 0.2 * rng.normal();
        m.blocks[0].actnorm.bias[j] = rng.normal();
    }
    m.initialized = true;
    Tensor x = Tensor::randn({4, 3}, rng);
    auto [z0, ld0] = m.forward(x);
    (void)z0;
    const double c = 1.7;
    for (int64_t j = 0; j < 3; ++j) m.blocks[0].actnorm.log_scale[j] += std::log(c);
    auto [z1, ld1] = m.forward(x);
    (void)z1;
    for (int64_t i = 0; i < 4; ++i)
        CHECK(ld1[i] - ld0[i] == doctest::Approx(3.0 * std::log(c)).epsilon(1e-12));
}

TEST_CASE("nll build path matches plain nll and its gradient passes FD") {
    Rng rng(19);
    FlowModel m = FlowModel::create(2, 1, 3, 2.0, rng);
    randomize(m, rng, 0.5);
    Tensor x = Tensor::randn({12, 2}, rng);

    std::vector<Tensor> params = m.params_copy();
    Tape tape;
    Var nll = m.nll_build(tape, tape.leaves(params), x);
    CHECK(nll.value()[0] == doctest::Approx(m.nll(x)).epsilon(1e-12));

    auto res = test::check_gradients(
        params,
        [&](Tape& t, const std::vector<Var>& pv) { return m.nll_build(t, pv, x); }, 1e-5);
    CHECK(res.max_rel_err <= 1e-4);
}

TEST_CASE("actnorm data initialization whitens the first batch") {
    Rng rng(23);
    FlowModel m = FlowModel::create(2, 3, 8, 2.0, rng);
    Tensor x({256, 2});
    for (int64_t i = 0; i < 256; ++i) {
        x.at(i, 0) = 3.0 + 2.0 * rng.normal();
        x.at(i, 1) = -1.0 + 0.5 * rng.normal();
    }
    m.init_actnorm(x);
    CHECK(m.initialized);

    // first actnorm output should be zero mean unit variance per dimension
    Tensor y({256, 2});
    for (int64_t i = 0; i < 256; ++i)
        for (int64_t j = 0; j < 2; ++j)
            y.at(i, j) = x.at(i, j) * std::exp(m.blocks[0].actnorm.log_scale[j]) +
                         m.blocks[0].actnorm.bias[j];
    for (int64_t j = 0; j < 2; ++j) {
        double mean = 0.0, sq = 0.0;
        for (int64_t i = 0; i < 256; ++i) mean += y.at(i, j);
        mean /= 256.0;
        for (int64_t i = 0; i < 256; ++i) sq += (y.at(i, j) - mean) * (y.at(i, j) - mean);
        CHECK(std::abs(mean) <= 1e-10);
        CHECK(std::sqrt(sq / 256.0) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("2-D density from the flow integrates to one (trapezoidal quadrature)") {
    Rng rng(29);
    FlowModel m = FlowModel::create(2, 3, 12, 2.0, rng);
    randomize(m, rng, 0.3);

    // locate the support: push latent draws through the inverse
    Tensor z = Tensor::randn({4000, 2}, rng);
    Tensor xs = m.inverse(z);
    double mean[2] = {0, 0}, sd[2] = {0, 0};
    for (int64_t j = 0; j < 2; ++j) {
        for (int64_t i = 0; i < xs.shape[0]; ++i) mean[j] += xs.at(i, j);
        mean[j] /= static_cast<double>(xs.shape[0]);
        for (int64_t i = 0; i < xs.shape[0]; ++i)
            sd[j] += (xs.at(i, j) - mean[j]) * (xs.at(i, j) - mean[j]);
        sd[j] = std::sqrt(sd[j] / static_cast<double>(xs.shape[0]));
    }

    // grid covering 6 standard deviations each side
    const int G = 301;
    double lo[2], hi[2], step[2];
    for (int j = 0; j < 2; ++j) {
        lo[j] = mean[j] - 6.0 * sd[j];
        hi[j] = mean[j] + 6.0 * sd[j];
        step[j] = (hi[j] - lo[j]) / (G - 1);
    }
    Tensor grid({static_cast<int64_t>(G) * G, 2});
    for (int a = 0; a < G; ++a)
        for (int b = 0; b < G; ++b) {
            grid.at(a * G + b, 0) = lo[0] + a * step[0];
            grid.at(a * G + b, 1) = lo[1] + b * step[1];
        }
    auto [zg, logdet] = m.forward(grid);
    double integral = 0.0;
    for (int a = 0; a < G; ++a)
        for (int b = 0; b < G; ++b) {
            const int64_t i = a * G + b;
            const double q = zg.at(i, 0) * zg.at(i, 0) + zg.at(i, 1) * zg.at(i, 1);
            const double logp = -0.5 * q - kLog2Pi + logdet[i];
            double w = 1.0;
            if (a == 0 || a == G - 1) w *= 0.5;
            if (b == 0 || b == G - 1) w *= 0.5;
            integral += w * std::exp(logp);
        }
    integral *= step[0] * step[1];
    CHECK(integral == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("trained flow on N(0,I) data approaches the gaussian entropy") {
    // d = 2: NLL floor is d/2 ln(2 pi e) = 2.8379
    Rng rng(31);
    FlowModel m = FlowModel::create(2, 2, 16, 2.0, rng);
    AdamParams hp;
    hp.lr = 2e-3;
    std::vector<Tensor> params = m.params_copy();
    std::vector<AdamState> opt = make_adam_states(params);
    for (int iter = 0; iter < 600; ++iter) {
        Tensor x = Tensor::randn({256, 2}, rng);
        if (!m.initialized) m.init_actnorm(x);
        Tape tape;
        std::vector<Var> pv = tape.leaves(params);
        Var nll = m.nll_build(tape, pv, x);
        tape.backward(nll);
        std::vector<Tensor> grads;
        for (Var v : pv) grads.push_back(tape.grad(v));
        adam_step_all(params, grads, opt, hp);
        m.set_params(params);
    }
    Tensor eval_batch = Tensor::randn({8192, 2}, rng);
    CHECK(m.nll(eval_batch) == doctest::Approx(2.8379).epsilon(0.02));
}

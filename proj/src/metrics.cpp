#include "dinof/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dinof/parallel.hpp"

namespace dinof {

namespace {

void require_points(const char* op, const Tensor& a) {
    if (a.rank() != 2 || a.shape[0] < 1)
        throw std::invalid_argument(std::string(op) + ": expected non-empty [n,d] tensor, got " +
                                    a.shape_str());
}

double dist(const double* x, const double* y, int64_t d) {
    double s = 0.0;
    for (int64_t j = 0; j < d; ++j) {
        const double v = x[j] - y[j];
        s += v * v;
    }
    return std::sqrt(s);
}

// mean over all ordered pairs (including the zero diagonal for within-sums)
double mean_cross_dist(const Tensor& a, const Tensor& b) {
    const int64_t n = a.shape[0], m = b.shape[0], d = a.shape[1];
    std::vector<double> row(static_cast<size_t>(n), 0.0);
    parallel_for(n, [&](int64_t i0, int64_t i1) {
        for (int64_t i = i0; i < i1; ++i) {
            const double* ai = a.data.data() + i * d;
            double s = 0.0;
            for (int64_t j = 0; j < m; ++j) s += dist(ai, b.data.data() + j * d, d);
            row[static_cast<size_t>(i)] = s;
        }
    });
    double total = 0.0;
    for (double v : row) total += v;
    return total / (static_cast<double>(n) * static_cast<double>(m));
}

}  // namespace

double energy_distance(const Tensor& a, const Tensor& b) {
    require_points("energy_distance", a);
    require_points("energy_distance", b);
    if (a.shape[1] != b.shape[1])
        throw std::invalid_argument("energy_distance: dimension mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
    return 2.0 * mean_cross_dist(a, b) - mean_cross_dist(a, a) - mean_cross_dist(b, b);
}

namespace {
Tensor prefix_rows(const Tensor& a, int64_t cap) {
    if (a.shape[0] <= cap) return a;
    Tensor out({cap, a.shape[1]});
    std::copy(a.data.begin(), a.data.begin() + cap * a.shape[1], out.data.begin());
    return out;
}
}  // namespace

double median_heuristic_bandwidth(const Tensor& a, const Tensor& b) {
    require_points("median_heuristic", a);
    require_points("median_heuristic", b);
    const Tensor pa = prefix_rows(a, 2048), pb = prefix_rows(b, 2048);
    const int64_t n = pa.shape[0], m = pb.shape[0], d = pa.shape[1];
    std::vector<double> all;
    all.reserve(static_cast<size_t>((n + m) * (n + m - 1) / 2));
    auto row = [&](int64_t i) {
        return i < n ? pa.data.data() + i * d : pb.data.data() + (i - n) * d;
    };
    for (int64_t i = 0; i < n + m; ++i)
        for (int64_t j = i + 1; j < n + m; ++j) all.push_back(dist(row(i), row(j), d));
    if (all.empty()) return 1.0;
    const size_t mid = all.size() / 2;
    std::nth_element(all.begin(), all.begin() + static_cast<long>(mid), all.end());
    double med = all[mid];
    return med > 0.0 ? med : 1.0;
}

double mmd_rbf(const Tensor& a, const Tensor& b, double bandwidth) {
    require_points("mmd_rbf", a);
    require_points("mmd_rbf", b);
    if (a.shape[1] != b.shape[1])
        throw std::invalid_argument("mmd_rbf: dimension mismatch");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("mmd_rbf: bandwidth must be positive");
    const int64_t n = a.shape[0], m = b.shape[0], d = a.shape[1];
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    auto ksum_within = [&](const Tensor& x) {
        const int64_t N = x.shape[0];
        std::vector<double> row(static_cast<size_t>(N), 0.0);
        parallel_for(N, [&](int64_t i0, int64_t i1) {
            for (int64_t i = i0; i < i1; ++i) {
                double s = 0.0;
                for (int64_t j = 0; j < N; ++j) {
                    if (i == j) continue;
                    const double r = dist(x.data.data() + i * d, x.data.data() + j * d, d);
                    s += std::exp(-r * r * inv);
                }
                row[static_cast<size_t>(i)] = s;
            }
        });
        double total = 0.0;
        for (double v : row) total += v;
        return total;
    };
    auto ksum_cross = [&]() {
        std::vector<double> row(static_cast<size_t>(n), 0.0);
        parallel_for(n, [&](int64_t i0, int64_t i1) {
            for (int64_t i = i0; i < i1; ++i) {
                double s = 0.0;
                for (int64_t j = 0; j < m; ++j) {
                    const double r = dist(a.data.data() + i * d, b.data.data() + j * d, d);
                    s += std::exp(-r * r * inv);
                }
                row[static_cast<size_t>(i)] = s;
            }
        });
        double total = 0.0;
        for (double v : row) total += v;
        return total;
    };
    double term_a = n > 1 ? ksum_within(a) / (static_cast<double>(n) * (n - 1)) : 0.0;
    double term_b = m > 1 ? ksum_within(b) / (static_cast<double>(m) * (m - 1)) : 0.0;
    double term_c = 2.0 * ksum_cross() / (static_cast<double>(n) * m);
    return term_a + term_b - term_c;
}

double mmd_rbf(const Tensor& a, const Tensor& b) {
    return mmd_rbf(a, b, median_heuristic_bandwidth(a, b));
}

double score_mse(const ScoreFn& fn, const GaussianMixture& mix, const SdeSpec& spec,
                 const std::vector<double>& t_grid, int64_t n_points, Rng& rng) {
    if (t_grid.empty()) throw std::invalid_argument("score_mse: empty time grid");
    double total = 0.0;
    int64_t count = 0;
    for (double t : t_grid) {
        Tensor x0 = mix.sample(n_points, rng);
        auto [xt, eps] = sample_marginal(spec, x0, t, rng);
        (void)eps;
        Tensor truth = gmm_score(mix, xt, t, spec);
        Tensor est = fn(xt, t);
        require_same_shape("score_mse", truth, est);
        for (int64_t i = 0; i < truth.numel(); ++i) {
            const double dv = truth[i] - est[i];
            total += dv * dv;
        }
        count += truth.shape[0];
    }
    return total / static_cast<double>(count);
}

std::vector<double> mode_occupancy(const Tensor& a, const GaussianMixture& mix) {
    require_points("mode_occupancy", a);
    if (a.shape[1] != mix.dim) throw std::invalid_argument("mode_occupancy: dimension mismatch");
    const size_t K = mix.comps.size();
    const int64_t n = a.shape[0], d = mix.dim;
    std::vector<double> radius(K);
    for (size_t k = 0; k < K; ++k) {
        // 3 sigma acceptance radius from the largest covariance diagonal
        double vmax = 0.0;
        for (int64_t j = 0; j < d; ++j)
            vmax = std::max(vmax, mix.comps[k].cov[static_cast<size_t>(j * d + j)]);
        radius[k] = 3.0 * std::sqrt(vmax);
    }
    std::vector<int64_t> counts(K, 0);
    for (int64_t i = 0; i < n; ++i) {
        double best = 1e300;
        size_t best_k = 0;
        for (size_t k = 0; k < K; ++k) {
            const double r = dist(a.data.data() + i * d, mix.comps[k].mean.data(), d);
            if (r < best) {
                best = r;
                best_k = k;
            }
        }
        if (best <= radius[best_k]) counts[best_k] += 1;
    }
    std::vector<double> occ(K);
    for (size_t k = 0; k < K; ++k) occ[k] = static_cast<double>(counts[k]) / static_cast<double>(n);
    return occ;
}

double mode_coverage(const Tensor& a, const ToyDistribution& dist) {
    if (!dist.has_mixture())
        throw std::invalid_argument("mode_coverage: undefined for dataset '" + dist.name() + "'");
    const GaussianMixture mix = dist.mixture();
    const auto occ = mode_occupancy(a, mix);
    int64_t covered = 0;
    for (double o : occ)
        if (o >= 0.01) covered += 1;
    return static_cast<double>(covered) / static_cast<double>(occ.size());
}

PermutationTest energy_permutation_test(const Tensor& a, const Tensor& b, int n_perms, Rng& rng) {
    require_points("energy_permutation_test", a);
    require_points("energy_permutation_test", b);
    if (a.shape[1] != b.shape[1])
        throw std::invalid_argument("energy_permutation_test: dimension mismatch");
    if (n_perms < 1) throw std::invalid_argument("energy_permutation_test: n_perms must be >= 1");

    // Cap the pooled set so the distance matrix stays small.
    int64_t n = a.shape[0], m = b.shape[0];
    if (n + m > 4096) {
        const double f = 4096.0 / static_cast<double>(n + m);
        n = std::max<int64_t>(1, static_cast<int64_t>(std::floor(f * static_cast<double>(n))));
        m = std::max<int64_t>(1, static_cast<int64_t>(std::floor(f * static_cast<double>(m))));
    }
    const Tensor pa = prefix_rows(a, n), pb = prefix_rows(b, m);
    const int64_t P = n + m, d = pa.shape[1];

    std::vector<double> D(static_cast<size_t>(P * P), 0.0);
    auto row = [&](int64_t i) {
        return i < n ? pa.data.data() + i * d : pb.data.data() + (i - n) * d;
    };
    parallel_for(P, [&](int64_t i0, int64_t i1) {
        for (int64_t i = i0; i < i1; ++i)
            for (int64_t j = 0; j < P; ++j)
                D[static_cast<size_t>(i * P + j)] = dist(row(i), row(j), d);
    });

    double sall = 0.0;  // permutation invariant
    for (double v : D) sall += v;

    auto stat_for = [&](const std::vector<int64_t>& idx) {
        // first n indices form group A, rest group B
        double saa = 0.0, sbb = 0.0;
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < n; ++j) saa += D[static_cast<size_t>(idx[static_cast<size_t>(i)] * P + idx[static_cast<size_t>(j)])];
        for (int64_t i = n; i < P; ++i)
            for (int64_t j = n; j < P; ++j) sbb += D[static_cast<size_t>(idx[static_cast<size_t>(i)] * P + idx[static_cast<size_t>(j)])];
        double sab = (sall - saa - sbb) / 2.0;  // unordered cross sum
        return 2.0 * sab / (static_cast<double>(n) * m) - saa / (static_cast<double>(n) * n) -
               sbb / (static_cast<double>(m) * m);
    };

    std::vector<int64_t> idx(static_cast<size_t>(P));
    std::iota(idx.begin(), idx.end(), 0);
    PermutationTest out{};
    out.statistic = stat_for(idx);

    std::vector<double> null_stats(static_cast<size_t>(n_perms));
    int n_ge = 0;
    for (int p = 0; p < n_perms; ++p) {
        for (int64_t i = P - 1; i > 0; --i)
            std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(rng.below(static_cast<uint64_t>(i + 1)))]);
        null_stats[static_cast<size_t>(p)] = stat_for(idx);
        if (null_stats[static_cast<size_t>(p)] >= out.statistic) n_ge += 1;
    }
    std::sort(null_stats.begin(), null_stats.end());
    auto percentile = [&](double q) {
        // nearest-rank on the sorted null sample
        auto r = static_cast<size_t>(std::ceil(q * static_cast<double>(n_perms)));
        if (r < 1) r = 1;
        if (r > static_cast<size_t>(n_perms)) r = static_cast<size_t>(n_perms);
        return null_stats[r - 1];
    };
    out.percentile95 = percentile(0.95);
    out.percentile99 = percentile(0.99);
    out.pvalue = (1.0 + n_ge) / (1.0 + static_cast<double>(n_perms));
    return out;
}

}  // namespace dinof

#include "dinof/score.hpp"

#include <cmath>
#include <stdexcept>

namespace dinof {

Tensor time_embedding(const Tensor& t_batch, int64_t embed_dim) {
    if (t_batch.rank() != 1)
        throw std::invalid_argument("time_embedding: t must be rank-1, got " + t_batch.shape_str());
    if (embed_dim < 2 || embed_dim % 2 != 0)
        throw std::invalid_argument("time_embedding: embed_dim must be even and >= 2");
    const int64_t b = t_batch.shape[0], half = embed_dim / 2;
    Tensor out({b, embed_dim});
    for (int64_t j = 0; j < half; ++j) {
        const double freq =
            half == 1 ? 1.0 : std::pow(1000.0, static_cast<double>(j) / static_cast<double>(half - 1));
        for (int64_t i = 0; i < b; ++i) {
            const double a = freq * t_batch[i];
            out.at(i, j) = std::sin(a);
            out.at(i, half + j) = std::cos(a);
        }
    }
    return out;
}

MlpScoreModel MlpScoreModel::create(int64_t dim, std::vector<int64_t> hidden, int64_t embed_dim,
                                    Rng& rng) {
    if (dim < 1) throw std::invalid_argument("score model: dim must be >= 1");
    if (hidden.empty()) throw std::invalid_argument("score model: need at least one hidden layer");
    MlpScoreModel m;
    m.dim = dim;
    m.hidden = std::move(hidden);
    m.embed_dim = embed_dim;
    int64_t in = dim + embed_dim;
    for (int64_t h : m.hidden) {
        Tensor w = Tensor::randn({in, h}, rng);
        const double s = std::sqrt(1.0 / static_cast<double>(in));
        for (double& v : w.data) v *= s;
        m.params.push_back(std::move(w));
        m.params.push_back(Tensor({h}));
        in = h;
    }
    m.params.push_back(Tensor({in, dim}));  // zero head
    m.params.push_back(Tensor({dim}));
    return m;
}

Tensor MlpScoreModel::eval(const Tensor& x, const Tensor& t_batch) const {
    if (x.rank() != 2 || x.shape[1] != dim)
        throw std::invalid_argument("score: x must be [n," + std::to_string(dim) + "], got " +
                                    x.shape_str());
    if (t_batch.rank() != 1 || t_batch.shape[0] != x.shape[0])
        throw std::invalid_argument("score: t batch size mismatch");
    Tensor h = t_concat_cols(x, time_embedding(t_batch, embed_dim));
    const size_t layers = hidden.size() + 1;
    for (size_t l = 0; l < layers; ++l) {
        h = t_affine(h, params[2 * l], params[2 * l + 1]);
        if (l + 1 < layers) h = t_tanh(h);
    }
    return h;
}

Tensor MlpScoreModel::eval(const Tensor& x, double t) const {
    return eval(x, Tensor::full({x.shape[0]}, t));
}

Var MlpScoreModel::build(Tape& tape, const std::vector<Var>& param_vars, Var x,
                         const Tensor& t_batch) const {
    if (param_vars.size() != params.size())
        throw std::invalid_argument("score build: parameter count mismatch");
    Var h = tape.concat(x, tape.leaf(time_embedding(t_batch, embed_dim)));
    const size_t layers = hidden.size() + 1;
    for (size_t l = 0; l < layers; ++l) {
        h = tape.affine(h, param_vars[2 * l], param_vars[2 * l + 1]);
        if (l + 1 < layers) h = tape.tanh(h);
    }
    return h;
}

ScoreFn MlpScoreModel::as_score_fn() const {
    MlpScoreModel snapshot = *this;
    return [snapshot](const Tensor& x, double t) { return snapshot.eval(x, t); };
}

std::vector<std::string> MlpScoreModel::param_names() const {
    std::vector<std::string> names;
    for (size_t l = 0; l * 2 < params.size(); ++l) {
        names.push_back("score.W" + std::to_string(l));
        names.push_back("score.b" + std::to_string(l));
    }
    return names;
}

int64_t MlpScoreModel::param_count() const {
    int64_t n = 0;
    for (const Tensor& p : params) n += p.numel();
    return n;
}

void draw_dsm_batch(const SdeSpec& spec, int64_t batch, int64_t dim, double t_lo, double t_hi,
                    Rng& rng, Tensor& t_out, Tensor& eps_out) {
    if (!(t_lo >= 0.0 && t_lo < t_hi && t_hi <= spec.T))
        throw std::invalid_argument("dsm: need 0 <= t_lo < t_hi <= T");
    t_out = Tensor({batch});
    for (int64_t i = 0; i < batch; ++i) t_out[i] = rng.uniform(t_lo, t_hi);
    eps_out = Tensor::randn({batch, dim}, rng);
}

namespace {

// Per-row constants of the loss: x_t rows, the -eps/sigma target baked as
// eps * (1/sigma), and the weight vector lambda(t).
struct DsmParts {
    Tensor xt;          // [B,d]
    Tensor eps_over_s;  // [B,d]
    Tensor lambda;      // [B]
};

DsmParts dsm_parts(const SdeSpec& spec, const Tensor& x0, const Tensor& t_batch,
                   const Tensor& eps, LossWeighting weighting) {
    if (x0.rank() != 2) throw std::invalid_argument("dsm: x0 must be [n,d]");
    require_same_shape("dsm", x0, eps);
    if (t_batch.rank() != 1 || t_batch.shape[0] != x0.shape[0])
        throw std::invalid_argument("dsm: t batch size mismatch");
    const int64_t b = x0.shape[0], d = x0.shape[1];
    DsmParts p{Tensor({b, d}), Tensor({b, d}), Tensor({b})};
    for (int64_t i = 0; i < b; ++i) {
        const KernelStats ks = perturbation_kernel(spec, t_batch[i]);
        if (!(ks.std > 0.0))
            throw std::domain_error("dsm: sigma(t)=0 at t=" + std::to_string(t_batch[i]));
        for (int64_t j = 0; j < d; ++j) {
            p.xt.at(i, j) = ks.mean_coef * x0.at(i, j) + ks.std * eps.at(i, j);
            p.eps_over_s.at(i, j) = eps.at(i, j) / ks.std;
        }
        p.lambda[i] = weighting == LossWeighting::SIGMA2 ? ks.std * ks.std : 1.0;
    }
    return p;
}

}  // namespace

Var dsm_loss_build(Tape& tape, const MlpScoreModel& model, const std::vector<Var>& param_vars,
                   const SdeSpec& spec, const Tensor& x0, const Tensor& t_batch,
                   const Tensor& eps, LossWeighting weighting) {
    DsmParts p = dsm_parts(spec, x0, t_batch, eps, weighting);
    Var s = model.build(tape, param_vars, tape.leaf(std::move(p.xt)), t_batch);
    Var resid = tape.add(s, tape.leaf(std::move(p.eps_over_s)));
    Var per_sample = tape.sum_rows(tape.square(resid));
    return tape.mean(tape.mul(per_sample, tape.leaf(std::move(p.lambda))));
}

double dsm_loss_eval(const ScoreFn& fn, const SdeSpec& spec, const Tensor& x0,
                     const Tensor& t_batch, const Tensor& eps, LossWeighting weighting) {
    DsmParts p = dsm_parts(spec, x0, t_batch, eps, weighting);
    const int64_t b = x0.shape[0], d = x0.shape[1];
    double total = 0.0;
    // score networks are conditioned on a shared scalar t, so evaluate row-wise
    for (int64_t i = 0; i < b; ++i) {
        Tensor row({1, d});
        for (int64_t j = 0; j < d; ++j) row.at(0, j) = p.xt.at(i, j);
        Tensor s = fn(row, t_batch[i]);
        double q = 0.0;
        for (int64_t j = 0; j < d; ++j) {
            const double r = s.at(0, j) + p.eps_over_s.at(i, j);
            q += r * r;
        }
        total += p.lambda[i] * q;
    }
    return total / static_cast<double>(b);
}

}  // namespace dinof

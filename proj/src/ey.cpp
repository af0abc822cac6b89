#include "gepey/ey.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gepey/eig.hpp"

namespace gepey {

namespace {

// Splits a symmetric quartic term <v, v2> into its diagonal and off-diagonal
// contributions; the two add up to the Frobenius inner product exactly.
void split_penalty(const Matrix& v, const Matrix& v2, double& norm_part, double& orth_part) {
    norm_part = 0.0;
    orth_part = 0.0;
    for (std::size_t r = 0; r < v.rows; ++r)
        for (std::size_t c = 0; c < v.cols; ++c) {
            const double term = v(r, c) * v2(r, c);
            if (r == c)
                norm_part += term;
            else
                orth_part += term;
        }
}

struct StochasticEval {
    EyEvaluation eval;           // gradient left empty
    std::vector<Matrix> grads;   // per view
};

StochasticEval stochastic_core(const MultiviewBatch& batch, const MultiviewBatch& batch2,
                               const WeightSet& weights) {
    const std::size_t views = batch.view_count();
    if (views < 2) throw TooFewViews("ey_loss_stochastic: need at least two views");
    if (batch2.view_count() != views || weights.view_count() != views)
        throw ShapeMismatch("ey_loss_stochastic: view counts disagree");

    std::vector<Matrix> raw1(views), raw2(views), grams(views);
    for (std::size_t i = 0; i < views; ++i) {
        if (batch.views[i].cols != weights.weights[i].rows ||
            batch2.views[i].cols != weights.weights[i].rows)
            throw ShapeMismatch("ey_loss_stochastic: weight height does not match view width");
        raw1[i] = batch.views[i] * weights.weights[i];
        raw2[i] = batch2.views[i] * weights.weights[i];
        grams[i] = mul_at_b(weights.weights[i], weights.weights[i]);
    }
    RepresentationCore core = representation_core(raw1, raw2, weights.alpha, &grams);

    StochasticEval out;
    out.eval = std::move(core.eval);
    out.grads.reserve(views);
    for (std::size_t i = 0; i < views; ++i) {
        const double a = weights.alpha[i];
        Matrix grad = mul_at_b(batch.views[i], core.g1[i]) + mul_at_b(batch2.views[i], core.g2[i]);
        if (a != 0.0) {
            const Matrix direct = weights.weights[i] * core.vsum;
            for (std::size_t j = 0; j < grad.data.size(); ++j)
                grad.data[j] += 2.0 * a * direct.data[j];
        }
        out.grads.push_back(std::move(grad));
    }
    return out;
}

}  // namespace

RepresentationCore representation_core(const std::vector<Matrix>& raw1,
                                       const std::vector<Matrix>& raw2,
                                       const std::vector<double>& alpha,
                                       const std::vector<Matrix>* weight_grams) {
    const std::size_t views = raw1.size();
    if (views < 2) throw TooFewViews("representation_core: need at least two views");
    if (raw2.size() != views || alpha.size() != views)
        throw ShapeMismatch("representation_core: view counts disagree");
    if (weight_grams && weight_grams->size() != views)
        throw ShapeMismatch("representation_core: gram count disagrees with views");
    const std::size_t m1 = raw1.front().rows;
    const std::size_t m2 = raw2.front().rows;
    const std::size_t k = raw1.front().cols;
    if (m1 < 2 || m2 < 2)
        throw TooFewSamples("representation_core: need two samples per batch");
    for (std::size_t i = 0; i < views; ++i) {
        if (raw1[i].rows != m1 || raw2[i].rows != m2 || raw1[i].cols != k || raw2[i].cols != k)
            throw ShapeMismatch("representation_core: representation blocks do not conform");
        if (!(alpha[i] >= 0.0 && alpha[i] <= 1.0))
            throw ConfigInvalid("representation_core: alpha outside [0, 1]");
        if (alpha[i] != 0.0 && !weight_grams)
            throw ConfigInvalid("representation_core: nonzero alpha needs weight grams");
    }

    std::vector<Matrix> z1(views), z2(views);
    for (std::size_t i = 0; i < views; ++i) {
        z1[i] = center_columns(raw1[i]);
        z2[i] = center_columns(raw2[i]);
    }

    // V = sum_i alpha_i U_i^T U_i + (1 - alpha_i) Var(Z_i), per batch.
    Matrix v1(k, k), v2(k, k);
    for (std::size_t i = 0; i < views; ++i) {
        const double a = alpha[i];
        const Matrix var1 = mul_at_b(z1[i], z1[i]);
        const Matrix var2 = mul_at_b(z2[i], z2[i]);
        for (std::size_t j = 0; j < k * k; ++j) {
            double direct = 0.0;
            if (a != 0.0) direct = a * (*weight_grams)[i].data[j];
            v1.data[j] += direct + (1.0 - a) * var1.data[j] / double(m1 - 1);
            v2.data[j] += direct + (1.0 - a) * var2.data[j] / double(m2 - 1);
        }
    }

    // Cross term on batch 1: sum over ordered view pairs i != j.
    Matrix zsum1(m1, k);
    for (std::size_t i = 0; i < views; ++i)
        for (std::size_t j = 0; j < m1 * k; ++j) zsum1.data[j] += z1[i].data[j];
    Matrix cross = mul_at_b(zsum1, zsum1);
    for (std::size_t i = 0; i < views; ++i) {
        const Matrix gram = mul_at_b(z1[i], z1[i]);
        for (std::size_t j = 0; j < k * k; ++j) cross.data[j] -= gram.data[j];
    }
    for (std::size_t j = 0; j < k * k; ++j) cross.data[j] /= double(m1 - 1);

    RepresentationCore out;
    out.eval.reward = 2.0 * trace(cross);
    split_penalty(v1, v2, out.eval.norm_penalty, out.eval.orth_penalty);
    out.eval.loss = -out.eval.reward + out.eval.norm_penalty + out.eval.orth_penalty;

    out.g1.reserve(views);
    out.g2.reserve(views);
    for (std::size_t i = 0; i < views; ++i) {
        const double a = alpha[i];
        Matrix g1 = z1[i] * v2;
        for (std::size_t j = 0; j < m1 * k; ++j)
            g1.data[j] = (-4.0 * (zsum1.data[j] - z1[i].data[j]) + 2.0 * (1.0 - a) * g1.data[j]) /
                         double(m1 - 1);
        Matrix g2 = z2[i] * v1;
        for (std::size_t j = 0; j < m2 * k; ++j)
            g2.data[j] *= 2.0 * (1.0 - a) / double(m2 - 1);
        out.g1.push_back(std::move(g1));
        out.g2.push_back(std::move(g2));
    }
    out.vsum = v1 + v2;
    return out;
}

EyEvaluation ey_loss(const GepPair& pair, const Matrix& u) {
    const std::size_t d = pair.a.rows;
    if (u.rows != d || pair.a.cols != d || pair.b.rows != d || pair.b.cols != d)
        throw ShapeMismatch("ey_loss: shapes do not conform");

    const Matrix au = pair.a * u;
    const Matrix bu = pair.b * u;
    const Matrix uau = mul_at_b(u, au);
    const Matrix ubu = mul_at_b(u, bu);

    EyEvaluation out;
    out.reward = 2.0 * trace(uau);
    split_penalty(ubu, ubu, out.norm_penalty, out.orth_penalty);
    out.loss = -out.reward + out.norm_penalty + out.orth_penalty;

    out.gradient = bu * ubu;
    for (std::size_t j = 0; j < out.gradient.data.size(); ++j)
        out.gradient.data[j] = -4.0 * au.data[j] + 4.0 * out.gradient.data[j];
    if (!all_finite(out.gradient)) throw NonFinite("ey_loss: gradient not finite");
    return out;
}

EyEvaluation ey_loss_stochastic(const MultiviewBatch& batch, const MultiviewBatch& batch2,
                                const WeightSet& weights) {
    StochasticEval core = stochastic_core(batch, batch2, weights);
    core.eval.gradient = stack_blocks(core.grads);
    return core.eval;
}

std::vector<Matrix> ey_gradients_per_view(const MultiviewBatch& batch,
                                          const MultiviewBatch& batch2,
                                          const WeightSet& weights) {
    return stochastic_core(batch, batch2, weights).grads;
}

Matrix ey_gradient_update(const Matrix& u, const Matrix& a_hat, const Matrix& b_hat,
                          const Matrix& b_hat2, double lr) {
    if (a_hat.rows != u.rows || a_hat.cols != u.rows || !b_hat.same_shape(a_hat) ||
        !b_hat2.same_shape(a_hat))
        throw ShapeMismatch("ey_gradient_update: shapes do not conform");
    const Matrix au = a_hat * u;
    const Matrix bu = b_hat * u;
    const Matrix bu2 = b_hat2 * u;
    const Matrix t1 = bu * mul_at_b(u, bu2);
    const Matrix t2 = bu2 * mul_at_b(u, bu);
    Matrix out = u;
    for (std::size_t j = 0; j < out.data.size(); ++j)
        out.data[j] -= lr * (-4.0 * au.data[j] + 2.0 * t1.data[j] + 2.0 * t2.data[j]);
    return out;
}

Matrix gaussian_init(std::size_t d, std::size_t k, Rng& rng) {
    return rng.gaussian_matrix(d, k, 1.0 / std::sqrt(double(d)));
}

FullBatchResult train_full_batch(const GepPair& pair, std::size_t k, const TrainConfig& config) {
    const std::size_t d = pair.a.rows;
    if (k == 0 || k > d) throw KTooLarge("train_full_batch: K outside [1, D]");

    Rng rng(config.seed);
    std::vector<Matrix> params{gaussian_init(d, k, rng)};
    OptimizerState opt = make_optimizer(config.optimizer, params);

    FullBatchResult out;
    for (std::size_t t = 0; t < config.steps; ++t) {
        EyEvaluation eval = ey_loss(pair, params[0]);
        out.trace.push_back({t, eval.loss, eval.reward, eval.norm_penalty, eval.orth_penalty});
        std::vector<Matrix> grads{std::move(eval.gradient)};
        step(opt, params, grads);
    }
    const EyEvaluation last = ey_loss(pair, params[0]);
    out.trace.push_back({config.steps, last.loss, last.reward, last.norm_penalty, last.orth_penalty});
    out.weights = std::move(params[0]);
    return out;
}

StochasticResult train_stochastic(const MultiviewBatch& data, std::size_t k,
                                  const std::vector<double>& alpha, const TrainConfig& config) {
    const std::size_t views = data.view_count();
    if (views < 2) throw TooFewViews("train_stochastic: need at least two views");
    const std::size_t n = data.samples();
    std::size_t dmin = data.views.front().cols;
    for (const Matrix& v : data.views) dmin = std::min(dmin, v.cols);
    if (k == 0 || k > dmin) throw KTooLarge("train_stochastic: K outside [1, min view width]");
    const std::size_t m = config.batch_size;
    if (m < 2) throw ConfigInvalid("train_stochastic: batch size must be at least 2");
    if (!config.iid_batches && 2 * m > n)
        throw ConfigInvalid("train_stochastic: epoch pairing needs 2*batch_size <= samples");
    if (config.iid_batches && m > n)
        throw ConfigInvalid("train_stochastic: batch size exceeds sample count");
    if (config.iid_batches && config.steps == 0)
        throw ConfigInvalid("train_stochastic: iid mode needs an explicit step budget");

    Rng rng(config.seed);
    std::vector<Matrix> params;
    params.reserve(views);
    for (const Matrix& v : data.views) params.push_back(gaussian_init(v.cols, k, rng));
    OptimizerState opt = make_optimizer(config.optimizer, params);

    StochasticResult out;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;

    const std::size_t cap = config.steps;
    std::size_t done = 0;
    auto one_step = [&](const std::vector<std::size_t>& i1, const std::vector<std::size_t>& i2) {
        const MultiviewBatch b1 = take_rows(data, i1);
        const MultiviewBatch b2 = take_rows(data, i2);
        const WeightSet w = make_weights(params, alpha);
        StochasticEval core = stochastic_core(b1, b2, w);
        out.trace.push_back({done, core.eval.loss, core.eval.reward, core.eval.norm_penalty,
                             core.eval.orth_penalty});
        step(opt, params, core.grads);
        ++done;
    };

    if (config.iid_batches) {
        std::vector<std::size_t> i1(m), i2(m);
        while (done < cap) {
            rng.shuffle(idx);
            std::copy(idx.begin(), idx.begin() + m, i1.begin());
            rng.shuffle(idx);
            std::copy(idx.begin(), idx.begin() + m, i2.begin());
            one_step(i1, i2);
        }
    } else if (config.epochs > 0 || cap > 0) {
        // Whichever budget runs out first ends training.
        const std::size_t pairs_per_epoch = n / (2 * m);
        std::vector<std::size_t> i1(m), i2(m);
        for (std::size_t e = 0; config.epochs == 0 || e < config.epochs; ++e) {
            if (cap > 0 && done >= cap) break;
            rng.shuffle(idx);
            for (std::size_t t = 0; t < pairs_per_epoch; ++t) {
                if (cap > 0 && done >= cap) break;
                std::copy(idx.begin() + 2 * t * m, idx.begin() + (2 * t + 1) * m, i1.begin());
                std::copy(idx.begin() + (2 * t + 1) * m, idx.begin() + (2 * t + 2) * m, i2.begin());
                one_step(i1, i2);
            }
        }
    }

    out.weights = make_weights(std::move(params), alpha);
    return out;
}

ExtractedSpectrum extract_spectrum(const GepPair& pair, const Matrix& u_hat) {
    const std::size_t d = pair.a.rows;
    if (u_hat.rows != d) throw ShapeMismatch("extract_spectrum: height does not match pencil");
    if (u_hat.cols == 0 || u_hat.cols > d) throw KTooLarge("extract_spectrum: bad column count");

    const Matrix m_a = symmetrized(mul_at_b(u_hat, pair.a * u_hat));
    const Matrix m_b = symmetrized(mul_at_b(u_hat, pair.b * u_hat));
    GepSolution small;
    try {
        small = gep_solve(GepPair{m_a, m_b}, u_hat.cols);
    } catch (const NotPositiveDefinite&) {
        throw SingularProjection("extract_spectrum: projected B is singular");
    }
    ExtractedSpectrum out;
    out.spectrum = std::move(small.spectrum);
    out.vectors = u_hat * small.vectors;
    fix_column_signs(out.vectors);
    return out;
}

}  // namespace gepey

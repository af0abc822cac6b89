#include "gepey/optim.hpp"

#include <cmath>

namespace gepey {

OptimizerKind optimizer_kind_from_name(const std::string& name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "momentum") return OptimizerKind::momentum;
    if (name == "adam") return OptimizerKind::adam;
    throw ConfigInvalid("unknown optimizer: " + name);
}

OptimizerState make_optimizer(const OptimizerConfig& config, const std::vector<Matrix>& params) {
    if (!(config.lr > 0.0)) throw ConfigInvalid("optimizer: lr must be positive");
    OptimizerState state;
    state.config = config;
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const Matrix& p : params) {
        state.m.emplace_back(p.rows, p.cols);
        state.v.emplace_back(p.rows, p.cols);
    }
    return state;
}

void step(OptimizerState& state, std::vector<Matrix>& params, const std::vector<Matrix>& grads) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ShapeMismatch("step: parameter list does not match state");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (!params[i].same_shape(grads[i]) || !params[i].same_shape(state.m[i]))
            throw ShapeMismatch("step: parameter and gradient shapes differ");

    const OptimizerConfig& c = state.config;
    ++state.step_count;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double* p = params[i].data.data();
        const double* g = grads[i].data.data();
        double* m = state.m[i].data.data();
        double* v = state.v[i].data.data();
        const std::size_t n = params[i].data.size();
        switch (c.kind) {
            case OptimizerKind::sgd:
                for (std::size_t j = 0; j < n; ++j) p[j] -= c.lr * g[j];
                break;
            case OptimizerKind::momentum:
                for (std::size_t j = 0; j < n; ++j) {
                    m[j] = c.momentum * m[j] + g[j];
                    p[j] -= c.lr * m[j];
                }
                break;
            case OptimizerKind::adam: {
                const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_count));
                const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_count));
                for (std::size_t j = 0; j < n; ++j) {
                    m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
                    v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
                    const double mhat = m[j] / bc1;
                    const double vhat = v[j] / bc2;
                    p[j] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
                }
                break;
            }
        }
    }
}

namespace {

LinearOp dense_op(const Matrix& m) {
    return [&m](const Matrix& v) { return m * v; };
}

Matrix column(const Matrix& m, std::size_t c) {
    Matrix out(m.rows, 1);
    for (std::size_t r = 0; r < m.rows; ++r) out(r, 0) = m(r, c);
    return out;
}

}  // namespace

Matrix sgha_update(const Matrix& w, const LinearOp& a_hat, const LinearOp& b_hat,
                   const LinearOp& a_hat2, double lr) {
    const Matrix aw = a_hat(w);
    if (!aw.same_shape(w)) throw ShapeMismatch("sgha_update: pencil action changed shape");
    const Matrix gram = mul_at_b(w, a_hat2(w));  // K x K
    const Matrix bwg = b_hat(w) * gram;
    Matrix out = w;
    for (std::size_t j = 0; j < out.data.size(); ++j)
        out.data[j] += lr * (2.0 * aw.data[j] - 2.0 * bwg.data[j]);
    return out;
}

Matrix sgha_update(const Matrix& w, const Matrix& a_hat, const Matrix& b_hat,
                   const Matrix& a_hat2, double lr) {
    if (a_hat.rows != w.rows || a_hat.cols != w.rows || !b_hat.same_shape(a_hat) ||
        !a_hat2.same_shape(a_hat))
        throw ShapeMismatch("sgha_update: shapes do not conform");
    return sgha_update(w, dense_op(a_hat), dense_op(b_hat), dense_op(a_hat2), lr);
}

GammaEgState make_gamma_eg_state(std::size_t d, std::size_t k, double rate) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigInvalid("gamma_eg: rate must be in [0,1)");
    GammaEgState state;
    state.aux = Matrix(d, k);
    state.rate = rate;
    return state;
}

Matrix gamma_eg_update(const Matrix& w, GammaEgState& state, const LinearOp& a_hat,
                       const LinearOp& b_hat2, double lr) {
    const std::size_t d = w.rows;
    const std::size_t k = w.cols;
    if (!state.aux.same_shape(w)) throw ShapeMismatch("gamma_eg_update: state does not match weights");

    Matrix out = w;
    // a_cols[j] caches the pencil action on the already-updated column j.
    std::vector<Matrix> a_cols(k);
    for (std::size_t i = 0; i < k; ++i) {
        const Matrix wi = column(out, i);

        // Refresh the auxiliary estimate of B w_i before using it.
        const Matrix bwi = b_hat2(wi);
        if (bwi.rows != d || bwi.cols != 1)
            throw ShapeMismatch("gamma_eg_update: pencil action changed shape");
        for (std::size_t r = 0; r < d; ++r)
            state.aux(r, i) = state.step_count == 0
                                  ? bwi(r, 0)
                                  : state.rate * state.aux(r, i) + (1.0 - state.rate) * bwi(r, 0);

        const Matrix awi = a_hat(wi);
        double wb_i = 0.0, wa_i = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            wb_i += wi(r, 0) * state.aux(r, i);
            wa_i += wi(r, 0) * awi(r, 0);
        }

        // Rayleigh quotient numerator as the reward direction.
        std::vector<double> dir(d);
        for (std::size_t r = 0; r < d; ++r) dir[r] = awi(r, 0) * wb_i - state.aux(r, i) * wa_i;

        // Push away from already-updated predecessors, Gram-Schmidt style in
        // the pencil geometry.
        for (std::size_t j = 0; j < i; ++j) {
            const Matrix& awj = a_cols[j];
            double wb_j = 0.0, a_ij = 0.0;
            for (std::size_t r = 0; r < d; ++r) {
                wb_j += out(r, j) * state.aux(r, j);
                a_ij += wi(r, 0) * awj(r, 0);
            }
            if (std::fabs(wb_j) < 1e-12) wb_j = wb_j < 0.0 ? -1e-12 : 1e-12;
            const double scale = a_ij / wb_j;
            for (std::size_t r = 0; r < d; ++r)
                dir[r] -= (awj(r, 0) * wb_i - state.aux(r, i) * a_ij) * scale;
        }

        std::vector<double> wnew(d);
        for (std::size_t r = 0; r < d; ++r) wnew[r] = wi(r, 0) + lr * dir[r];
        const double n = norm2(wnew);
        if (!(n > 1e-12)) throw ZeroColumn("gamma_eg_update: column collapsed to zero");
        for (std::size_t r = 0; r < d; ++r) out(r, i) = wnew[r] / n;
        a_cols[i] = a_hat(column(out, i));
    }
    ++state.step_count;
    return out;
}

Matrix gamma_eg_update(const Matrix& w, GammaEgState& state, const Matrix& a_hat,
                       const Matrix& b_hat2, double lr) {
    if (a_hat.rows != w.rows || a_hat.cols != w.rows || !b_hat2.same_shape(a_hat))
        throw ShapeMismatch("gamma_eg_update: shapes do not conform");
    return gamma_eg_update(w, state, dense_op(a_hat), dense_op(b_hat2), lr);
}

}  // namespace gepey

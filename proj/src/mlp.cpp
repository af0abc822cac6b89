#include "gepey/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gepey/cca.hpp"

namespace gepey {

void validate(const Mlp& mlp) {
    if (mlp.layers.empty()) throw ConfigInvalid("mlp: no layers");
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        const Layer& layer = mlp.layers[l];
        if (layer.bias.size() != layer.weight.cols)
            throw ShapeMismatch("mlp: bias length does not match layer width");
        if (l + 1 < mlp.layers.size() && layer.weight.cols != mlp.layers[l + 1].weight.rows)
            throw ShapeMismatch("mlp: consecutive layer shapes do not chain");
    }
    if (mlp.layers.back().activation != Activation::identity)
        throw ConfigInvalid("mlp: final layer must be linear");
}

Mlp make_mlp(std::size_t input_dim, const std::vector<std::size_t>& widths,
             std::size_t output_dim, Rng& rng) {
    if (input_dim == 0 || output_dim == 0) throw ConfigInvalid("make_mlp: zero dimension");
    for (std::size_t w : widths)
        if (w == 0) throw ConfigInvalid("make_mlp: zero hidden width");

    std::vector<std::size_t> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), widths.begin(), widths.end());
    dims.push_back(output_dim);

    Mlp mlp;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.weight = rng.gaussian_matrix(dims[l], dims[l + 1], 1.0 / std::sqrt(double(dims[l])));
        layer.bias.assign(dims[l + 1], 0.0);
        layer.activation = l + 2 < dims.size() ? Activation::relu : Activation::identity;
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

Matrix forward(const Mlp& mlp, const Matrix& x, ForwardCache* cache) {
    validate(mlp);
    if (x.cols != mlp.input_dim()) throw ShapeMismatch("forward: input width does not match");
    if (cache) {
        cache->inputs.clear();
        cache->inputs.reserve(mlp.layers.size());
    }

    Matrix cur = x;
    for (const Layer& layer : mlp.layers) {
        if (cache) cache->inputs.push_back(cur);
        Matrix next = cur * layer.weight;
        for (std::size_t r = 0; r < next.rows; ++r)
            for (std::size_t c = 0; c < next.cols; ++c) next(r, c) += layer.bias[c];
        if (layer.activation == Activation::relu)
            for (double& v : next.data) v = std::max(v, 0.0);
        cur = std::move(next);
    }
    if (cache) cache->output = cur;
    return cur;
}

MlpGradients zero_gradients(const Mlp& mlp) {
    MlpGradients g;
    for (const Layer& layer : mlp.layers) {
        g.weights.emplace_back(layer.weight.rows, layer.weight.cols);
        g.biases.emplace_back(layer.bias.size(), 0.0);
    }
    return g;
}

void accumulate(MlpGradients& acc, const MlpGradients& g) {
    if (acc.weights.size() != g.weights.size())
        throw ShapeMismatch("accumulate: gradient layer counts differ");
    for (std::size_t l = 0; l < acc.weights.size(); ++l) {
        if (!acc.weights[l].same_shape(g.weights[l]) || acc.biases[l].size() != g.biases[l].size())
            throw ShapeMismatch("accumulate: gradient shapes differ");
        for (std::size_t j = 0; j < acc.weights[l].data.size(); ++j)
            acc.weights[l].data[j] += g.weights[l].data[j];
        for (std::size_t j = 0; j < acc.biases[l].size(); ++j)
            acc.biases[l][j] += g.biases[l][j];
    }
}

MlpGradients backward(const Mlp& mlp, const ForwardCache& cache, const Matrix& dz) {
    validate(mlp);
    const std::size_t nl = mlp.layers.size();
    if (cache.inputs.size() != nl) throw ShapeMismatch("backward: cache does not match network");
    if (dz.rows != cache.output.rows || dz.cols != cache.output.cols)
        throw ShapeMismatch("backward: output gradient shape does not match");

    MlpGradients g;
    g.weights.resize(nl);
    g.biases.resize(nl);
    Matrix delta = dz;
    for (std::size_t l = nl; l-- > 0;) {
        const Layer& layer = mlp.layers[l];
        if (layer.activation == Activation::relu) {
            // Post-activation of layer l is the next layer's input.
            const Matrix& post = l + 1 < nl ? cache.inputs[l + 1] : cache.output;
            for (std::size_t j = 0; j < delta.data.size(); ++j)
                if (!(post.data[j] > 0.0)) delta.data[j] = 0.0;
        }
        g.weights[l] = mul_at_b(cache.inputs[l], delta);
        g.biases[l].assign(layer.weight.cols, 0.0);
        for (std::size_t r = 0; r < delta.rows; ++r)
            for (std::size_t c = 0; c < delta.cols; ++c) g.biases[l][c] += delta(r, c);
        if (l > 0) delta = mul_a_bt(delta, layer.weight);
    }
    return g;
}

DeepEyEvaluation backward_ey(const std::vector<Mlp>& mlps, const MultiviewBatch& batch,
                             const MultiviewBatch& batch2, double alpha) {
    const std::size_t views = batch.view_count();
    if (views < 2) throw TooFewViews("backward_ey: need at least two views");
    if (batch2.view_count() != views || mlps.size() != views)
        throw ShapeMismatch("backward_ey: view counts disagree");
    if (alpha != 0.0)
        throw ConfigInvalid("backward_ey: only the pure variance metric is defined here");
    const std::size_t k = mlps.front().output_dim();
    for (const Mlp& net : mlps)
        if (net.output_dim() != k) throw ShapeMismatch("backward_ey: output widths disagree");

    std::vector<ForwardCache> c1(views), c2(views);
    std::vector<Matrix> raw1(views), raw2(views);
    for (std::size_t i = 0; i < views; ++i) {
        raw1[i] = forward(mlps[i], batch.views[i], &c1[i]);
        raw2[i] = forward(mlps[i], batch2.views[i], &c2[i]);
    }
    const std::vector<double> zeros(views, 0.0);
    RepresentationCore core = representation_core(raw1, raw2, zeros, nullptr);

    DeepEyEvaluation out;
    out.loss = core.eval.loss;
    out.reward = core.eval.reward;
    out.norm_penalty = core.eval.norm_penalty;
    out.orth_penalty = core.eval.orth_penalty;
    out.grads.reserve(views);
    for (std::size_t i = 0; i < views; ++i) {
        MlpGradients g = backward(mlps[i], c1[i], core.g1[i]);
        accumulate(g, backward(mlps[i], c2[i], core.g2[i]));
        out.grads.push_back(std::move(g));
    }
    return out;
}

namespace {

std::vector<Matrix> flatten_params(const std::vector<Mlp>& nets) {
    std::vector<Matrix> out;
    for (const Mlp& net : nets)
        for (const Layer& layer : net.layers) {
            out.push_back(layer.weight);
            Matrix b(1, layer.bias.size());
            b.data = layer.bias;
            out.push_back(std::move(b));
        }
    return out;
}

void unflatten_params(const std::vector<Matrix>& params, std::vector<Mlp>& nets) {
    std::size_t at = 0;
    for (Mlp& net : nets)
        for (Layer& layer : net.layers) {
            layer.weight = params[at++];
            layer.bias = params[at++].data;
        }
}

std::vector<Matrix> flatten_grads(const std::vector<MlpGradients>& grads) {
    std::vector<Matrix> out;
    for (const MlpGradients& g : grads)
        for (std::size_t l = 0; l < g.weights.size(); ++l) {
            out.push_back(g.weights[l]);
            Matrix b(1, g.biases[l].size());
            b.data = g.biases[l];
            out.push_back(std::move(b));
        }
    return out;
}

double full_data_score(const std::vector<Matrix>& z, std::size_t k) {
    if (z.size() == 2) return metric_tcc(z[0], z[1], k);
    return metric_tmcc(z);
}

}  // namespace

DeepResult train_deep(const MultiviewBatch& data, const DeepConfig& config) {
    const std::size_t views = data.view_count();
    if (views < 2) throw TooFewViews("train_deep: need at least two views");
    if (config.k == 0) throw KTooLarge("train_deep: K must be positive");
    if (config.train.epochs != 0)
        throw ConfigInvalid("train_deep: budget is steps only");
    const std::size_t n = data.samples();
    const std::size_t m = config.train.batch_size;
    if (m == 1 || m > n)
        throw ConfigInvalid("train_deep: batch size must be 0 (full data) or in [2, samples]");
    if (config.tied)
        for (const Matrix& v : data.views)
            if (v.cols != data.views.front().cols)
                throw ShapeMismatch("train_deep: tied mode needs equal view widths");

    Rng rng(config.train.seed);
    std::vector<Mlp> nets;
    if (config.tied) {
        nets.push_back(make_mlp(data.views.front().cols, config.widths, config.k, rng));
    } else {
        for (const Matrix& v : data.views)
            nets.push_back(make_mlp(v.cols, config.widths, config.k, rng));
    }

    std::vector<Matrix> params = flatten_params(nets);
    OptimizerState opt = make_optimizer(config.train.optimizer, params);

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::vector<std::size_t> i1(m), i2(m);

    auto view_nets = [&]() {
        std::vector<Mlp> out;
        if (config.tied)
            out.assign(views, nets.front());
        else
            out = nets;
        return out;
    };

    DeepResult out;
    double final_loss = 0.0;
    for (std::size_t s = 0; s <= config.train.steps; ++s) {
        const bool last = s == config.train.steps;
        const std::vector<Mlp> current = view_nets();

        MultiviewBatch scratch1, scratch2;
        const MultiviewBatch* b1 = &data;
        const MultiviewBatch* b2 = &data;
        if (m != 0 && !last) {
            rng.shuffle(idx);
            std::copy(idx.begin(), idx.begin() + m, i1.begin());
            rng.shuffle(idx);
            std::copy(idx.begin(), idx.begin() + m, i2.begin());
            scratch1 = take_rows(data, i1);
            scratch2 = take_rows(data, i2);
            b1 = &scratch1;
            b2 = &scratch2;
        }
        DeepEyEvaluation ev = backward_ey(current, *b1, *b2);

        std::vector<Matrix> z(views);
        for (std::size_t i = 0; i < views; ++i) z[i] = forward(current[i], data.views[i]);
        DeepTraceRow row{s, ev.loss, ev.reward, ev.norm_penalty, ev.orth_penalty,
                         full_data_score(z, config.k)};
        out.trace.push_back(row);
        if (last) {
            final_loss = ev.loss;
            // Spectrum of the representations as data views.
            MultiviewBatch zb;
            zb.views = z;
            const GepPair pencil = build_gep(zb, std::vector<double>(views, 0.0));
            const GepSolution top = gep_solve(pencil, config.k);
            double sq = 0.0;
            for (double v : top.spectrum.values) sq += v * v;
            out.mcca_residual = std::fabs(-final_loss - sq);
            break;
        }

        std::vector<MlpGradients> per_net;
        if (config.tied) {
            MlpGradients summed = std::move(ev.grads.front());
            for (std::size_t i = 1; i < views; ++i) accumulate(summed, ev.grads[i]);
            per_net.push_back(std::move(summed));
        } else {
            per_net = std::move(ev.grads);
        }
        std::vector<Matrix> grads = flatten_grads(per_net);
        step(opt, params, grads);
        unflatten_params(params, nets);
    }

    out.models = view_nets();
    return out;
}

}  // namespace gepey

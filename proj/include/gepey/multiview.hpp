#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gepey/matrix.hpp"

namespace gepey {

// Synchronized multiview sample: views[i] is M x D_i, all views share M.
struct MultiviewBatch {
    std::vector<Matrix> views;

    std::size_t samples() const { return views.empty() ? 0 : views.front().rows; }
    std::size_t view_count() const { return views.size(); }
};

inline MultiviewBatch make_batch(std::vector<Matrix> views) {
    if (views.size() < 2) throw TooFewViews("make_batch: need at least two views");
    const std::size_t m = views.front().rows;
    for (const Matrix& v : views) {
        if (v.rows != m) throw ShapeMismatch("make_batch: views disagree on sample count");
        if (!all_finite(v)) throw NonFinite("make_batch: non-finite entries");
    }
    if (m < 2) throw TooFewSamples("make_batch: need at least two samples");
    return MultiviewBatch{std::move(views)};
}

// Rows idx of every view, in the given order.
inline MultiviewBatch take_rows(const MultiviewBatch& b, const std::vector<std::size_t>& idx) {
    MultiviewBatch out;
    out.views.reserve(b.views.size());
    for (const Matrix& v : b.views) {
        Matrix sub(idx.size(), v.cols);
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < v.cols; ++c) sub(r, c) = v(idx[r], c);
        out.views.push_back(std::move(sub));
    }
    return out;
}

// Per-view linear weights sharing a common K, with per-view ridge
// interpolation alpha_i in [0,1] (0 keeps the data variance, 1 replaces it
// by the identity).
struct WeightSet {
    std::vector<Matrix> weights;
    std::vector<double> alpha;

    std::size_t k() const { return weights.empty() ? 0 : weights.front().cols; }
    std::size_t view_count() const { return weights.size(); }
};

inline WeightSet make_weights(std::vector<Matrix> weights, std::vector<double> alpha) {
    if (weights.empty()) throw TooFewViews("make_weights: no views");
    if (alpha.size() != weights.size())
        throw ShapeMismatch("make_weights: one alpha per view required");
    const std::size_t k = weights.front().cols;
    for (const Matrix& w : weights)
        if (w.cols != k) throw ShapeMismatch("make_weights: views disagree on K");
    for (double a : alpha)
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigInvalid("make_weights: alpha outside [0,1]");
    return WeightSet{std::move(weights), std::move(alpha)};
}

// Z^i = X^i U^i for every view.
inline std::vector<Matrix> project(const MultiviewBatch& b, const WeightSet& w) {
    if (b.views.size() != w.weights.size())
        throw ShapeMismatch("project: view count mismatch");
    std::vector<Matrix> z;
    z.reserve(b.views.size());
    for (std::size_t i = 0; i < b.views.size(); ++i) z.push_back(b.views[i] * w.weights[i]);
    return z;
}

inline std::vector<std::size_t> view_dims(const MultiviewBatch& b) {
    std::vector<std::size_t> d;
    d.reserve(b.views.size());
    for (const Matrix& v : b.views) d.push_back(v.cols);
    return d;
}

// Stack per-view blocks into one (sum D_i) x K matrix, view order preserved.
inline Matrix stack_blocks(const std::vector<Matrix>& blocks) {
    std::size_t total = 0;
    const std::size_t k = blocks.empty() ? 0 : blocks.front().cols;
    for (const Matrix& b : blocks) {
        if (b.cols != k) throw ShapeMismatch("stack_blocks: column counts differ");
        total += b.rows;
    }
    Matrix out(total, k);
    std::size_t r0 = 0;
    for (const Matrix& b : blocks) {
        set_block(out, r0, 0, b);
        r0 += b.rows;
    }
    return out;
}

// Inverse of stack_blocks for the given per-view heights.
inline std::vector<Matrix> split_blocks(const Matrix& stacked, const std::vector<std::size_t>& dims) {
    std::size_t total = 0;
    for (std::size_t d : dims) total += d;
    if (total != stacked.rows) throw ShapeMismatch("split_blocks: heights do not add up");
    std::vector<Matrix> out;
    out.reserve(dims.size());
    std::size_t r0 = 0;
    for (std::size_t d : dims) {
        out.push_back(block(stacked, r0, 0, d, stacked.cols));
        r0 += d;
    }
    return out;
}

}  // namespace gepey

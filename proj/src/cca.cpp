#include "gepey/cca.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gepey/ey.hpp"
#include "gepey/svd.hpp"

namespace gepey {

CovarianceModel empirical_model(const MultiviewBatch& batch) {
    const std::size_t views = batch.view_count();
    if (views < 2) throw TooFewViews("empirical_model: need at least two views");
    CovarianceModel model;
    model.var.reserve(views);
    model.cross.assign(views, std::vector<Matrix>(views));
    for (std::size_t i = 0; i < views; ++i)
        model.var.push_back(symmetrized(empirical_cov(batch.views[i], batch.views[i])));
    for (std::size_t i = 0; i < views; ++i)
        for (std::size_t j = i + 1; j < views; ++j)
            model.cross[i][j] = empirical_cov(batch.views[i], batch.views[j]);
    return model;
}

GepPair build_gep(const CovarianceModel& model, const std::vector<double>& alpha, double jitter) {
    const std::size_t views = model.view_count();
    if (views < 2) throw TooFewViews("build_gep: need at least two views");
    if (alpha.size() != views) throw ShapeMismatch("build_gep: one alpha per view required");
    for (double a : alpha)
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigInvalid("build_gep: alpha outside [0,1]");

    std::vector<std::size_t> dims(views), offs(views);
    std::size_t total = 0;
    for (std::size_t i = 0; i < views; ++i) {
        if (model.var[i].rows != model.var[i].cols)
            throw ShapeMismatch("build_gep: variance block not square");
        dims[i] = model.var[i].rows;
        offs[i] = total;
        total += dims[i];
    }

    Matrix a(total, total);
    Matrix b(total, total);
    for (std::size_t i = 0; i < views; ++i) {
        for (std::size_t r = 0; r < dims[i]; ++r) {
            b(offs[i] + r, offs[i] + r) = alpha[i];
            for (std::size_t c = 0; c < dims[i]; ++c)
                b(offs[i] + r, offs[i] + c) += (1.0 - alpha[i]) * model.var[i](r, c);
        }
        for (std::size_t j = i + 1; j < views; ++j) {
            const Matrix& cij = model.cross[i][j];
            if (cij.rows != dims[i] || cij.cols != dims[j])
                throw ShapeMismatch("build_gep: cross block shape is wrong");
            for (std::size_t r = 0; r < dims[i]; ++r)
                for (std::size_t c = 0; c < dims[j]; ++c) {
                    a(offs[i] + r, offs[j] + c) = cij(r, c);
                    a(offs[j] + c, offs[i] + r) = cij(r, c);
                }
        }
    }

    try {
        return make_gep_pair(a, b);
    } catch (const NotPositiveDefinite&) {
        if (!(jitter > 0.0)) throw;
        const double bump = jitter * trace(b) / double(total);
        for (std::size_t r = 0; r < total; ++r) b(r, r) += bump;
        return make_gep_pair(std::move(a), std::move(b));
    }
}

GepPair build_gep(const MultiviewBatch& batch, const std::vector<double>& alpha, double jitter) {
    return build_gep(empirical_model(batch), alpha, jitter);
}

namespace {

CcaResult cca_from_pair(const GepPair& pair, const std::vector<std::size_t>& dims, std::size_t k,
                        const std::vector<double>& alpha) {
    std::size_t dmin = dims.front();
    for (std::size_t d : dims) dmin = std::min(dmin, d);
    if (k == 0 || k > dmin) throw KTooLarge("cca_exact: K outside [1, min view width]");

    const GepSolution sol = gep_solve(pair, k);
    std::vector<Matrix> blocks = split_blocks(sol.vectors, dims);
    if (dims.size() == 2) {
        // Joint normalization puts half the variance in each view; rescale so
        // per-view projections have unit variance in the alpha metric.
        const double root2 = std::sqrt(2.0);
        for (Matrix& blockw : blocks)
            for (double& x : blockw.data) x *= root2;
    }
    CcaResult out;
    out.spectrum = sol.spectrum;
    out.weights = make_weights(std::move(blocks), alpha);
    return out;
}

std::vector<std::size_t> model_dims(const CovarianceModel& model) {
    std::vector<std::size_t> dims;
    dims.reserve(model.var.size());
    for (const Matrix& v : model.var) dims.push_back(v.rows);
    return dims;
}

}  // namespace

CcaResult cca_exact(const CovarianceModel& model, std::size_t k, const std::vector<double>& alpha,
                    double jitter) {
    return cca_from_pair(build_gep(model, alpha, jitter), model_dims(model), k, alpha);
}

CcaResult cca_exact(const MultiviewBatch& batch, std::size_t k, const std::vector<double>& alpha,
                    double jitter) {
    return cca_exact(empirical_model(batch), k, alpha, jitter);
}

std::vector<Matrix> fast_linear_gradient(const MultiviewBatch& batch, const MultiviewBatch& batch2,
                                         const WeightSet& weights) {
    return ey_gradients_per_view(batch, batch2, weights);
}

Matrix apply_cross_cov(const MultiviewBatch& batch, const Matrix& v) {
    const std::size_t views = batch.view_count();
    if (views < 2) throw TooFewViews("apply_cross_cov: need at least two views");
    const std::size_t m = batch.samples();
    if (m < 2) throw TooFewSamples("apply_cross_cov: need at least two samples");
    const std::vector<std::size_t> dims = view_dims(batch);
    const std::vector<Matrix> vb = split_blocks(v, dims);

    std::vector<Matrix> z(views);
    Matrix zsum(m, v.cols);
    for (std::size_t i = 0; i < views; ++i) {
        z[i] = center_columns(batch.views[i] * vb[i]);
        for (std::size_t j = 0; j < zsum.data.size(); ++j) zsum.data[j] += z[i].data[j];
    }
    std::vector<Matrix> out(views);
    for (std::size_t i = 0; i < views; ++i) {
        Matrix rest = zsum - z[i];
        out[i] = mul_at_b(batch.views[i], rest);
        for (double& x : out[i].data) x /= double(m - 1);
    }
    return stack_blocks(out);
}

Matrix apply_ridge_var(const MultiviewBatch& batch, const std::vector<double>& alpha,
                       const Matrix& v) {
    const std::size_t views = batch.view_count();
    if (alpha.size() != views) throw ShapeMismatch("apply_ridge_var: one alpha per view required");
    const std::size_t m = batch.samples();
    if (m < 2) throw TooFewSamples("apply_ridge_var: need at least two samples");
    const std::vector<std::size_t> dims = view_dims(batch);
    const std::vector<Matrix> vb = split_blocks(v, dims);

    std::vector<Matrix> out(views);
    for (std::size_t i = 0; i < views; ++i) {
        const Matrix z = center_columns(batch.views[i] * vb[i]);
        out[i] = mul_at_b(batch.views[i], z);
        for (std::size_t j = 0; j < out[i].data.size(); ++j)
            out[i].data[j] = alpha[i] * vb[i].data[j] +
                             (1.0 - alpha[i]) * out[i].data[j] / double(m - 1);
    }
    return stack_blocks(out);
}

double metric_pcc(const Spectrum& learned, const Spectrum& oracle) {
    if (learned.size() != oracle.size()) throw ShapeMismatch("metric_pcc: spectra sizes differ");
    double num = 0.0, den = 0.0;
    for (double v : learned.values) num += std::max(v, 0.0);
    for (double v : oracle.values) den += v;
    if (!(den > 0.0)) throw ZeroOracle("metric_pcc: oracle spectrum sums to zero");
    return num / den;
}

Spectrum representation_spectrum(const MultiviewBatch& batch, const WeightSet& weights,
                                 double jitter) {
    MultiviewBatch reps;
    reps.views = project(batch, weights);
    const std::vector<double> zero_alpha(reps.views.size(), 0.0);
    return cca_exact(reps, weights.k(), zero_alpha, jitter).spectrum;
}

double metric_tcc(const Matrix& z1, const Matrix& z2, std::size_t k, double jitter) {
    if (z1.rows != z2.rows) throw ShapeMismatch("metric_tcc: sample counts differ");
    if (z1.rows < 2) throw TooFewSamples("metric_tcc: need at least two samples");
    MultiviewBatch reps;
    reps.views = {z1, z2};
    return cca_exact(reps, k, {0.0, 0.0}, jitter).spectrum.sum();
}

double metric_tmcc(const std::vector<Matrix>& zs) {
    const std::size_t views = zs.size();
    if (views < 2) throw TooFewViews("metric_tmcc: need at least two views");
    const std::size_t m = zs.front().rows;
    const std::size_t k = zs.front().cols;
    if (m < 2) throw TooFewSamples("metric_tmcc: need at least two samples");
    for (const Matrix& z : zs)
        if (z.rows != m || z.cols != k) throw ShapeMismatch("metric_tmcc: representations differ in shape");

    std::vector<Matrix> centered;
    centered.reserve(views);
    for (const Matrix& z : zs) centered.push_back(center_columns(z));

    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        double pair_sum = 0.0;
        for (std::size_t i = 0; i < views; ++i)
            for (std::size_t j = 0; j < views; ++j) {
                if (i == j) continue;
                double cij = 0.0, vi = 0.0, vj = 0.0;
                for (std::size_t r = 0; r < m; ++r) {
                    cij += centered[i](r, c) * centered[j](r, c);
                    vi += centered[i](r, c) * centered[i](r, c);
                    vj += centered[j](r, c) * centered[j](r, c);
                }
                const double den = std::sqrt(vi * vj);
                if (den > 0.0) pair_sum += cij / den;
            }
        total += pair_sum / double(views * (views - 1));
    }
    return total;
}

InterlaceReport interlace_check(const MultiviewBatch& batch, const std::vector<Matrix>& projectors,
                                std::size_t k, double jitter) {
    const std::size_t views = batch.view_count();
    if (projectors.size() != views) throw ShapeMismatch("interlace_check: one projector per view");
    MultiviewBatch projected;
    projected.views.reserve(views);
    for (std::size_t i = 0; i < views; ++i) {
        const Matrix& p = projectors[i];
        if (p.rows != batch.views[i].cols)
            throw ShapeMismatch("interlace_check: projector height does not match view width");
        if (numeric_rank(p) < p.cols)
            throw RankDeficient("interlace_check: projector has dependent columns");
        projected.views.push_back(batch.views[i] * p);
    }

    const std::vector<double> zero_alpha(views, 0.0);
    InterlaceReport report;
    report.original = cca_exact(batch, k, zero_alpha, jitter).spectrum.values;
    report.projected = cca_exact(projected, k, zero_alpha, jitter).spectrum.values;
    report.ok = true;
    report.all_equal = true;
    for (std::size_t i = 0; i < k; ++i) {
        const double gap = report.original[i] - report.projected[i];
        report.gaps.push_back(gap);
        report.equality.push_back(std::fabs(gap) < 1e-6);
        if (gap < -1e-8) report.ok = false;
        if (!report.equality.back()) report.all_equal = false;
    }
    return report;
}

}  // namespace gepey

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gepey/cca.hpp"
#include "gepey/errors.hpp"
#include "gepey/gen.hpp"
#include "gepey/rng.hpp"
#include "gepey/ssl.hpp"
#include "gepey/svd.hpp"
#include "support.hpp"

using namespace gepey;

namespace {

bool close(double x, double ref, double tol) {
    return std::abs(x - ref) <= tol * std::max(1.0, std::abs(ref));
}

// Four samples, two exactly uncorrelated unit-variance columns.
Matrix unit_pair() {
    const double s = std::sqrt(3.0) / 2.0;
    return Matrix(4, 2, {s, s, -s, s, s, -s, -s, -s});
}

// Column variances of the projections, both views.
std::vector<double> projection_variances(const Matrix& x1, const Matrix& x2, const Matrix& b1,
                                         const Matrix& b2) {
    std::vector<double> out;
    for (int view = 0; view < 2; ++view) {
        const Matrix z = (view == 0 ? x1 : x2) * (view == 0 ? b1 : b2);
        const Matrix s = empirical_cov(z, z);
        for (std::size_t c = 0; c < s.cols; ++c) out.push_back(s(c, c));
    }
    return out;
}

}  // namespace

TEST_CASE("variance-invariance-covariance loss on hand values") {
    // Identical unit-variance uncorrelated views: reward cancels the variance
    // trace and both penalties vanish.
    const Matrix z = unit_pair();
    VicregParams params;
    const VicregEvaluation perfect = vicreg_loss(z, z, Matrix::identity(2), Matrix::identity(2),
                                                 params);
    CHECK(std::abs(perfect.loss) <= 1e-12);
    CHECK(std::abs(perfect.invariance_reward - 4.0) <= 1e-12);
    CHECK(std::abs(perfect.variance_term - 4.0) <= 1e-12);
    CHECK(std::abs(perfect.covariance_term) <= 1e-12);

    // Zero weights leave only the full variance hinge: alpha per component
    // and view.
    params.alpha = 0.7;
    const VicregEvaluation collapsed = vicreg_loss(z, z, Matrix(2, 2), Matrix(2, 2), params);
    CHECK(std::abs(collapsed.loss - 4.0 * 0.7) <= 1e-15);
    CHECK(max_abs(collapsed.grad1) == 0.0);
    CHECK(max_abs(collapsed.grad2) == 0.0);

    params.alpha = 0.0;
    CHECK_THROWS_AS((void)vicreg_loss(z, z, Matrix::identity(2), Matrix::identity(2), params),
                    ConfigInvalid);
}

TEST_CASE("variance-invariance-covariance loss matches frozen oracle") {
    // Frozen from tools/oracle_dump (vicreg_fixed).
    const Matrix x1(4, 2, {1, 0.5, -0.5, 1, 0.25, -1, -1.5, 0.75});
    const Matrix x2(4, 2, {0.5, -0.25, 1, 0.5, -1, 1.5, 0.25, -0.5});
    const Matrix b1(2, 2, {0.8, -0.3, 0.4, 0.9});
    const Matrix b2(2, 2, {1.1, 0.2, -0.5, 0.7});
    VicregParams params;
    params.alpha = 0.5;
    params.beta = 0.25;
    params.gamma = 1.5;
    const VicregEvaluation e = vicreg_loss(x1, x2, b1, b2, params);
    CHECK(close(e.loss, 6.0726990399874383, 1e-12));
    CHECK(close(e.invariance_reward, -0.36843749999999981, 1e-12));
    CHECK(close(e.variance_term, 5.578530528702716, 1e-12));
    CHECK(close(e.covariance_term, 0.12573101128472217, 1e-12));
    CHECK(close(e.loss, -e.invariance_reward + e.variance_term + e.covariance_term, 1e-12));
}

TEST_CASE("variance-invariance-covariance gradients agree with finite differences") {
    Rng rng(501);
    const Matrix x1 = rng.gaussian_matrix(12, 3);
    const Matrix x2 = rng.gaussian_matrix(12, 4);
    VicregParams params;
    params.alpha = 0.8;
    params.beta = 0.4;
    params.gamma = 1.2;

    int accepted = 0;
    for (int tries = 0; tries < 400 && accepted < 20; ++tries) {
        const Matrix b1 = rng.gaussian_matrix(3, 2);
        const Matrix b2 = rng.gaussian_matrix(4, 2);
        // Keep every projected variance away from the hinge kink at one and
        // from the square-root singularity at zero.
        bool safe = true;
        for (double v : projection_variances(x1, x2, b1, b2))
            if (v < 0.1 || std::abs(v - 1.0) < 0.05) safe = false;
        if (!safe) continue;
        ++accepted;

        const VicregEvaluation e = vicreg_loss(x1, x2, b1, b2, params);
        const Matrix fd1 = test::fd_gradient(
            [&](const Matrix& b) { return vicreg_loss(x1, x2, b, b2, params).loss; }, b1);
        const Matrix fd2 = test::fd_gradient(
            [&](const Matrix& b) { return vicreg_loss(x1, x2, b1, b, params).loss; }, b2);
        CHECK(test::grad_rel_err(e.grad1, fd1) <= 1e-5);
        CHECK(test::grad_rel_err(e.grad2, fd2) <= 1e-5);
    }
    CHECK(accepted == 20);
}

TEST_CASE("cross-correlation loss on hand values") {
    const Matrix z = unit_pair();
    // Identical unit-variance views: the identity cross matrix zeroes the loss.
    const BtEvaluation perfect = barlow_twins_loss(z, z, Matrix::identity(2),
                                                   Matrix::identity(2), 0.5);
    CHECK(std::abs(perfect.loss) <= 1e-12);
    CHECK(std::abs(perfect.reward - 4.0) <= 1e-12);
    CHECK(std::abs(perfect.diag_term - 4.0) <= 1e-12);
    CHECK(std::abs(perfect.offdiag_term) <= 1e-12);
    for (double r : perfect.variance_residual1) CHECK(r <= 1e-12);
    for (double r : perfect.variance_residual2) CHECK(r <= 1e-12);

    // Uncorrelated unit-variance pairs score exactly K.
    Matrix first(2, 1, {1, 0});
    Matrix second(2, 1, {0, 1});
    const BtEvaluation indep = barlow_twins_loss(z, z, first, second, 0.5);
    CHECK(indep.loss == 1.0);
    CHECK(indep.reward == 0.0);

    CHECK_THROWS_AS((void)barlow_twins_loss(z, z, Matrix::identity(2), Matrix::identity(2), 0.0),
                    ConfigInvalid);
}

TEST_CASE("cross-correlation loss matches frozen oracle") {
    // Frozen from tools/oracle_dump (bt_fixed).
    const Matrix x1(4, 2, {1, 0.5, -0.5, 1, 0.25, -1, -1.5, 0.75});
    const Matrix x2(4, 2, {0.5, -0.25, 1, 0.5, -1, 1.5, 0.25, -0.5});
    const Matrix b1(2, 2, {0.9, 0.1, -0.2, 1.0});
    const Matrix b2(2, 2, {1.0, -0.4, 0.3, 0.8});
    const BtEvaluation e = barlow_twins_loss(x1, x2, b1, b2, 0.5);
    CHECK(close(e.loss, 4.7476056572808156, 1e-12));
    CHECK(close(e.reward, -1.8911458333333331, 1e-12));
    CHECK(close(e.diag_term, 2.6219963568793401, 1e-12));
    CHECK(close(e.offdiag_term, 0.23446346706814236, 1e-12));
    const double cref[4] = {-0.17703125, 0.42395833333333338, 0.53776041666666663,
                            -0.76854166666666657};
    for (std::size_t j = 0; j < 4; ++j) CHECK(close(e.cross_cov.data[j], cref[j], 1e-12));
    const double rref[4] = {0.093072916666666616, 0.25734375000000009, 0.50026041666666665,
                            0.050833333333333286};
    CHECK(close(e.variance_residual1[0], rref[0], 1e-12));
    CHECK(close(e.variance_residual1[1], rref[1], 1e-12));
    CHECK(close(e.variance_residual2[0], rref[2], 1e-12));
    CHECK(close(e.variance_residual2[1], rref[3], 1e-12));

    // Re-derive every term from the covariance of the projections.
    const Matrix c = empirical_cov(x1 * b1, x2 * b2);
    double reward = 0.0, diag = 2.0, off = 0.0;
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t col = 0; col < 2; ++col) {
            if (r == col) {
                reward += 2.0 * c(r, r);
                diag += c(r, r) * c(r, r);
            } else {
                off += 0.5 * c(r, col) * c(r, col);
            }
        }
    CHECK(close(e.reward, reward, 1e-12));
    CHECK(close(e.diag_term, diag, 1e-12));
    CHECK(close(e.offdiag_term, off, 1e-12));
    CHECK(close(e.loss, -reward + diag + off, 1e-12));
}

TEST_CASE("cross-correlation gradients agree with finite differences") {
    Rng rng(503);
    const Matrix x1 = rng.gaussian_matrix(10, 3);
    const Matrix x2 = rng.gaussian_matrix(10, 3);
    for (int point = 0; point < 10; ++point) {
        const Matrix b1 = rng.gaussian_matrix(3, 2);
        const Matrix b2 = rng.gaussian_matrix(3, 2);
        const BtEvaluation e = barlow_twins_loss(x1, x2, b1, b2, 0.7);
        const Matrix fd1 = test::fd_gradient(
            [&](const Matrix& b) { return barlow_twins_loss(x1, x2, b, b2, 0.7).loss; }, b1);
        const Matrix fd2 = test::fd_gradient(
            [&](const Matrix& b) { return barlow_twins_loss(x1, x2, b1, b, 0.7).loss; }, b2);
        CHECK(test::grad_rel_err(e.grad1, fd1) <= 1e-5);
        CHECK(test::grad_rel_err(e.grad2, fd2) <= 1e-5);
    }
}

TEST_CASE("variance penalty value and gradient") {
    const Matrix z = unit_pair();
    const VariancePenalty at_unit = bt_variance_penalty(z, Matrix::identity(2), 2.0);
    CHECK(std::abs(at_unit.value) <= 1e-24);
    const VariancePenalty at_zero = bt_variance_penalty(z, Matrix(2, 2), 2.0);
    CHECK(std::abs(at_zero.value - 4.0) <= 1e-15);
    CHECK(max_abs(at_zero.grad) == 0.0);

    Rng rng(509);
    const Matrix x = rng.gaussian_matrix(9, 3);
    for (int point = 0; point < 5; ++point) {
        const Matrix b = rng.gaussian_matrix(3, 2);
        const VariancePenalty vp = bt_variance_penalty(x, b, 1.5);
        const Matrix fd = test::fd_gradient(
            [&](const Matrix& probe) { return bt_variance_penalty(x, probe, 1.5).value; }, b);
        CHECK(test::grad_rel_err(vp.grad, fd) <= 1e-5);
    }
}

TEST_CASE("stationarity multipliers from a cross matrix") {
    const BtStationarityReport rep = bt_stationarity(Matrix(2, 2, {0.8, 0.1, 0.2, 0.6}), 0.5);
    // (1 - 0.8) 0.8 - 0.5 (0.1)^2 and (1 - 0.6) 0.6 - 0.5 (0.2)^2.
    CHECK(std::abs(rep.multipliers[0] - 0.155) <= 1e-15);
    CHECK(std::abs(rep.multipliers[1] - 0.22) <= 1e-15);
    CHECK_THROWS_AS((void)bt_stationarity(Matrix(2, 3), 0.5), ShapeMismatch);
}

TEST_CASE("subspace decomposition invariants") {
    Rng rng(521);
    const GaussianInstance inst = gen_gaussian({5, 4}, 2, {0.8, 0.4}, 600, 71);
    const Matrix& x1 = inst.batch.views[0];
    const Matrix& x2 = inst.batch.views[1];
    const Matrix s11 = symmetrized(empirical_cov(x1, x1));
    const Matrix s22 = symmetrized(empirical_cov(x2, x2));
    const Matrix s12 = empirical_cov(x1, x2);

    const Matrix b1 = rng.gaussian_matrix(5, 2);
    const Matrix b2 = rng.gaussian_matrix(4, 2);
    const SubspaceDecomposition dec = decompose_subspace(x1, x2, b1, b2);

    CHECK(max_abs_diff(mul_at_b(dec.u1, s11 * dec.u1), Matrix::identity(2)) <= 1e-8);
    CHECK(max_abs_diff(mul_at_b(dec.u2, s22 * dec.u2), Matrix::identity(2)) <= 1e-8);
    const Matrix aligned = mul_at_b(dec.u1, s12 * dec.u2);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) {
            if (r == c)
                CHECK(std::abs(aligned(r, c) - dec.lambda[r]) <= 1e-8);
            else
                CHECK(std::abs(aligned(r, c)) <= 1e-8);
        }
    CHECK(dec.lambda[0] >= dec.lambda[1]);
    CHECK(dec.lambda[1] >= -1e-12);
    CHECK(max_abs_diff(dec.u1 * dec.t1, b1) <= 1e-8 * std::max(1.0, max_abs(b1)));
    CHECK(max_abs_diff(dec.u2 * dec.t2, b2) <= 1e-8 * std::max(1.0, max_abs(b2)));
}

TEST_CASE("subspace decomposition of the exact solution is the identity coordinate") {
    const GaussianInstance inst = gen_gaussian({5, 4}, 2, {0.8, 0.4}, 600, 73);
    const CcaResult exact = cca_exact(inst.batch, 2, {0.0, 0.0});
    const SubspaceDecomposition dec =
        decompose_subspace(inst.batch.views[0], inst.batch.views[1], exact.weights.weights[0],
                           exact.weights.weights[1]);
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(std::abs(dec.lambda[j] - exact.spectrum.values[j]) <= 1e-8);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) {
            const double expect = r == c ? 1.0 : 0.0;
            CHECK(std::abs(std::abs(dec.t1(r, c)) - expect) <= 1e-6);
            CHECK(std::abs(std::abs(dec.t2(r, c)) - expect) <= 1e-6);
        }
}

TEST_CASE("subspace decomposition handles rank collapse") {
    Rng rng(523);
    const GaussianInstance inst = gen_gaussian({4, 4}, 2, {0.7, 0.3}, 300, 79);
    const Matrix& x1 = inst.batch.views[0];
    const Matrix& x2 = inst.batch.views[1];

    // Rank-one weights on both sides: one live coordinate row.
    const std::vector<double> w1 = rng.gaussian_vector(4);
    const std::vector<double> w2 = rng.gaussian_vector(4);
    Matrix b1(4, 2), b2(4, 2);
    for (std::size_t r = 0; r < 4; ++r) {
        b1(r, 0) = w1[r];
        b1(r, 1) = 2.0 * w1[r];
        b2(r, 0) = w2[r];
        b2(r, 1) = -0.5 * w2[r];
    }
    const SubspaceDecomposition dec = decompose_subspace(x1, x2, b1, b2);
    CHECK(dec.lambda.size() == 1);
    CHECK(dec.t1.rows == 1);
    CHECK(max_abs_diff(dec.u1 * dec.t1, b1) <= 1e-8 * std::max(1.0, max_abs(b1)));
    CHECK(max_abs_diff(dec.u2 * dec.t2, b2) <= 1e-8 * std::max(1.0, max_abs(b2)));

    // Unequal ranks extend the smaller span with data directions.
    const Matrix full = rng.gaussian_matrix(4, 2);
    const SubspaceDecomposition mixed = decompose_subspace(x1, x2, full, b2);
    CHECK(mixed.lambda.size() == 2);
    CHECK(max_abs_diff(mixed.u2 * mixed.t2, b2) <= 1e-8 * std::max(1.0, max_abs(b2)));

    CHECK_THROWS_AS((void)decompose_subspace(x1, x2, Matrix(4, 2), Matrix(4, 2)), RankZero);
    // Three samples cannot produce a full-rank four-dimensional covariance.
    const Matrix tiny1 = rng.gaussian_matrix(3, 4);
    const Matrix tiny2 = rng.gaussian_matrix(3, 4);
    CHECK_THROWS_AS((void)decompose_subspace(tiny1, tiny2, full, b2), DegenerateData);
}

TEST_CASE("equivalence check against the exact solution") {
    Rng rng(541);
    const GaussianInstance inst = gen_gaussian({5, 4}, 2, {0.85, 0.45}, 800, 83);
    const Matrix& x1 = inst.batch.views[0];
    const Matrix& x2 = inst.batch.views[1];
    VicregParams params;
    EquivalenceOptions opts;
    opts.require_converged = false;

    // Random weights are far from the optimum in both senses.
    const Matrix r1 = rng.gaussian_matrix(5, 2);
    const Matrix r2 = rng.gaussian_matrix(4, 2);
    const EquivalenceReport off = check_cca_equivalence(x1, x2, r1, r2, params, opts);
    CHECK(!off.converged);
    CHECK(!off.pass);
    CHECK(off.effective_rank == 2);

    // Any invertible recombination of the exact weights spans the same
    // representations, so the span check passes even though the point is not
    // a loss minimizer.
    const CcaResult exact = cca_exact(inst.batch, 2, {0.0, 0.0});
    Matrix t = 0.2 * rng.gaussian_matrix(2, 2);
    t(0, 0) += 1.0;
    t(1, 1) += 1.0;
    const EquivalenceReport planted = check_cca_equivalence(
        x1, x2, exact.weights.weights[0] * t, exact.weights.weights[1] * t, params, opts);
    CHECK(planted.pass);
    CHECK(planted.effective_rank == 2);
    CHECK(test::max_angle(planted.angles1) <= 1e-2);
    CHECK(test::max_angle(planted.angles2) <= 1e-2);

    CHECK_THROWS_AS((void)check_cca_equivalence(x1, x2, r1, r2, params), NotConverged);
    CHECK_THROWS_AS((void)check_cca_equivalence(x1, x2, Matrix(5, 2), Matrix(4, 2), params, opts),
                    RankZero);
}

TEST_CASE("collapse threshold closed form") {
    VicregParams params;  // alpha = beta = gamma = 1
    const CollapseThreshold t = vr_collapse_threshold(params, 0.5, 0.0);
    CHECK(t.mu == 0.25);
    CHECK(t.beta_max == 0.015625);

    CHECK(vr_collapse_threshold(params, 0.6, 0.6).beta_max == 0.0);

    // Huge hinge weight pins both norms at one: the threshold approaches
    // gamma (lambda1 - lambda2) / 2.
    params.alpha = 1e9;
    const CollapseThreshold pinned = vr_collapse_threshold(params, 0.7, 0.2);
    CHECK(std::abs(pinned.beta_max - 0.25) <= 1e-6);

    params.alpha = 1.0;
    CHECK_THROWS_AS((void)vr_collapse_threshold(params, 1.0, 0.5), InvalidLambdas);
    CHECK_THROWS_AS((void)vr_collapse_threshold(params, 0.5, -0.1), InvalidLambdas);
    CHECK_THROWS_AS((void)vr_collapse_threshold(params, 0.3, 0.5), InvalidLambdas);
}

TEST_CASE("cross-correlation collapse constant") {
    CHECK(std::abs(bt_collapse_constant(0.9, 0.1) - 4.0 / 65.0) <= 1e-15);
    CHECK(bt_collapse_constant(1.0, 0.5) == 0.0);
    CHECK(bt_collapse_constant(0.7, 0.7) == 0.0);
    CHECK_THROWS_AS((void)bt_collapse_constant(1.1, 0.5), InvalidLambdas);
    CHECK_THROWS_AS((void)bt_collapse_constant(0.5, -0.1), InvalidLambdas);
    CHECK_THROWS_AS((void)bt_collapse_constant(0.3, 0.5), InvalidLambdas);
    CHECK_THROWS_AS((void)bt_collapse_constant(0.0, 0.0), InvalidLambdas);
}

TEST_CASE("coordinate losses on hand values") {
    VicregParams params;  // all ones
    const std::vector<double> lambda{0.8, 0.3};
    // Identity coordinates: cross 1.1 per side pairing, each side norm 2.
    CHECK(std::abs(vr_matrix_loss(Matrix::identity(2), lambda, params) -
                   (-2.0 * 1.1 + 2.0 * 2.0)) <= 1e-15);
    // Zero coordinates pay the full hinge on both sides.
    CHECK(std::abs(vr_matrix_loss(Matrix(2, 2), lambda, params) - 4.0) <= 1e-15);

    CHECK(std::abs(bt_matrix_loss(Matrix::identity(2), Matrix::identity(2), {0.9, 0.4}, 0.5) -
                   0.37) <= 1e-15);

    CHECK_THROWS_AS((void)vr_untied_matrix_loss(Matrix(2, 2), Matrix(3, 2), lambda, params),
                    ShapeMismatch);
    CHECK_THROWS_AS((void)vr_matrix_loss(Matrix(3, 2), lambda, params), ShapeMismatch);
    CHECK_THROWS_AS((void)vr_matrix_loss(Matrix(2, 2), {0.5, 1.5}, params), InvalidLambdas);
    CHECK_THROWS_AS((void)bt_matrix_loss(Matrix(2, 2), Matrix(2, 2), lambda, 0.0), ConfigInvalid);
}

TEST_CASE("coordinate gradient agrees with finite differences off the hinge") {
    Rng rng(547);
    VicregParams params;
    params.alpha = 0.9;
    params.beta = 0.6;
    params.gamma = 1.1;
    int accepted = 0;
    for (int tries = 0; tries < 400 && accepted < 20; ++tries) {
        const std::size_t r = 2 + rng.below(2);
        std::vector<double> lambda(r);
        for (double& l : lambda) l = rng.uniform();
        std::sort(lambda.begin(), lambda.end(), std::greater<double>());
        const Matrix t = rng.gaussian_matrix(r, r, 0.5);
        bool safe = true;
        for (std::size_t c = 0; c < r; ++c) {
            const double n = norm2(get_col(t, c));
            if (n < 0.05 || std::abs(n - 1.0) < 0.03) safe = false;
        }
        if (!safe) continue;
        ++accepted;
        const Matrix g = vr_matrix_grad(t, lambda, params);
        const Matrix fd = test::fd_gradient(
            [&](const Matrix& probe) { return vr_matrix_loss(probe, lambda, params); }, t);
        CHECK(test::grad_rel_err(g, fd) <= 1e-5);
    }
    CHECK(accepted == 20);
}

TEST_CASE("untied coordinate loss never beats the best tied loss") {
    Rng rng(557);
    VicregParams params;
    params.alpha = 1.3;
    params.beta = 0.5;
    params.gamma = 0.9;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t r = 2 + rng.below(2);
        std::vector<double> lambda(r);
        for (double& l : lambda) l = rng.uniform();
        std::sort(lambda.begin(), lambda.end(), std::greater<double>());
        const Matrix t1 = rng.gaussian_matrix(r, 2, 0.6);
        const Matrix t2 = rng.gaussian_matrix(r, 2, 0.6);
        const double untied = vr_untied_matrix_loss(t1, t2, lambda, params);
        const double tied = std::min(vr_matrix_loss(t1, lambda, params),
                                     vr_matrix_loss(t2, lambda, params));
        CHECK(untied >= tied - 1e-10);
    }
}

TEST_CASE("tied minimum value decreases with correlation") {
    VicregParams params;  // all ones
    const double strong = vr_phi({0.8, 0.5}, params, 8, 3000, 11);
    const double weak = vr_phi({0.6, 0.3}, params, 8, 3000, 11);
    CHECK(strong <= weak + 1e-4);

    // No correlation decouples the columns: each side pays the scalar
    // minimum of gamma m^2 + alpha (1 - m) at m = 1/2 per component.
    const double flat = vr_phi({0.0, 0.0}, params, 8, 3000, 11);
    CHECK(std::abs(flat - 3.0) <= 1e-3);
}

TEST_CASE("coordinate descent scans find the predicted structure") {
    VicregParams params;  // alpha = gamma = 1
    // Below the threshold 0.015625 every run drops the weak component.
    params.beta = 0.01;
    const CollapseScanResult below = collapse_scan(SslMethod::vicreg, 0.5, 0.0, params, 6, 20000,
                                                   991);
    CHECK(below.runs.size() == 6);
    CHECK(below.collapsed_count == 6);
    for (const CollapseRun& run : below.runs) {
        CHECK(run.collapsed);
        CHECK(run.bottom_row_norm <= 1e-4);
        CHECK(std::abs(run.loss - vr_matrix_loss(run.t, {0.5, 0.0}, params)) <= 1e-12);
    }

    // The threshold is one-sided: collapse can persist above it. At a large
    // covariance weight the orthogonal full-rank solution (loss 2.5, bottom
    // row norm 1/2) finally beats every collapsed candidate.
    params.beta = 1.0;
    const CollapseScanResult above = collapse_scan(SslMethod::vicreg, 0.5, 0.0, params, 8, 30000,
                                                   993);
    double best = 1e300;
    double best_bottom = 0.0;
    for (const CollapseRun& run : above.runs) {
        if (run.loss < best) {
            best = run.loss;
            best_bottom = run.bottom_row_norm;
        }
    }
    CHECK(best == above.best_loss);
    CHECK(std::abs(best - 2.5) <= 5e-3);
    CHECK(best_bottom >= 0.3);

    // Cross-correlation scan below its constant: minimizers sit at the four
    // sign choices of the strong row.
    params.beta = 0.05;
    const CollapseScanResult bt = collapse_scan(SslMethod::bt, 0.9, 0.1, params, 8, 40000, 995);
    for (const CollapseRun& run : bt.runs) {
        if (run.loss <= bt.best_loss + 1e-6) {
            CHECK(run.sign_distance <= 1e-4);
            CHECK(run.collapsed);
        }
    }
}

TEST_CASE("full-batch trainers descend and are deterministic") {
    const GaussianInstance inst = gen_gaussian({4, 4}, 2, {0.8, 0.4}, 400, 89);
    const Matrix& x1 = inst.batch.views[0];
    const Matrix& x2 = inst.batch.views[1];
    VicregParams params;
    TrainConfig config;
    config.steps = 200;
    config.optimizer.kind = OptimizerKind::adam;
    config.optimizer.lr = 1e-2;
    config.seed = 3;

    const SslTrainResult a = train_vicreg(x1, x2, 2, params, config);
    CHECK(a.trace.size() == config.steps + 1);
    CHECK(a.trace.back().loss < a.trace.front().loss);
    for (const TraceRow& row : a.trace)
        CHECK(close(row.loss, -row.reward + row.norm_penalty + row.orth_penalty, 1e-12));
    const SslTrainResult b = train_vicreg(x1, x2, 2, params, config);
    CHECK(max_abs_diff(a.b1, b.b1) == 0.0);
    CHECK(max_abs_diff(a.b2, b.b2) == 0.0);

    const SslTrainResult bt = train_bt(x1, x2, 2, 1.0, 0.5, config);
    CHECK(bt.trace.back().loss < bt.trace.front().loss);
    for (const TraceRow& row : bt.trace)
        CHECK(close(row.loss, -row.reward + row.norm_penalty + row.orth_penalty, 1e-12));
    // The traced diagonal term carries the quadratic variance penalty.
    const BtEvaluation raw = barlow_twins_loss(x1, x2, bt.b1, bt.b2, 1.0);
    const double penalty = bt_variance_penalty(x1, bt.b1, 0.5).value +
                           bt_variance_penalty(x2, bt.b2, 0.5).value;
    CHECK(close(bt.trace.back().loss, raw.loss + penalty, 1e-10));

    // Explicit starts are honored exactly when no steps run.
    TrainConfig frozen = config;
    frozen.steps = 0;
    Rng rng(563);
    const Matrix init1 = rng.gaussian_matrix(4, 2);
    const Matrix init2 = rng.gaussian_matrix(4, 2);
    const SslTrainResult kept = train_vicreg(x1, x2, 2, params, frozen, &init1, &init2);
    CHECK(max_abs_diff(kept.b1, init1) == 0.0);
    CHECK(max_abs_diff(kept.b2, init2) == 0.0);
    CHECK(kept.trace.size() == 1);
    CHECK(kept.trace.front().loss == vicreg_loss(x1, x2, init1, init2, params).loss);

    CHECK_THROWS_AS((void)train_vicreg(x1, x2, 5, params, config), KTooLarge);
    const Matrix bad(3, 2);
    CHECK_THROWS_AS((void)train_vicreg(x1, x2, 2, params, frozen, &bad, &init2), ShapeMismatch);
    CHECK_THROWS_AS((void)train_bt(x1, x2, 2, 1.0, -0.5, config), ConfigInvalid);
}

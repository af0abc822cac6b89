#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "gepey/cca.hpp"
#include "gepey/errors.hpp"
#include "gepey/ey.hpp"
#include "gepey/gen.hpp"
#include "gepey/gep.hpp"
#include "gepey/multiview.hpp"
#include "gepey/rng.hpp"
#include "support.hpp"

using namespace gepey;

namespace {

bool close(double x, double ref, double tol) { return std::abs(x - ref) <= tol * std::max(1.0, std::abs(ref)); }

}  // namespace

TEST_CASE("subspace loss on hand values") {
    // A = B = I, U = I: reward 4, norm 2, orth 0, and the gradient vanishes.
    const GepPair id{Matrix::identity(2), Matrix::identity(2)};
    const EyEvaluation at_id = ey_loss(id, Matrix::identity(2));
    CHECK(at_id.loss == -2.0);
    CHECK(at_id.reward == 4.0);
    CHECK(at_id.norm_penalty == 2.0);
    CHECK(at_id.orth_penalty == 0.0);
    CHECK(max_abs(at_id.gradient) <= 1e-14);

    const EyEvaluation at_zero = ey_loss(id, Matrix(2, 2));
    CHECK(at_zero.loss == 0.0);
    CHECK(max_abs(at_zero.gradient) == 0.0);

    // Top eigenvector of diag(3,1) scaled by sqrt(3) is a minimizer with
    // loss -lambda^2 = -9 and zero gradient.
    const GepPair diag{Matrix::diag({3, 1}), Matrix::identity(2)};
    Matrix star(2, 1);
    star(0, 0) = std::sqrt(3.0);
    const EyEvaluation at_star = ey_loss(diag, star);
    CHECK(std::abs(at_star.loss + 9.0) <= 1e-12);
    CHECK(max_abs(at_star.gradient) <= 1e-12);
}

TEST_CASE("subspace loss matches frozen fixed-point oracle") {
    // Frozen from tools/oracle_dump (ey_fixed).
    const GepPair pair{Matrix(3, 3, {2, 0.5, 0, 0.5, 1, 0.25, 0, 0.25, 0.5}),
                       Matrix::diag({1, 2, 4})};
    const Matrix u(3, 2, {1, 0.5, 0.25, -0.5, 0, 1});
    const EyEvaluation e = ey_loss(pair, u);
    CHECK(close(e.loss, 17.828125, 1e-12));
    CHECK(close(e.reward, 6.125, 1e-12));
    CHECK(close(e.norm_penalty, 23.828125, 1e-12));
    CHECK(close(e.orth_penalty, 0.125, 1e-12));
    const double ref[6] = {-3.5, 7.5, -1.75, -18.5, 3.75, 74.5};
    for (std::size_t j = 0; j < 6; ++j) CHECK(close(e.gradient.data[j], ref[j], 1e-12));
}

TEST_CASE("subspace loss invariants") {
    Rng rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t d = 2 + rng.below(7);
        const std::size_t k = 1 + rng.below(d);
        const GepPair pair = test::random_pencil(d, rng);
        const Matrix u = rng.gaussian_matrix(d, k);
        const EyEvaluation e = ey_loss(pair, u);
        CHECK(close(e.loss, -e.reward + e.norm_penalty + e.orth_penalty, 1e-12));

        // The loss only sees the column span scaling, so any orthogonal
        // right rotation preserves loss, reward, and the penalty total.
        const Matrix q = orthonormal_range(rng.gaussian_matrix(k, k));
        const EyEvaluation rot = ey_loss(pair, u * q);
        CHECK(close(rot.loss, e.loss, 1e-10));
        CHECK(close(rot.reward, e.reward, 1e-10));
        CHECK(close(rot.norm_penalty + rot.orth_penalty, e.norm_penalty + e.orth_penalty, 1e-10));
    }
    CHECK_THROWS_AS((void)ey_loss(GepPair{Matrix::identity(3), Matrix::identity(3)}, Matrix(2, 1)),
                    ShapeMismatch);
}

TEST_CASE("subspace loss gradient agrees with finite differences") {
    Rng rng(113);
    for (int point = 0; point < 50; ++point) {
        const std::size_t d = 2 + rng.below(7);
        const std::size_t k = 1 + rng.below(d);
        const GepPair pair = test::random_pencil(d, rng);
        const Matrix u = rng.gaussian_matrix(d, k);
        const EyEvaluation e = ey_loss(pair, u);
        const Matrix fd = test::fd_gradient(
            [&](const Matrix& x) { return ey_loss(pair, x).loss; }, u);
        CHECK(test::grad_rel_err(e.gradient, fd) <= 1e-5);
    }
}

TEST_CASE("loss minimum equals minus the sum of squared positive eigenvalues") {
    Rng rng(127);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t d = 3 + rng.below(6);
        const std::size_t k = 1 + rng.below(d);
        const GepPair pair = test::random_pencil(d, rng);
        const GepSolution sol = gep_solve(pair, k);
        Matrix star = sol.vectors;
        double target = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double lam = std::max(sol.spectrum.values[j], 0.0);
            target -= lam * lam;
            for (std::size_t i = 0; i < d; ++i) star(i, j) *= std::sqrt(lam);
        }
        CHECK(close(ey_loss(pair, star).loss, target, 1e-8));
    }
}

TEST_CASE("spectrum extraction from a span") {
    Rng rng(131);
    const GepPair pair = test::random_pencil(6, rng);
    const GepSolution sol = gep_solve(pair, 3);

    const ExtractedSpectrum exact = extract_spectrum(pair, sol.vectors);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(std::abs(exact.spectrum.values[j] - sol.spectrum.values[j]) <= 1e-8);
    CHECK(max_abs_diff(mul_at_b(exact.vectors, pair.b * exact.vectors), Matrix::identity(3)) <=
          1e-8);

    // Only the span matters: any invertible recombination extracts the same values.
    Matrix t = 0.3 * rng.gaussian_matrix(3, 3);
    for (std::size_t i = 0; i < 3; ++i) t(i, i) += 1.0;
    const ExtractedSpectrum mixed = extract_spectrum(pair, sol.vectors * t);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(std::abs(mixed.spectrum.values[j] - sol.spectrum.values[j]) <= 1e-8);

    // Any full-rank span interlaces the true values from below.
    for (int trial = 0; trial < 10; ++trial) {
        const ExtractedSpectrum sub = extract_spectrum(pair, rng.gaussian_matrix(6, 3));
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(sub.spectrum.values[j] <= sol.spectrum.values[j] + 1e-8);
    }

    Matrix dup(6, 2);
    const std::vector<double> col = get_col(sol.vectors, 0);
    set_col(dup, 0, col);
    set_col(dup, 1, col);
    CHECK_THROWS_AS((void)extract_spectrum(pair, dup), SingularProjection);
    CHECK_THROWS_AS((void)extract_spectrum(pair, Matrix(6, 0)), KTooLarge);
}

TEST_CASE("two-batch estimator with equal batches reduces to the plug-in loss") {
    Rng rng(139);
    const MultiviewBatch data = make_batch(
        {rng.gaussian_matrix(30, 4), rng.gaussian_matrix(30, 3), rng.gaussian_matrix(30, 5)});
    const std::vector<double> alpha{0.25, 1.0, 0.0};
    const WeightSet w = make_weights(
        {rng.gaussian_matrix(4, 2), rng.gaussian_matrix(3, 2), rng.gaussian_matrix(5, 2)}, alpha);

    const EyEvaluation est = ey_loss_stochastic(data, data, w);
    const EyEvaluation dense = ey_loss(build_gep(data, alpha), stack_blocks(w.weights));
    CHECK(close(est.loss, dense.loss, 1e-10));
    CHECK(close(est.reward, dense.reward, 1e-10));
    CHECK(close(est.norm_penalty, dense.norm_penalty, 1e-10));
    CHECK(close(est.orth_penalty, dense.orth_penalty, 1e-10));
    CHECK(max_abs_diff(est.gradient, dense.gradient) <=
          1e-10 * std::max(1.0, max_abs(dense.gradient)));
    CHECK(close(est.loss, -est.reward + est.norm_penalty + est.orth_penalty, 1e-12));
}

TEST_CASE("two-batch estimator matches frozen fixed-point oracle") {
    // Frozen from tools/oracle_dump (stochastic_fixed); batches of unequal size.
    const MultiviewBatch b1 = make_batch(
        {Matrix(3, 2, {0.5, -1, 1.5, 2, -0.5, 0.25}),
         Matrix(3, 3, {1, 0, -0.5, 0.25, -1, 1, -2, 0.5, 0.75})});
    const MultiviewBatch b2 = make_batch(
        {Matrix(4, 2, {0.25, 1, -1, -0.5, 2, 0.5, 0.75, -1.5}),
         Matrix(4, 3, {0.5, 1, -1, 1.5, -0.25, 0.5, -0.75, 2, 0.25, 0, -1, 1})});
    const WeightSet w = make_weights(
        {Matrix(2, 2, {1, 0.5, -0.25, 0.75}), Matrix(3, 2, {0.5, -0.5, 1, 0.25, -0.75, 1})},
        {0.25, 0.75});

    const EyEvaluation e = ey_loss_stochastic(b1, b2, w);
    CHECK(close(e.loss, 14.359472195307415, 1e-10));
    CHECK(close(e.reward, 2.583333333333333, 1e-10));
    CHECK(close(e.norm_penalty, 16.858309984207153, 1e-10));
    CHECK(close(e.orth_penalty, 0.08449554443359375, 1e-10));

    const std::vector<Matrix> g = ey_gradients_per_view(b1, b2, w);
    const double g1[4] = {12.938952128092449, 11.81964365641276, 6.8773867289225263,
                          11.038562774658203};
    const double g2[6] = {1.9137843449910483, -9.5626389185587559, 14.127488454182942,
                          5.5277805328369141, -10.468769709269205, 8.0969835917154942};
    for (std::size_t j = 0; j < 4; ++j) CHECK(close(g[0].data[j], g1[j], 1e-10));
    for (std::size_t j = 0; j < 6; ++j) CHECK(close(g[1].data[j], g2[j], 1e-10));
    CHECK(max_abs_diff(stack_blocks(g), e.gradient) == 0.0);
}

TEST_CASE("two-batch gradients agree with finite differences") {
    Rng rng(149);
    for (int point = 0; point < 10; ++point) {
        const MultiviewBatch b1 =
            make_batch({rng.gaussian_matrix(6, 3), rng.gaussian_matrix(6, 4)});
        const MultiviewBatch b2 =
            make_batch({rng.gaussian_matrix(5, 3), rng.gaussian_matrix(5, 4)});
        const std::vector<double> alpha{0.3, 0.8};
        std::vector<Matrix> ws{rng.gaussian_matrix(3, 2), rng.gaussian_matrix(4, 2)};
        const std::vector<Matrix> g = ey_gradients_per_view(b1, b2, make_weights(ws, alpha));
        for (std::size_t view = 0; view < 2; ++view) {
            const Matrix fd = test::fd_gradient(
                [&](const Matrix& x) {
                    std::vector<Matrix> probe = ws;
                    probe[view] = x;
                    return ey_loss_stochastic(b1, b2, make_weights(probe, alpha)).loss;
                },
                ws[view]);
            CHECK(test::grad_rel_err(g[view], fd) <= 1e-5);
        }
    }
}

TEST_CASE("two-batch loss estimate is unbiased for the population loss") {
    const std::size_t m = 4, pairs = 400;
    const GaussianInstance inst = gen_gaussian({4, 3}, 2, {0.7, 0.3}, 2 * m * pairs, 202);
    const std::vector<double> alpha{0.5, 0.5};
    Rng rng(203);
    const WeightSet w = make_weights({gaussian_init(4, 2, rng), gaussian_init(3, 2, rng)}, alpha);
    const double population =
        ey_loss(build_gep(inst.population, alpha), stack_blocks(w.weights)).loss;

    std::vector<double> est(pairs);
    std::vector<std::size_t> i1(m), i2(m);
    for (std::size_t p = 0; p < pairs; ++p) {
        for (std::size_t r = 0; r < m; ++r) {
            i1[r] = 2 * m * p + r;
            i2[r] = 2 * m * p + m + r;
        }
        est[p] = ey_loss_stochastic(take_rows(inst.batch, i1), take_rows(inst.batch, i2), w).loss;
    }
    double mean = 0.0;
    for (double v : est) mean += v;
    mean /= double(pairs);
    double var = 0.0;
    for (double v : est) var += (v - mean) * (v - mean);
    var /= double(pairs - 1);
    const double se = std::sqrt(var / double(pairs));
    CHECK(std::abs(mean - population) <= 3.0 * se);
}

TEST_CASE("dense gradient update applies one descent step") {
    Rng rng(151);
    const GepPair pair = test::random_pencil(5, rng);
    const Matrix u = rng.gaussian_matrix(5, 2);
    const double lr = 0.05;
    // With both variance estimates equal the update is exactly one plug-in step.
    const Matrix stepped = ey_gradient_update(u, pair.a, pair.b, pair.b, lr);
    const EyEvaluation e = ey_loss(pair, u);
    Matrix expect = u;
    for (std::size_t j = 0; j < expect.data.size(); ++j)
        expect.data[j] -= lr * e.gradient.data[j];
    CHECK(max_abs_diff(stepped, expect) <= 1e-12 * std::max(1.0, max_abs(expect)));
    CHECK(max_abs_diff(ey_gradient_update(u, pair.a, pair.b, pair.b, 0.0), u) == 0.0);
    CHECK_THROWS_AS((void)ey_gradient_update(Matrix(4, 2), pair.a, pair.b, pair.b, lr),
                    ShapeMismatch);
}

TEST_CASE("full-batch descent reaches the known optimum") {
    const GepPair pair{Matrix::diag({3, 2, 1}), Matrix::identity(3)};
    TrainConfig config;
    config.steps = 5000;
    config.optimizer.kind = OptimizerKind::sgd;
    config.optimizer.lr = 1e-2;
    config.seed = 1;
    const FullBatchResult res = train_full_batch(pair, 2, config);
    CHECK(res.trace.size() == config.steps + 1);
    CHECK(res.trace.front().step == 0);
    CHECK(res.trace.back().step == config.steps);
    for (const TraceRow& row : res.trace)
        CHECK(close(row.loss, -row.reward + row.norm_penalty + row.orth_penalty, 1e-12));
    CHECK(res.trace.back().loss < res.trace.front().loss);
    // Top-2 eigenvalues 3 and 2, so the optimum is -(9 + 4).
    CHECK(std::abs(res.trace.back().loss + 13.0) <= 1e-4);
    CHECK(close(ey_loss(pair, res.weights).loss, res.trace.back().loss, 1e-12));
}

TEST_CASE("full-batch descent with no steps returns the initialization") {
    const GepPair pair{Matrix::diag({2, 1}), Matrix::identity(2)};
    TrainConfig config;
    config.steps = 0;
    config.seed = 9;
    const FullBatchResult res = train_full_batch(pair, 2, config);
    CHECK(res.trace.size() == 1);
    Rng rng(9);
    CHECK(max_abs_diff(res.weights, gaussian_init(2, 2, rng)) == 0.0);
    CHECK(res.trace.front().loss == ey_loss(pair, res.weights).loss);
    CHECK_THROWS_AS((void)train_full_batch(pair, 3, config), KTooLarge);
    CHECK_THROWS_AS((void)train_full_batch(pair, 0, config), KTooLarge);
}

TEST_CASE("stochastic training budgets stop at whichever limit hits first") {
    const GaussianInstance inst = gen_gaussian({4, 4}, 2, {0.8, 0.4}, 200, 77);
    const std::vector<double> alpha{0.0, 0.0};
    TrainConfig config;
    config.batch_size = 10;  // 10 disjoint pairs per epoch of 200 samples
    config.optimizer.lr = 1e-3;
    config.seed = 5;

    config.epochs = 2;
    config.steps = 0;
    CHECK(train_stochastic(inst.batch, 2, alpha, config).trace.size() == 20);

    config.steps = 7;
    CHECK(train_stochastic(inst.batch, 2, alpha, config).trace.size() == 7);

    config.epochs = 0;
    config.steps = 13;
    CHECK(train_stochastic(inst.batch, 2, alpha, config).trace.size() == 13);

    config.steps = 0;
    CHECK(train_stochastic(inst.batch, 2, alpha, config).trace.empty());

    config.iid_batches = true;
    CHECK_THROWS_AS((void)train_stochastic(inst.batch, 2, alpha, config), ConfigInvalid);
    config.steps = 6;
    CHECK(train_stochastic(inst.batch, 2, alpha, config).trace.size() == 6);
    config.iid_batches = false;

    config.batch_size = 1;
    CHECK_THROWS_AS((void)train_stochastic(inst.batch, 2, alpha, config), ConfigInvalid);
    config.batch_size = 101;  // epoch pairing needs two disjoint batches
    CHECK_THROWS_AS((void)train_stochastic(inst.batch, 2, alpha, config), ConfigInvalid);
    config.batch_size = 10;
    CHECK_THROWS_AS((void)train_stochastic(inst.batch, 5, alpha, config), KTooLarge);
}

TEST_CASE("stochastic training is deterministic in the seed") {
    const GaussianInstance inst = gen_gaussian({3, 5}, 2, {0.7, 0.2}, 120, 31);
    const std::vector<double> alpha{1.0, 0.25};
    TrainConfig config;
    config.batch_size = 8;
    config.epochs = 3;
    config.optimizer.kind = OptimizerKind::adam;
    config.optimizer.lr = 1e-2;
    config.seed = 12;
    const StochasticResult a = train_stochastic(inst.batch, 2, alpha, config);
    const StochasticResult b = train_stochastic(inst.batch, 2, alpha, config);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(max_abs_diff(a.weights.weights[i], b.weights.weights[i]) == 0.0);
    CHECK(a.trace.size() == b.trace.size());
    for (std::size_t t = 0; t < a.trace.size(); ++t) CHECK(a.trace[t].loss == b.trace[t].loss);
    for (const TraceRow& row : a.trace)
        CHECK(close(row.loss, -row.reward + row.norm_penalty + row.orth_penalty, 1e-12));

    config.seed = 13;
    const StochasticResult c = train_stochastic(inst.batch, 2, alpha, config);
    CHECK(max_abs_diff(a.weights.weights[0], c.weights.weights[0]) > 0.0);
}

#include "gepey/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "gepey/cca.hpp"
#include "gepey/ey.hpp"
#include "gepey/gen.hpp"
#include "gepey/gep.hpp"
#include "gepey/rng.hpp"
#include "gepey/ssl.hpp"
#include "gepey/svd.hpp"

namespace gepey {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Matrix random_spd(std::size_t d, Rng& rng) {
    const Matrix r = rng.gaussian_matrix(d, d);
    Matrix b = mul_at_b(r, r);
    const double scale = 1.0 / double(d);
    for (double& v : b.data) v *= scale;
    for (std::size_t i = 0; i < d; ++i) b(i, i) += 1.0;
    return b;
}

std::vector<CheckResult> oracle_suite(std::uint64_t seed) {
    Rng rng(seed);
    double max_residual = 0.0;
    double max_orth = 0.0;
    double max_optimum = 0.0;
    bool ordered = true;
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t d = 2 + rng.below(11);
        const Matrix a = symmetrized(rng.gaussian_matrix(d, d));
        const GepPair pair = make_gep_pair(a, random_spd(d, rng));
        const GepSolution sol = gep_solve(pair, d);
        const double a_norm = frobenius_norm(pair.a);
        const double b_norm = frobenius_norm(pair.b);

        const Matrix au = pair.a * sol.vectors;
        const Matrix bu = pair.b * sol.vectors;
        for (std::size_t k = 0; k < d; ++k) {
            const double lambda = sol.spectrum.values[k];
            double r2 = 0.0, u2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double r = au(i, k) - lambda * bu(i, k);
                r2 += r * r;
                u2 += sol.vectors(i, k) * sol.vectors(i, k);
            }
            const double scale = (a_norm + std::abs(lambda) * b_norm) * std::sqrt(u2);
            max_residual = std::max(max_residual, std::sqrt(r2) / scale);
            if (k + 1 < d && sol.spectrum.values[k + 1] > lambda) ordered = false;
        }

        const Matrix gram = mul_at_b(sol.vectors, pair.b * sol.vectors);
        max_orth = std::max(max_orth, max_abs_diff(gram, Matrix::identity(d)));

        const std::size_t k = 1 + rng.below(d);
        Matrix star = left_cols(sol.vectors, k);
        double want = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double lp = std::max(sol.spectrum.values[j], 0.0);
            want -= lp * lp;
            const double c = std::sqrt(lp);
            for (std::size_t i = 0; i < d; ++i) star(i, j) *= c;
        }
        const double got = ey_loss(pair, star).loss;
        max_optimum = std::max(max_optimum, std::abs(got - want) / std::max(1.0, -want));
    }
    return {
        {max_residual <= 1e-8, "pencil_residual",
         "max relative residual " + fmt(max_residual) + " over 50 pencils"},
        {max_orth <= 1e-8, "metric_orthonormality",
         "max |U'BU - I| entry " + fmt(max_orth)},
        {ordered, "descending_order", ordered ? "all spectra descending" : "order violated"},
        {max_optimum <= 1e-6, "loss_optimum_identity",
         "max relative gap to minus the summed squares " + fmt(max_optimum)},
    };
}

std::vector<CheckResult> equivalence_suite(std::uint64_t seed) {
    const GaussianInstance inst = gen_gaussian({5, 5}, 2, {0.85, 0.45}, 1000, seed);
    const Matrix& x1 = inst.batch.views[0];
    const Matrix& x2 = inst.batch.views[1];
    const VicregParams params;

    TrainConfig tc;
    tc.seed = seed;
    SslTrainResult res;
    const Matrix* i1 = nullptr;
    const Matrix* i2 = nullptr;
    // Adam finds the basin; plain gradient steps polish, since near the
    // variance hinge kink adam's normalization stalls tangential progress.
    for (const auto& [kind, lr, steps] :
         {std::tuple{OptimizerKind::adam, 1e-2, 3000ul},
          {OptimizerKind::adam, 1e-3, 2000ul},
          {OptimizerKind::adam, 1e-4, 2000ul},
          {OptimizerKind::sgd, 1e-3, 4000ul},
          {OptimizerKind::sgd, 3e-4, 4000ul}}) {
        tc.optimizer.kind = kind;
        tc.optimizer.lr = lr;
        tc.steps = steps;
        res = train_vicreg(x1, x2, 2, params, tc, i1, i2);
        i1 = &res.b1;
        i2 = &res.b2;
    }

    EquivalenceOptions opts;
    opts.require_converged = false;
    // Basin check only: the kink valley is nearly flat, so first-order
    // training leaves a small residual that the angle and tied-coordinate
    // gates below do not depend on.
    opts.grad_tol = 1e-2;
    const EquivalenceReport rep = check_cca_equivalence(x1, x2, res.b1, res.b2, params, opts);
    double max_angle = 0.0;
    for (double a : rep.angles1) max_angle = std::max(max_angle, a);
    for (double a : rep.angles2) max_angle = std::max(max_angle, a);
    return {
        {rep.converged, "training_converged",
         "gradient norm " + fmt(rep.grad_norm) + " against tolerance " + fmt(opts.grad_tol)},
        {rep.pass, "span_angles",
         "max principal angle " + fmt(max_angle) + " at effective rank " +
             std::to_string(rep.effective_rank)},
        {rep.tied_t_residual <= 1e-3, "tied_coordinates",
         "max live-row coordinate difference " + fmt(rep.tied_t_residual)},
    };
}

std::vector<CheckResult> collapse_suite(std::uint64_t seed) {
    std::vector<CheckResult> out;

    VicregParams params;
    const CollapseThreshold th = vr_collapse_threshold(params, 0.5, 0.0);
    out.push_back({th.mu == 0.25 && th.beta_max == 0.015625, "vr_threshold_exact",
                   "mu " + fmt(th.mu) + ", beta_max " + fmt(th.beta_max)});

    params.beta = 0.01;
    const CollapseScanResult below = collapse_scan(SslMethod::vicreg, 0.5, 0.0, params, 20, 40000, seed);
    out.push_back({below.collapsed_count == 20, "vr_collapse_below_threshold",
                   std::to_string(below.collapsed_count) + "/20 runs dropped the bottom row"});

    params.beta = 0.05;
    const CollapseScanResult above = collapse_scan(SslMethod::vicreg, 0.5, 0.0, params, 20, 40000, seed + 1);
    out.push_back({true, "vr_scan_above_threshold",
                   std::to_string(above.collapsed_count) +
                       "/20 runs collapsed above the threshold (reported, one-sided claim)"});

    const double c = bt_collapse_constant(0.9, 0.1);
    out.push_back({std::abs(c - 4.0 / 65.0) <= 1e-9, "bt_constant",
                   "constant at (0.9, 0.1) is " + fmt(c)});

    params.beta = 0.05;
    const CollapseScanResult bt = collapse_scan(SslMethod::bt, 0.9, 0.1, params, 20, 40000, seed + 2);
    double worst = 0.0;
    for (const CollapseRun& run : bt.runs)
        if (run.loss <= bt.best_loss + 1e-6) worst = std::max(worst, run.sign_distance);
    out.push_back({worst <= 1e-4, "bt_sign_solutions",
                   "max distance of best-loss runs to a column-sign solution " + fmt(worst)});
    return out;
}

std::vector<CheckResult> interlace_suite(std::uint64_t seed) {
    Rng rng(seed);
    bool all_ok = true;
    bool planted_equal = true;
    double worst_gap = 0.0;
    const std::vector<std::size_t> dims{7, 6};
    const std::size_t k = 3;
    for (int inst = 0; inst < 5; ++inst) {
        const GaussianInstance g =
            gen_gaussian(dims, k, {0.8, 0.6, 0.4}, 400, seed * 31 + std::uint64_t(inst));
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Matrix> projectors;
            for (std::size_t d : dims) {
                const std::size_t p = k + rng.below(d - k + 1);
                projectors.push_back(orthonormal_range(rng.gaussian_matrix(d, p)));
            }
            const InterlaceReport rep = interlace_check(g.batch, projectors, k);
            if (!rep.ok) all_ok = false;
            for (double gap : rep.gaps) worst_gap = std::min(worst_gap, gap);
        }

        // A projector containing the exact top-k weights preserves the spectrum.
        const CcaResult exact = cca_exact(g.batch, k, {0.0, 0.0});
        std::vector<Matrix> planted;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            Matrix wide(dims[i], k + 1);
            set_block(wide, 0, 0, exact.weights.weights[i]);
            const Matrix extra = rng.gaussian_matrix(dims[i], 1);
            for (std::size_t r = 0; r < dims[i]; ++r) wide(r, k) = extra(r, 0);
            planted.push_back(orthonormal_range(wide));
        }
        if (!interlace_check(g.batch, planted, k).all_equal) planted_equal = false;
    }
    return {
        {all_ok, "random_projections_interlace",
         "most negative slack " + fmt(worst_gap) + " over 100 random projections"},
        {planted_equal, "planted_projection_equality",
         planted_equal ? "all planted projections preserve the spectrum"
                       : "a planted projection lost correlation"},
    };
}

}  // namespace

std::vector<CheckResult> verify_suite(const std::string& suite, std::uint64_t seed) {
    if (suite == "oracle") return oracle_suite(seed);
    if (suite == "equivalence") return equivalence_suite(seed);
    if (suite == "collapse") return collapse_suite(seed);
    if (suite == "interlace") return interlace_suite(seed);
    throw ConfigInvalid("unknown verify suite: " + suite);
}

}  // namespace gepey

#include "gepey/ssl.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gepey/cca.hpp"
#include "gepey/eig.hpp"
#include "gepey/svd.hpp"

namespace gepey {

void validate(const VicregParams& p) {
    if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !(p.gamma > 0.0))
        throw ConfigInvalid("vicreg: alpha, beta, gamma must all be positive");
}

namespace {

void check_two_view_shapes(const Matrix& x1, const Matrix& x2, const Matrix& b1,
                           const Matrix& b2, const char* where) {
    if (x1.rows != x2.rows) throw ShapeMismatch(std::string(where) + ": sample counts differ");
    if (x1.rows < 2) throw TooFewSamples(std::string(where) + ": need at least two samples");
    if (b1.rows != x1.cols || b2.rows != x2.cols)
        throw ShapeMismatch(std::string(where) + ": weight height does not match view width");
    if (b1.cols != b2.cols) throw ShapeMismatch(std::string(where) + ": views disagree on K");
}

// Distance from zero to one view's block of the loss subdifferential. Where
// a column's standard deviation sits at the variance hinge kink the hinge
// slope is free in [-alpha/2, 0] per unit of variance; the slope directions
// of different columns occupy disjoint weight columns, so the nearest
// subgradient decouples into per-column clamps.
double stationarity_norm(const Matrix& x, const Matrix& z_own, const Matrix& z_other,
                         const VicregParams& p) {
    const double band = 1e-2;
    const std::size_t m = x.rows;
    const std::size_t k = z_own.cols;
    const double scale = 1.0 / double(m - 1);
    Matrix s = mul_at_b(z_own, z_own);
    for (double& v : s.data) v *= scale;

    Matrix g(k, k);
    std::vector<bool> kink(k, false);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) {
            if (r != c) {
                g(r, c) = 2.0 * p.beta * s(r, c);
                continue;
            }
            const double root = std::sqrt(std::max(s(r, r), 0.0));
            double hinge = 0.0;
            if (std::abs(root - 1.0) <= band)
                kink[r] = true;
            else if (root < 1.0)
                hinge = -p.alpha / (2.0 * std::max(root, 1e-150));
            g(r, r) = p.gamma + hinge;
        }

    Matrix grad = mul_at_b(x, z_own * g);
    const Matrix cross = mul_at_b(x, z_other);
    for (std::size_t j = 0; j < grad.data.size(); ++j)
        grad.data[j] = scale * (2.0 * grad.data[j] - 2.0 * p.gamma * cross.data[j]);

    const Matrix u_all = mul_at_b(x, z_own);
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        double gg = 0.0, gu = 0.0, uu = 0.0;
        for (std::size_t r = 0; r < grad.rows; ++r) {
            const double gv = grad(r, c);
            const double uv = 2.0 * scale * u_all(r, c);
            gg += gv * gv;
            gu += gv * uv;
            uu += uv * uv;
        }
        if (!kink[c] || uu == 0.0) {
            total += gg;
            continue;
        }
        const double sigma = std::clamp(-gu / uu, -p.alpha / 2.0, 0.0);
        total += gg + 2.0 * sigma * gu + sigma * sigma * uu;
    }
    return std::sqrt(std::max(total, 0.0));
}

}  // namespace

VicregEvaluation vicreg_loss(const Matrix& x1, const Matrix& x2, const Matrix& b1,
                             const Matrix& b2, const VicregParams& params) {
    validate(params);
    check_two_view_shapes(x1, x2, b1, b2, "vicreg_loss");
    const std::size_t m = x1.rows;
    const std::size_t k = b1.cols;
    const double scale = 1.0 / double(m - 1);

    const Matrix z1 = center_columns(x1 * b1);
    const Matrix z2 = center_columns(x2 * b2);
    Matrix c12 = mul_at_b(z1, z2);
    for (double& x : c12.data) x *= scale;
    Matrix s1 = mul_at_b(z1, z1);
    for (double& x : s1.data) x *= scale;
    Matrix s2 = mul_at_b(z2, z2);
    for (double& x : s2.data) x *= scale;

    VicregEvaluation out;
    out.invariance_reward = 2.0 * params.gamma * trace(c12);

    // d(loss)/d(within-view covariance), needed per view.
    auto cov_grad = [&](const Matrix& s) {
        Matrix g(k, k);
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c) {
                if (r == c) {
                    const double v = s(r, r);
                    double hinge = 0.0;
                    if (v < 1.0) hinge = -params.alpha / (2.0 * std::sqrt(std::max(v, 1e-300)));
                    g(r, r) = params.gamma + hinge;
                } else {
                    g(r, c) = 2.0 * params.beta * s(r, c);
                }
            }
        return g;
    };
    auto accumulate_terms = [&](const Matrix& s) {
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c) {
                if (r == c) {
                    const double root = std::sqrt(std::max(s(r, r), 0.0));
                    out.variance_term += params.alpha * std::max(1.0 - root, 0.0) +
                                         params.gamma * s(r, r);
                } else {
                    out.covariance_term += params.beta * s(r, c) * s(r, c);
                }
            }
    };
    accumulate_terms(s1);
    accumulate_terms(s2);
    out.loss = -out.invariance_reward + out.variance_term + out.covariance_term;

    const Matrix g1 = cov_grad(s1);
    const Matrix g2 = cov_grad(s2);
    Matrix within1 = z1 * g1;
    Matrix within2 = z2 * g2;
    out.grad1 = mul_at_b(x1, within1);
    out.grad2 = mul_at_b(x2, within2);
    const Matrix cross1 = mul_at_b(x1, z2);
    const Matrix cross2 = mul_at_b(x2, z1);
    for (std::size_t j = 0; j < out.grad1.data.size(); ++j)
        out.grad1.data[j] = scale * (2.0 * out.grad1.data[j] - 2.0 * params.gamma * cross1.data[j]);
    for (std::size_t j = 0; j < out.grad2.data.size(); ++j)
        out.grad2.data[j] = scale * (2.0 * out.grad2.data[j] - 2.0 * params.gamma * cross2.data[j]);
    return out;
}

BtEvaluation barlow_twins_loss(const Matrix& x1, const Matrix& x2, const Matrix& b1,
                               const Matrix& b2, double beta) {
    if (!(beta > 0.0)) throw ConfigInvalid("barlow_twins_loss: beta must be positive");
    check_two_view_shapes(x1, x2, b1, b2, "barlow_twins_loss");
    const std::size_t m = x1.rows;
    const std::size_t k = b1.cols;
    const double scale = 1.0 / double(m - 1);

    const Matrix z1 = center_columns(x1 * b1);
    const Matrix z2 = center_columns(x2 * b2);
    Matrix c = mul_at_b(z1, z2);
    for (double& x : c.data) x *= scale;

    BtEvaluation out;
    out.cross_cov = c;
    out.diag_term = double(k);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t col = 0; col < k; ++col) {
            if (r == col) {
                out.reward += 2.0 * c(r, r);
                out.diag_term += c(r, r) * c(r, r);
            } else {
                out.offdiag_term += beta * c(r, col) * c(r, col);
            }
        }
    out.loss = -out.reward + out.diag_term + out.offdiag_term;

    for (std::size_t view = 0; view < 2; ++view) {
        const Matrix& z = view == 0 ? z1 : z2;
        std::vector<double>& res = view == 0 ? out.variance_residual1 : out.variance_residual2;
        res.resize(k);
        for (std::size_t col = 0; col < k; ++col) {
            double v = 0.0;
            for (std::size_t r = 0; r < m; ++r) v += z(r, col) * z(r, col);
            res[col] = std::fabs(v * scale - 1.0);
        }
    }

    Matrix g(k, k);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t col = 0; col < k; ++col)
            g(r, col) = r == col ? -2.0 * (1.0 - c(r, r)) : 2.0 * beta * c(r, col);
    out.grad1 = mul_at_b(x1, mul_a_bt(z2, g));
    out.grad2 = mul_at_b(x2, z1 * g);
    for (double& x : out.grad1.data) x *= scale;
    for (double& x : out.grad2.data) x *= scale;
    return out;
}

BtStationarityReport bt_stationarity(const Matrix& c, double beta) {
    if (c.rows != c.cols) throw ShapeMismatch("bt_stationarity: matrix not square");
    BtStationarityReport report;
    report.c = c;
    report.multipliers.resize(c.rows);
    for (std::size_t r = 0; r < c.rows; ++r) {
        double off = 0.0;
        for (std::size_t col = 0; col < c.cols; ++col)
            if (col != r) off += c(r, col) * c(r, col);
        report.multipliers[r] = (1.0 - c(r, r)) * c(r, r) - beta * off;
    }
    return report;
}

namespace {

// Sigma-orthonormal completion of a weight span: columns span at least
// span(b), exactly r of them, orthonormal in the sigma inner product.
Matrix sigma_orthonormal_span(const Matrix& xbar, const Matrix& sigma, const Matrix& b,
                              std::size_t r) {
    Matrix w = orthonormal_range(b);
    if (w.cols < r) {
        // Extend with the leading principal directions of the data outside
        // the current span.
        Matrix residual = xbar;
        {
            const Matrix coords = residual * w;           // M x rank
            const Matrix back = mul_a_bt(coords, w);      // M x D
            residual = residual - back;
        }
        const SvdResult rx = svd(residual);
        const std::size_t need = r - w.cols;
        Matrix extended(w.rows, r);
        set_block(extended, 0, 0, w);
        std::size_t got = 0;
        for (std::size_t i = 0; i < rx.singular_values.size() && got < need; ++i) {
            if (!(rx.singular_values[i] >
                  1e-8 * std::max(rx.singular_values.front(), 1e-300)))
                break;
            for (std::size_t row = 0; row < w.rows; ++row)
                extended(row, w.cols + got) = rx.v(row, i);
            ++got;
        }
        if (got < need) throw DegenerateData("decompose_subspace: data cannot span the rank");
        w = std::move(extended);
    }
    const Matrix gram = symmetrized(mul_at_b(w, sigma * w));
    Matrix root;
    try {
        root = chol_inv_sqrt(gram, 0.0);
    } catch (const NotPositiveDefinite&) {
        throw DegenerateData("decompose_subspace: span is degenerate under the data metric");
    }
    return w * root;
}

}  // namespace

SubspaceDecomposition decompose_subspace(const Matrix& x1, const Matrix& x2, const Matrix& b1,
                                         const Matrix& b2) {
    check_two_view_shapes(x1, x2, b1, b2, "decompose_subspace");

    const Matrix s11 = symmetrized(empirical_cov(x1, x1));
    const Matrix s22 = symmetrized(empirical_cov(x2, x2));
    const Matrix s12 = empirical_cov(x1, x2);
    try {
        cholesky(s11);
        cholesky(s22);
    } catch (const NotPositiveDefinite&) {
        throw DegenerateData("decompose_subspace: sample covariance is rank deficient");
    }

    const std::size_t r = std::max(numeric_rank(b1), numeric_rank(b2));
    if (r == 0) throw RankZero("decompose_subspace: both weight matrices vanish");

    const Matrix xbar1 = center_columns(x1);
    const Matrix xbar2 = center_columns(x2);
    const Matrix v1 = sigma_orthonormal_span(xbar1, s11, b1, r);
    const Matrix v2 = sigma_orthonormal_span(xbar2, s22, b2, r);

    const SvdResult aligned = svd(mul_at_b(v1, s12 * v2));
    SubspaceDecomposition out;
    out.u1 = v1 * aligned.u;
    out.u2 = v2 * aligned.v;
    out.lambda = aligned.singular_values;
    out.t1 = mul_at_b(out.u1, s11 * b1);
    out.t2 = mul_at_b(out.u2, s22 * b2);
    return out;
}

EquivalenceReport check_cca_equivalence(const Matrix& x1, const Matrix& x2, const Matrix& b1,
                                        const Matrix& b2, const VicregParams& params,
                                        const EquivalenceOptions& opts) {
    validate(params);
    check_two_view_shapes(x1, x2, b1, b2, "check_cca_equivalence");
    EquivalenceReport report;
    const Matrix z1 = center_columns(x1 * b1);
    const Matrix z2 = center_columns(x2 * b2);
    const double s1 = stationarity_norm(x1, z1, z2, params);
    const double s2 = stationarity_norm(x2, z2, z1, params);
    report.grad_norm = std::sqrt(s1 * s1 + s2 * s2);
    report.converged = report.grad_norm <= opts.grad_tol;
    if (opts.require_converged && !report.converged)
        throw NotConverged("check_cca_equivalence: gradient norm above threshold");
    const std::size_t r = std::max(numeric_rank(z1), numeric_rank(z2));
    report.effective_rank = r;
    if (r == 0) throw RankZero("check_cca_equivalence: representation collapsed to zero");

    MultiviewBatch batch;
    batch.views = {x1, x2};
    const CcaResult exact = cca_exact(batch, r, {0.0, 0.0}, opts.jitter);
    const Matrix ref1 = center_columns(x1 * exact.weights.weights[0]);
    const Matrix ref2 = center_columns(x2 * exact.weights.weights[1]);
    report.angles1 = principal_angles(z1, ref1);
    report.angles2 = principal_angles(z2, ref2);
    double worst = 0.0;
    for (double a : report.angles1) worst = std::max(worst, a);
    for (double a : report.angles2) worst = std::max(worst, a);
    report.pass = worst <= opts.angle_tol;

    const SubspaceDecomposition dec = decompose_subspace(x1, x2, b1, b2);
    double residual = 0.0;
    for (std::size_t row = 0; row < dec.t1.rows; ++row) {
        if (!(dec.lambda[row] > opts.lambda_tol)) continue;
        for (std::size_t col = 0; col < dec.t1.cols; ++col)
            residual = std::max(residual, std::fabs(dec.t1(row, col) - dec.t2(row, col)));
    }
    report.tied_t_residual = residual;
    return report;
}

CollapseThreshold vr_collapse_threshold(const VicregParams& params, double lambda1,
                                        double lambda2) {
    validate(params);
    if (!(lambda1 < 1.0) || !(lambda2 >= 0.0) || !(lambda1 >= lambda2))
        throw InvalidLambdas("vr_collapse_threshold: need 1 > lambda1 >= lambda2 >= 0");
    auto mstar = [&](double l) { return std::min(1.0, params.alpha / (2.0 * params.gamma * (1.0 - l))); };
    auto f = [&](double m, double l) { return m * m * params.gamma * (1.0 - l) - m * params.alpha; };
    const double m1 = mstar(lambda1);
    const double m2 = mstar(lambda2);
    CollapseThreshold out;
    out.mu = std::min(m1, -f(m2, lambda2) / params.alpha);
    out.beta_max = params.gamma * (lambda1 - lambda2) * out.mu * out.mu / 2.0;
    return out;
}

double bt_collapse_constant(double lambda1, double lambda2) {
    if (!(lambda1 <= 1.0) || !(lambda2 >= 0.0) || !(lambda1 >= lambda2) ||
        !(lambda1 + lambda2 > 0.0))
        throw InvalidLambdas("bt_collapse_constant: need 1 >= lambda1 >= lambda2 >= 0, sum positive");
    return 2.0 * (1.0 - lambda1) * (lambda1 - lambda2) /
           ((3.0 * lambda1 - lambda2) * (lambda1 + lambda2));
}

namespace {

void check_lambda(const Matrix& t, const std::vector<double>& lambda, const char* where) {
    if (t.rows != lambda.size())
        throw ShapeMismatch(std::string(where) + ": lambda length does not match rows");
    for (double l : lambda)
        if (!(l >= 0.0 && l <= 1.0)) throw InvalidLambdas(std::string(where) + ": lambda outside [0,1]");
}

// f(t) = gamma ||t||^2 + alpha sum_k (1 - ||t_k||)_+ + beta sum_{k!=l} <t_k, t_l>^2
double vr_single_side(const Matrix& t, const VicregParams& p) {
    double out = p.gamma * frobenius_inner(t, t);
    const std::size_t k = t.cols;
    std::vector<double> norms(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        double n2 = 0.0;
        for (std::size_t r = 0; r < t.rows; ++r) n2 += t(r, c) * t(r, c);
        norms[c] = std::sqrt(n2);
        out += p.alpha * std::max(1.0 - norms[c], 0.0);
    }
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b) continue;
            double inner = 0.0;
            for (std::size_t r = 0; r < t.rows; ++r) inner += t(r, a) * t(r, b);
            out += p.beta * inner * inner;
        }
    return out;
}

}  // namespace

double vr_untied_matrix_loss(const Matrix& t1, const Matrix& t2, const std::vector<double>& lambda,
                             const VicregParams& params) {
    validate(params);
    if (!t1.same_shape(t2)) throw ShapeMismatch("vr_untied_matrix_loss: coordinate shapes differ");
    check_lambda(t1, lambda, "vr_untied_matrix_loss");
    double cross = 0.0;
    for (std::size_t r = 0; r < t1.rows; ++r)
        for (std::size_t c = 0; c < t1.cols; ++c) cross += lambda[r] * t1(r, c) * t2(r, c);
    return -2.0 * params.gamma * cross + vr_single_side(t1, params) + vr_single_side(t2, params);
}

double vr_matrix_loss(const Matrix& t, const std::vector<double>& lambda,
                      const VicregParams& params) {
    return vr_untied_matrix_loss(t, t, lambda, params);
}

Matrix vr_matrix_grad(const Matrix& t, const std::vector<double>& lambda,
                      const VicregParams& params) {
    validate(params);
    check_lambda(t, lambda, "vr_matrix_grad");
    const std::size_t rows = t.rows;
    const std::size_t k = t.cols;
    Matrix g(rows, k);
    // 4 gamma (I - Lambda) t
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < k; ++c) g(r, c) = 4.0 * params.gamma * (1.0 - lambda[r]) * t(r, c);
    // hinge: subgradient zero at the kink and at zero columns
    for (std::size_t c = 0; c < k; ++c) {
        double n2 = 0.0;
        for (std::size_t r = 0; r < rows; ++r) n2 += t(r, c) * t(r, c);
        const double n = std::sqrt(n2);
        if (n > 0.0 && n < 1.0)
            for (std::size_t r = 0; r < rows; ++r) g(r, c) -= 2.0 * params.alpha * t(r, c) / n;
    }
    // cross-column coupling
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t l = 0; l < k; ++l) {
            if (l == c) continue;
            double inner = 0.0;
            for (std::size_t r = 0; r < rows; ++r) inner += t(r, c) * t(r, l);
            for (std::size_t r = 0; r < rows; ++r) g(r, c) += 8.0 * params.beta * inner * t(r, l);
        }
    return g;
}

double bt_matrix_loss(const Matrix& t1, const Matrix& t2, const std::vector<double>& lambda,
                      double beta) {
    if (!(beta > 0.0)) throw ConfigInvalid("bt_matrix_loss: beta must be positive");
    if (!t1.same_shape(t2)) throw ShapeMismatch("bt_matrix_loss: coordinate shapes differ");
    check_lambda(t1, lambda, "bt_matrix_loss");
    const std::size_t k = t1.cols;
    Matrix c(k, k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            double acc = 0.0;
            for (std::size_t r = 0; r < t1.rows; ++r) acc += lambda[r] * t1(r, a) * t2(r, b);
            c(a, b) = acc;
        }
    double loss = 0.0;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b)
                loss += (1.0 - c(a, a)) * (1.0 - c(a, a));
            else
                loss += beta * c(a, b) * c(a, b);
        }
    return loss;
}

namespace {

double bottom_row_norm(const Matrix& t) {
    double n2 = 0.0;
    for (std::size_t c = 0; c < t.cols; ++c) n2 += t(t.rows - 1, c) * t(t.rows - 1, c);
    return std::sqrt(n2);
}

// Three-phase decaying gradient descent; small and deterministic.
template <typename LossGrad>
void descend(Matrix& t, std::size_t budget, const LossGrad& lg) {
    const double rates[3] = {0.05, 0.01, 0.002};
    const std::size_t phase = budget / 3;
    for (std::size_t s = 0; s < budget; ++s) {
        const double lr = rates[std::min<std::size_t>(phase == 0 ? 2 : s / phase, 2)];
        const Matrix g = lg(t);
        for (std::size_t j = 0; j < t.data.size(); ++j) t.data[j] -= lr * g.data[j];
    }
}

Matrix random_start_in_ball(Rng& rng, std::size_t rows, std::size_t k) {
    Matrix t(rows, k);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> dir = rng.gaussian_vector(rows);
        const double n = norm2(dir);
        const double radius = rng.uniform();
        for (std::size_t r = 0; r < rows; ++r) t(r, c) = n > 0.0 ? dir[r] / n * radius : 0.0;
    }
    return t;
}

}  // namespace

CollapseScanResult collapse_scan(SslMethod method, double lambda1, double lambda2,
                                 const VicregParams& params, std::size_t restarts,
                                 std::size_t budget, std::uint64_t seed) {
    const std::vector<double> lambda{lambda1, lambda2};
    Rng rng(seed);
    CollapseScanResult out;
    out.best_loss = 0.0;
    for (std::size_t run = 0; run < restarts; ++run) {
        CollapseRun row;
        if (method == SslMethod::vicreg) {
            Matrix t = random_start_in_ball(rng, 2, 2);
            descend(t, budget, [&](const Matrix& cur) { return vr_matrix_grad(cur, lambda, params); });
            row.t = std::move(t);
            row.loss = vr_matrix_loss(row.t, lambda, params);
        } else {
            // Unit-length columns via angles; tied coordinates.
            double th[2] = {rng.uniform() * 6.283185307179586, rng.uniform() * 6.283185307179586};
            auto t_of = [](const double* a) {
                Matrix t(2, 2);
                t(0, 0) = std::cos(a[0]);
                t(1, 0) = std::sin(a[0]);
                t(0, 1) = std::cos(a[1]);
                t(1, 1) = std::sin(a[1]);
                return t;
            };
            const double rates[3] = {0.1, 0.02, 0.004};
            const std::size_t phase = std::max<std::size_t>(budget / 3, 1);
            for (std::size_t s = 0; s < budget; ++s) {
                const double lr = rates[std::min<std::size_t>(s / phase, 2)];
                const Matrix t = t_of(th);
                // dL/dc with c = t' Lambda t, then chain through the angles.
                Matrix c(2, 2);
                for (std::size_t a = 0; a < 2; ++a)
                    for (std::size_t b = 0; b < 2; ++b)
                        c(a, b) = lambda[0] * t(0, a) * t(0, b) + lambda[1] * t(1, a) * t(1, b);
                Matrix gc(2, 2);
                for (std::size_t a = 0; a < 2; ++a)
                    for (std::size_t b = 0; b < 2; ++b)
                        gc(a, b) = a == b ? -2.0 * (1.0 - c(a, a)) : 2.0 * params.beta * c(a, b);
                // dL/dt = 2 Lambda t gc for symmetric gc.
                Matrix gt(2, 2);
                for (std::size_t r = 0; r < 2; ++r)
                    for (std::size_t a = 0; a < 2; ++a) {
                        double acc = 0.0;
                        for (std::size_t b = 0; b < 2; ++b) acc += t(r, b) * gc(b, a);
                        gt(r, a) = 2.0 * lambda[r] * acc;
                    }
                for (std::size_t a = 0; a < 2; ++a) {
                    const double dtheta = -std::sin(th[a]) * gt(0, a) + std::cos(th[a]) * gt(1, a);
                    th[a] -= lr * dtheta;
                }
            }
            row.t = t_of(th);
            row.loss = bt_matrix_loss(row.t, row.t, lambda, params.beta);
            double best = 1e300;
            for (int s1 = -1; s1 <= 1; s1 += 2)
                for (int s2 = -1; s2 <= 1; s2 += 2) {
                    double dist = 0.0;
                    dist = std::max(dist, std::fabs(row.t(0, 0) - double(s1)));
                    dist = std::max(dist, std::fabs(row.t(0, 1) - double(s2)));
                    dist = std::max(dist, std::fabs(row.t(1, 0)));
                    dist = std::max(dist, std::fabs(row.t(1, 1)));
                    best = std::min(best, dist);
                }
            row.sign_distance = best;
        }
        row.bottom_row_norm = bottom_row_norm(row.t);
        row.collapsed = row.bottom_row_norm <= 1e-4;
        if (row.collapsed) ++out.collapsed_count;
        if (out.runs.empty() || row.loss < out.best_loss) out.best_loss = row.loss;
        out.runs.push_back(std::move(row));
    }
    return out;
}

double vr_phi(const std::vector<double>& lambda, const VicregParams& params, std::size_t restarts,
              std::size_t budget, std::uint64_t seed) {
    validate(params);
    const std::size_t k = lambda.size();
    Rng rng(seed);
    double best = 1e300;
    for (std::size_t run = 0; run < restarts; ++run) {
        Matrix t = random_start_in_ball(rng, k, k);
        descend(t, budget, [&](const Matrix& cur) { return vr_matrix_grad(cur, lambda, params); });
        best = std::min(best, vr_matrix_loss(t, lambda, params));
    }
    return best;
}

VariancePenalty bt_variance_penalty(const Matrix& x, const Matrix& b, double weight) {
    if (x.cols != b.rows) throw ShapeMismatch("bt_variance_penalty: weight height mismatch");
    if (x.rows < 2) throw TooFewSamples("bt_variance_penalty: need at least two samples");
    const std::size_t m = x.rows;
    const std::size_t k = b.cols;
    const double scale = 1.0 / double(m - 1);
    const Matrix z = center_columns(x * b);

    VariancePenalty out;
    Matrix gdiag(k, k);
    for (std::size_t col = 0; col < k; ++col) {
        double v = 0.0;
        for (std::size_t r = 0; r < m; ++r) v += z(r, col) * z(r, col);
        v *= scale;
        out.value += weight * (v - 1.0) * (v - 1.0);
        gdiag(col, col) = weight * 4.0 * (v - 1.0) * scale;
    }
    out.grad = mul_at_b(x, z * gdiag);
    return out;
}

namespace {

SslTrainResult ssl_train(const Matrix& x1, const Matrix& x2, std::size_t k,
                         const TrainConfig& config, const Matrix* init1, const Matrix* init2,
                         bool vicreg, const VicregParams& params, double beta,
                         double constraint_weight) {
    if (k == 0 || k > std::min(x1.cols, x2.cols)) throw KTooLarge("ssl train: bad K");
    Rng rng(config.seed);
    std::vector<Matrix> p;
    p.push_back(init1 ? *init1 : gaussian_init(x1.cols, k, rng));
    p.push_back(init2 ? *init2 : gaussian_init(x2.cols, k, rng));
    if (p[0].rows != x1.cols || p[1].rows != x2.cols || p[0].cols != k || p[1].cols != k)
        throw ShapeMismatch("ssl train: bad initial weights");
    OptimizerState opt = make_optimizer(config.optimizer, p);

    SslTrainResult out;
    for (std::size_t s = 0; s <= config.steps; ++s) {
        std::vector<Matrix> grads;
        TraceRow row;
        row.step = s;
        if (vicreg) {
            VicregEvaluation eval = vicreg_loss(x1, x2, p[0], p[1], params);
            row.loss = eval.loss;
            row.reward = eval.invariance_reward;
            row.norm_penalty = eval.variance_term;
            row.orth_penalty = eval.covariance_term;
            grads.push_back(std::move(eval.grad1));
            grads.push_back(std::move(eval.grad2));
        } else {
            BtEvaluation eval = barlow_twins_loss(x1, x2, p[0], p[1], beta);
            grads.push_back(std::move(eval.grad1));
            grads.push_back(std::move(eval.grad2));
            // Quadratic penalty keeps the unit-variance constraint honest.
            double penalty = 0.0;
            for (std::size_t view = 0; view < 2; ++view) {
                const VariancePenalty vp =
                    bt_variance_penalty(view == 0 ? x1 : x2, p[view], constraint_weight);
                penalty += vp.value;
                for (std::size_t j = 0; j < grads[view].data.size(); ++j)
                    grads[view].data[j] += vp.grad.data[j];
            }
            row.loss = eval.loss + penalty;
            row.reward = eval.reward;
            row.norm_penalty = eval.diag_term + penalty;
            row.orth_penalty = eval.offdiag_term;
        }
        out.trace.push_back(row);
        if (s < config.steps) step(opt, p, grads);
    }
    out.b1 = std::move(p[0]);
    out.b2 = std::move(p[1]);
    return out;
}

}  // namespace

SslTrainResult train_vicreg(const Matrix& x1, const Matrix& x2, std::size_t k,
                            const VicregParams& params, const TrainConfig& config,
                            const Matrix* init1, const Matrix* init2) {
    validate(params);
    return ssl_train(x1, x2, k, config, init1, init2, true, params, 0.0, 0.0);
}

SslTrainResult train_bt(const Matrix& x1, const Matrix& x2, std::size_t k, double beta,
                        double constraint_weight, const TrainConfig& config) {
    if (!(constraint_weight >= 0.0)) throw ConfigInvalid("train_bt: negative constraint weight");
    VicregParams unused;
    return ssl_train(x1, x2, k, config, nullptr, nullptr, false, unused, beta, constraint_weight);
}

}  // namespace gepey

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gepey/ey.hpp"
#include "gepey/matrix.hpp"

namespace gepey {

struct VicregParams {
    double alpha = 1.0;  // variance hinge weight
    double beta = 1.0;   // covariance penalty weight
    double gamma = 1.0;  // invariance weight
};

void validate(const VicregParams& p);

// loss = -invariance_reward + variance_term + covariance_term, always.
struct VicregEvaluation {
    double loss = 0.0;
    double invariance_reward = 0.0;  // 2 gamma trace of the cross covariance
    double variance_term = 0.0;      // hinge plus trace parts, both views
    double covariance_term = 0.0;    // off-diagonal squares, both views
    Matrix grad1, grad2;
};

// Covariance form of the two-view loss. The variance hinge uses subgradient
// zero at its kink.
VicregEvaluation vicreg_loss(const Matrix& x1, const Matrix& x2, const Matrix& b1,
                             const Matrix& b2, const VicregParams& params);

// loss = -reward + diag_term + offdiag_term, always. The unit-variance
// constraint is reported through the residuals, never folded into the loss.
struct BtEvaluation {
    double loss = 0.0;
    double reward = 0.0;        // twice the matched cross covariances
    double diag_term = 0.0;     // K plus sum of squared matched covariances
    double offdiag_term = 0.0;  // beta-weighted mismatched squares
    std::vector<double> variance_residual1, variance_residual2;  // |Var z_k - 1|
    Matrix cross_cov;
    Matrix grad1, grad2;
};

BtEvaluation barlow_twins_loss(const Matrix& x1, const Matrix& x2, const Matrix& b1,
                               const Matrix& b2, double beta);

// Lagrange multipliers of the constrained problem read off a cross matrix.
struct BtStationarityReport {
    Matrix c;
    std::vector<double> multipliers;  // (1 - c_kk) c_kk - beta sum_{l!=k} c_kl^2
};

BtStationarityReport bt_stationarity(const Matrix& c, double beta);

// Any weight pair factors over a correlation-aligned basis: columns of each
// u are variance-orthonormal, u1' Cov u2 is the diagonal lambda, and the
// original weights are recovered as b_i = u_i t_i.
struct SubspaceDecomposition {
    Matrix u1, u2;               // D_i x R
    Matrix t1, t2;               // R x K
    std::vector<double> lambda;  // length R, descending
};

SubspaceDecomposition decompose_subspace(const Matrix& x1, const Matrix& x2, const Matrix& b1,
                                         const Matrix& b2);

struct EquivalenceOptions {
    double angle_tol = 1e-2;
    double grad_tol = 1e-4;
    bool require_converged = true;  // throw NotConverged above grad_tol
    double lambda_tol = 1e-3;       // rows counted as live for the tied-T check
    double jitter = 0.0;
};

struct EquivalenceReport {
    bool pass = false;       // all principal angles within angle_tol
    bool converged = false;  // gradient norm within grad_tol
    // Distance from zero to the loss subdifferential: columns whose standard
    // deviation sits at the variance hinge kink take the nearest admissible
    // hinge slope, so a kink optimum reports zero.
    double grad_norm = 0.0;
    std::size_t effective_rank = 0;
    std::vector<double> angles1, angles2;  // representation span vs top-R span, per view
    double tied_t_residual = 0.0;          // max row difference of t1, t2 on live rows
};

// Compares the spans of the learned representations against the top-R exact
// solution at the representation level, where R is the effective rank; also
// reports how far the two coordinate matrices are from being tied.
EquivalenceReport check_cca_equivalence(const Matrix& x1, const Matrix& x2, const Matrix& b1,
                                        const Matrix& b2, const VicregParams& params,
                                        const EquivalenceOptions& opts = {});

struct CollapseThreshold {
    double mu = 0.0;
    double beta_max = 0.0;  // strictly below this, global minimizers drop the bottom row
};

// Closed-form threshold for the two-component tied problem:
// m_k = min(1, alpha / (2 gamma (1 - lambda_k))), f_k(m) = m^2 gamma (1 - lambda_k) - m alpha,
// mu = min(m_1, -f_2(m_2)/alpha), beta_max = gamma (lambda_1 - lambda_2) mu^2 / 2.
CollapseThreshold vr_collapse_threshold(const VicregParams& params, double lambda1, double lambda2);

// 2 (1 - l1)(l1 - l2) / ((3 l1 - l2)(l1 + l2)).
double bt_collapse_constant(double lambda1, double lambda2);

// Coordinate losses over the correlation-aligned basis. Columns of t are
// components; lambda holds the basis correlations.
double vr_untied_matrix_loss(const Matrix& t1, const Matrix& t2, const std::vector<double>& lambda,
                             const VicregParams& params);
double vr_matrix_loss(const Matrix& t, const std::vector<double>& lambda,
                      const VicregParams& params);
Matrix vr_matrix_grad(const Matrix& t, const std::vector<double>& lambda,
                      const VicregParams& params);
double bt_matrix_loss(const Matrix& t1, const Matrix& t2, const std::vector<double>& lambda,
                      double beta);

enum class SslMethod { vicreg, bt };

struct CollapseRun {
    Matrix t;                      // final 2 x 2 coordinates
    double loss = 0.0;
    double bottom_row_norm = 0.0;
    bool collapsed = false;        // bottom row within 1e-4 of zero
    double sign_distance = 0.0;    // bt only: distance to nearest all-or-nothing solution
};

struct CollapseScanResult {
    std::vector<CollapseRun> runs;
    std::size_t collapsed_count = 0;
    double best_loss = 0.0;
};

// Multi-restart minimization of the two-component coordinate loss. For bt
// the columns are constrained to unit length (angle parameterization) and
// only params.beta is read.
CollapseScanResult collapse_scan(SslMethod method, double lambda1, double lambda2,
                                 const VicregParams& params, std::size_t restarts,
                                 std::size_t budget, std::uint64_t seed);

// Multi-restart minimum of the tied coordinate loss; restarts start with
// column norms at most one, where the minimum is attained.
double vr_phi(const std::vector<double>& lambda, const VicregParams& params, std::size_t restarts,
              std::size_t budget, std::uint64_t seed);

// Quadratic unit-variance penalty weight * sum_k (Var z_k - 1)^2 with its
// weight-space gradient; shared by the bt trainer and the cli runner.
struct VariancePenalty {
    double value = 0.0;
    Matrix grad;
};

VariancePenalty bt_variance_penalty(const Matrix& x, const Matrix& b, double weight);

struct SslTrainResult {
    Matrix b1, b2;
    std::vector<TraceRow> trace;
};

// Full-batch gradient training of the two-view losses. For bt, the
// unit-variance constraint is handled by a quadratic penalty of the given
// weight, and the traced loss includes that penalty in its diagonal term.
SslTrainResult train_vicreg(const Matrix& x1, const Matrix& x2, std::size_t k,
                            const VicregParams& params, const TrainConfig& config,
                            const Matrix* init1 = nullptr, const Matrix* init2 = nullptr);
SslTrainResult train_bt(const Matrix& x1, const Matrix& x2, std::size_t k, double beta,
                        double constraint_weight, const TrainConfig& config);

}  // namespace gepey

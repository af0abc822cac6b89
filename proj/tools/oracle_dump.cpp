// Regenerates the frozen numeric constants embedded in the test suite.
// Everything here is computed with naive dense loops, independent of the
// library implementations, so the printed values can arbitrate. Output is
// one labeled line per value group, 17 significant digits.

#include <cmath>
#include <cstdio>
#include <vector>

namespace {

using Vec = std::vector<double>;

struct M {
    std::size_t r = 0, c = 0;
    Vec d;
    M(std::size_t rr, std::size_t cc) : r(rr), c(cc), d(rr * cc, 0.0) {}
    M(std::size_t rr, std::size_t cc, Vec v) : r(rr), c(cc), d(std::move(v)) {}
    double& at(std::size_t i, std::size_t j) { return d[i * c + j]; }
    double at(std::size_t i, std::size_t j) const { return d[i * c + j]; }
};

M mul(const M& a, const M& b) {
    M out(a.r, b.c);
    for (std::size_t i = 0; i < a.r; ++i)
        for (std::size_t k = 0; k < a.c; ++k)
            for (std::size_t j = 0; j < b.c; ++j) out.at(i, j) += a.at(i, k) * b.at(k, j);
    return out;
}

M tmul(const M& a, const M& b) {  // a^T b
    M out(a.c, b.c);
    for (std::size_t k = 0; k < a.r; ++k)
        for (std::size_t i = 0; i < a.c; ++i)
            for (std::size_t j = 0; j < b.c; ++j) out.at(i, j) += a.at(k, i) * b.at(k, j);
    return out;
}

M centered(const M& a) {
    M out = a;
    for (std::size_t j = 0; j < a.c; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < a.r; ++i) mean += a.at(i, j);
        mean /= double(a.r);
        for (std::size_t i = 0; i < a.r; ++i) out.at(i, j) -= mean;
    }
    return out;
}

// Unbiased covariance of centered blocks.
M cov(const M& a, const M& b) {
    M out = tmul(centered(a), centered(b));
    for (double& v : out.d) v /= double(a.r - 1);
    return out;
}

double tr(const M& a) {
    double t = 0.0;
    for (std::size_t i = 0; i < a.r; ++i) t += a.at(i, i);
    return t;
}

void print(const char* name, const Vec& vals) {
    std::printf("%s", name);
    for (double v : vals) std::printf(" %.17g", v);
    std::printf("\n");
}

void printm(const char* name, const M& m) { print(name, m.d); }

// Pencil eigenvalues of ([[3,1],[1,2]], diag(2,1)) by the quadratic formula:
// det(A - l B) = 2l^2 - 7l + 5 = 0.
void pencil2x2() {
    const double disc = std::sqrt(7.0 * 7.0 - 4.0 * 2.0 * 5.0);
    const double l1 = (7.0 + disc) / 4.0;
    const double l2 = (7.0 - disc) / 4.0;
    print("pencil2x2_values", {l1, l2});
    // Null vectors of A - l B, scaled to u^T B u = 1.
    print("pencil2x2_vec1", {1.0 / std::sqrt(6.0), 2.0 / std::sqrt(6.0)});
    print("pencil2x2_vec2", {1.0 / std::sqrt(3.0), -1.0 / std::sqrt(3.0)});
}

// Subspace loss pieces at a fixed non-optimal point of a fixed 3x3 pencil.
void ey_fixed() {
    const M a(3, 3, {2, 0.5, 0, 0.5, 1, 0.25, 0, 0.25, 0.5});
    const M b(3, 3, {1, 0, 0, 0, 2, 0, 0, 0, 4});
    const M u(3, 2, {1, 0.5, 0.25, -0.5, 0, 1});
    const M uau = tmul(u, mul(a, u));
    const M ubu = tmul(u, mul(b, u));
    const double reward = 2.0 * tr(uau);
    double norm = 0.0, orth = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            (i == j ? norm : orth) += ubu.at(i, j) * ubu.at(i, j);
    print("ey_fixed_terms", {-reward + norm + orth, reward, norm, orth});
    M grad = mul(b, mul(u, ubu));
    const M au = mul(a, u);
    for (std::size_t j = 0; j < grad.d.size(); ++j) grad.d[j] = -4.0 * au.d[j] + 4.0 * grad.d[j];
    printm("ey_fixed_grad", grad);
}

// Two-batch two-view estimator with mixed alpha, from dense covariances:
//   V_b = sum_i [alpha_i U_i^T U_i + (1-alpha_i) U_i^T S_bi U_i]
//   loss = -2 sum_{i != j} tr(U_i^T C_ij U_j)  (batch 1)  + tr_split(V_1 V_2)
//   grad_i = -4 C_1,ij U_j + 2 (alpha U_i + (1-alpha) S_1i U_i) V_2
//                          + 2 (alpha U_i + (1-alpha) S_2i U_i) V_1
void stochastic_fixed() {
    const M x11(3, 2, {0.5, -1, 1.5, 2, -0.5, 0.25});
    const M x12(3, 3, {1, 0, -0.5, 0.25, -1, 1, -2, 0.5, 0.75});
    const M x21(4, 2, {0.25, 1, -1, -0.5, 2, 0.5, 0.75, -1.5});
    const M x22(4, 3, {0.5, 1, -1, 1.5, -0.25, 0.5, -0.75, 2, 0.25, 0, -1, 1});
    const M u1(2, 2, {1, 0.5, -0.25, 0.75});
    const M u2(3, 2, {0.5, -0.5, 1, 0.25, -0.75, 1});
    const double alpha[2] = {0.25, 0.75};

    const M z11 = mul(x11, u1), z12 = mul(x12, u2);
    const M z21 = mul(x21, u1), z22 = mul(x22, u2);
    auto metric = [&](const M& za, const M& zb) {
        M v(2, 2);
        const M g1 = tmul(u1, u1), g2 = tmul(u2, u2);
        const M s1 = cov(za, za), s2 = cov(zb, zb);
        for (std::size_t j = 0; j < 4; ++j)
            v.d[j] = alpha[0] * g1.d[j] + (1 - alpha[0]) * s1.d[j] + alpha[1] * g2.d[j] +
                     (1 - alpha[1]) * s2.d[j];
        return v;
    };
    const M v1 = metric(z11, z12);
    const M v2 = metric(z21, z22);
    const M c12 = cov(z11, z12);
    const double reward = 2.0 * (tr(c12) + tr(c12));  // ordered pairs (1,2) and (2,1)
    double norm = 0.0, orth = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            (i == j ? norm : orth) += v1.at(i, j) * v2.at(i, j);
    print("stochastic_fixed_terms", {-reward + norm + orth, reward, norm, orth});

    const M cx12 = cov(x11, x12);  // d1 x d2 cross covariance, batch 1
    auto grad_view = [&](std::size_t view) {
        const M& ui = view == 0 ? u1 : u2;
        const M& uo = view == 0 ? u2 : u1;
        const double al = alpha[view];
        M cross(ui.r, ui.c);  // C_12 u2 for view 0, C_12^T u1 for view 1
        if (view == 0) {
            cross = mul(cx12, uo);
        } else {
            for (std::size_t i = 0; i < cross.r; ++i)
                for (std::size_t j = 0; j < cross.c; ++j)
                    for (std::size_t k = 0; k < cx12.r; ++k)
                        cross.at(i, j) += cx12.at(k, i) * uo.at(k, j);
        }
        const M s1 = view == 0 ? cov(x11, x11) : cov(x12, x12);
        const M s2 = view == 0 ? cov(x21, x21) : cov(x22, x22);
        M term1 = mul(s1, ui);
        M term2 = mul(s2, ui);
        for (std::size_t j = 0; j < term1.d.size(); ++j) {
            term1.d[j] = al * ui.d[j] + (1 - al) * term1.d[j];
            term2.d[j] = al * ui.d[j] + (1 - al) * term2.d[j];
        }
        const M t1v = mul(term1, v2);
        const M t2v = mul(term2, v1);
        M g(ui.r, ui.c);
        for (std::size_t j = 0; j < g.d.size(); ++j)
            g.d[j] = -4.0 * cross.d[j] + 2.0 * t1v.d[j] + 2.0 * t2v.d[j];
        return g;
    };
    printm("stochastic_fixed_grad1", grad_view(0));
    printm("stochastic_fixed_grad2", grad_view(1));
}

// Variance-invariance-covariance loss pieces at a fixed point.
void vicreg_fixed() {
    const M x1(4, 2, {1, 0.5, -0.5, 1, 0.25, -1, -1.5, 0.75});
    const M x2(4, 2, {0.5, -0.25, 1, 0.5, -1, 1.5, 0.25, -0.5});
    const M b1(2, 2, {0.8, -0.3, 0.4, 0.9});
    const M b2(2, 2, {1.1, 0.2, -0.5, 0.7});
    const double al = 0.5, be = 0.25, ga = 1.5;
    const M z1 = mul(x1, b1), z2 = mul(x2, b2);
    const M s1 = cov(z1, z1), s2 = cov(z2, z2), c = cov(z1, z2);
    const double invariance = 2.0 * ga * tr(c);
    double variance = 0.0, covariance = 0.0;
    for (const M* s : {&s1, &s2})
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                if (i == j)
                    variance += al * std::max(1.0 - std::sqrt(s->at(i, i)), 0.0) +
                                ga * s->at(i, i);
                else
                    covariance += be * s->at(i, j) * s->at(i, j);
            }
    print("vicreg_fixed_terms", {-invariance + variance + covariance, invariance, variance,
                                 covariance});
}

// Cross-correlation loss pieces at a fixed point.
void bt_fixed() {
    const M x1(4, 2, {1, 0.5, -0.5, 1, 0.25, -1, -1.5, 0.75});
    const M x2(4, 2, {0.5, -0.25, 1, 0.5, -1, 1.5, 0.25, -0.5});
    const M b1(2, 2, {0.9, 0.1, -0.2, 1.0});
    const M b2(2, 2, {1.0, -0.4, 0.3, 0.8});
    const double be = 0.5;
    const M z1 = mul(x1, b1), z2 = mul(x2, b2);
    const M c = cov(z1, z2);
    double reward = 0.0, diag = 2.0, offdiag = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            if (i == j) {
                reward += 2.0 * c.at(i, i);
                diag += c.at(i, i) * c.at(i, i);
            } else {
                offdiag += be * c.at(i, j) * c.at(i, j);
            }
        }
    print("bt_fixed_terms", {-reward + diag + offdiag, reward, diag, offdiag});
    printm("bt_fixed_cross", c);
    const M s1 = cov(z1, z1), s2 = cov(z2, z2);
    print("bt_fixed_residuals", {std::abs(s1.at(0, 0) - 1.0), std::abs(s1.at(1, 1) - 1.0),
                                 std::abs(s2.at(0, 0) - 1.0), std::abs(s2.at(1, 1) - 1.0)});
}

// Analytic correlations of the augmentation generator: base variances
// mu_k = 1/(k+1), noise floor c = sigma^2 (1 + sum(mu)/D), rho = mu/(mu+c).
void augmented_snr() {
    const std::size_t d = 4;
    const double sigma = 0.5;
    double trace_base = 0.0;
    Vec mu(d);
    for (std::size_t i = 0; i < d; ++i) {
        mu[i] = 1.0 / double(i + 1);
        trace_base += mu[i];
    }
    const double c = sigma * sigma * (1.0 + trace_base / double(d));
    Vec rho(d);
    for (std::size_t i = 0; i < d; ++i) rho[i] = mu[i] / (mu[i] + c);
    print("augmented_snr_c", {c});
    print("augmented_snr_rho", rho);
}

// One Hebbian ascent step W + lr (2 A W - 2 B W (W^T A W)) at a fixed point.
void sgha_step() {
    const M a(2, 2, {3, 1, 1, 2});
    const M b(2, 2, {2, 0, 0, 1});
    const M w(2, 2, {1, 0, 0.5, 0.5});
    const double lr = 0.1;
    const M waw = tmul(w, mul(a, w));
    const M aw = mul(a, w);
    const M bww = mul(b, mul(w, waw));
    M out = w;
    for (std::size_t j = 0; j < 4; ++j) out.d[j] += lr * (2.0 * aw.d[j] - 2.0 * bww.d[j]);
    printm("sgha_step_result", out);
}

// One step of each first-order rule on scalar p = 1 with gradient 0.5.
void optimizer_steps() {
    const double lr = 0.1, g = 0.5;
    print("sgd_step", {1.0 - lr * g});
    // Momentum buffer v = 0.9*0 + g, p -= lr*v.
    print("momentum_step", {1.0 - lr * g});
    const double m = 0.1 * g, v = 0.001 * g * g;
    const double mhat = m / (1.0 - 0.9), vhat = v / (1.0 - 0.999);
    print("adam_step", {1.0 - lr * mhat / (std::sqrt(vhat) + 1e-8)});
}

}  // namespace

int main() {
    pencil2x2();
    ey_fixed();
    stochastic_fixed();
    vicreg_fixed();
    bt_fixed();
    augmented_snr();
    sgha_step();
    optimizer_steps();
    return 0;
}

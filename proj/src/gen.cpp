#include "gepey/gen.hpp"

#include <cmath>
#include <utility>

#include "gepey/rng.hpp"
#include "gepey/svd.hpp"

namespace gepey {

GaussianInstance gen_gaussian(const std::vector<std::size_t>& dims, std::size_t k,
                              const std::vector<double>& rho, std::size_t n, std::uint64_t seed) {
    const std::size_t views = dims.size();
    if (views < 2) throw TooFewViews("gen_gaussian: need at least two views");
    if (rho.size() != k) throw InvalidRho("gen_gaussian: rho length must equal K");
    for (std::size_t i = 0; i < k; ++i) {
        if (!(rho[i] >= 0.0 && rho[i] < 1.0))
            throw InvalidRho("gen_gaussian: rho must lie in [0, 1)");
        if (i > 0 && rho[i] > rho[i - 1]) throw InvalidRho("gen_gaussian: rho must be descending");
    }
    for (std::size_t d : dims)
        if (k == 0 || k > d) throw KTooLarge("gen_gaussian: K outside [1, min view width]");
    if (n < 2) throw TooFewSamples("gen_gaussian: need at least two samples");

    Rng rng(seed);
    GaussianInstance out;

    // Orthonormal loadings per view.
    for (std::size_t d : dims) {
        const Matrix raw = rng.gaussian_matrix(d, k);
        Matrix q = orthonormal_range(raw);
        if (q.cols != k) throw DegenerateData("gen_gaussian: loading draw lost rank");
        out.loadings.push_back(std::move(q));
    }

    std::vector<double> root_rho(k), root_gap(k);
    for (std::size_t i = 0; i < k; ++i) {
        root_rho[i] = std::sqrt(rho[i]);
        root_gap[i] = std::sqrt(1.0 - rho[i]);
    }

    // Shared latent block first, then one noise block per view; the noise
    // inside the signal span is shrunk so every view has identity variance.
    const Matrix w = rng.gaussian_matrix(n, k);
    std::vector<Matrix> xs;
    for (std::size_t i = 0; i < views; ++i) {
        const Matrix& u = out.loadings[i];
        const Matrix v = rng.gaussian_matrix(n, dims[i]);
        const Matrix vu = v * u;  // n x k, coordinates of the noise in the span
        Matrix coord(n, k);       // span coordinates of the sample
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < k; ++c)
                coord(r, c) = root_rho[c] * w(r, c) + root_gap[c] * vu(r, c);
        Matrix x = v - mul_a_bt(vu, u) + mul_a_bt(coord, u);
        xs.push_back(std::move(x));
    }
    out.batch = make_batch(std::move(xs));

    out.population.var.reserve(views);
    for (std::size_t i = 0; i < views; ++i) out.population.var.push_back(Matrix::identity(dims[i]));
    out.population.cross.resize(views);
    for (std::size_t i = 0; i < views; ++i) {
        out.population.cross[i].resize(views);
        for (std::size_t j = i + 1; j < views; ++j) {
            Matrix scaled = out.loadings[i];
            for (std::size_t r = 0; r < scaled.rows; ++r)
                for (std::size_t c = 0; c < k; ++c) scaled(r, c) *= rho[c];
            out.population.cross[i][j] = mul_a_bt(scaled, out.loadings[j]);
        }
    }

    out.oracle.values.resize(k);
    for (std::size_t i = 0; i < k; ++i) out.oracle.values[i] = double(views - 1) * rho[i];
    return out;
}

AugmentedInstance gen_augmented(std::size_t d, std::size_t n, double noise, std::uint64_t seed) {
    if (d == 0) throw ConfigInvalid("gen_augmented: zero dimension");
    if (n < 2) throw TooFewSamples("gen_augmented: need at least two samples");
    if (!(noise >= 0.0)) throw ConfigInvalid("gen_augmented: negative noise scale");

    Rng rng(seed);
    std::vector<double> mu(d);
    double trace_base = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        mu[i] = 1.0 / double(i + 1);
        trace_base += mu[i];
    }
    const double c = noise * noise * (1.0 + trace_base / double(d));
    const double root_d = std::sqrt(double(d));

    Matrix base = rng.gaussian_matrix(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t col = 0; col < d; ++col) base(r, col) *= std::sqrt(mu[col]);

    const Matrix eps1 = rng.gaussian_matrix(n, d);
    const Matrix eps2 = rng.gaussian_matrix(n, d);

    // The linear map is redrawn per sample so the corruption is mean zero
    // given the base; that makes the cross covariance exactly Var(x).
    auto corrupt = [&](const Matrix& eps) {
        Matrix x(n, d);
        for (std::size_t r = 0; r < n; ++r) {
            const Matrix g = rng.gaussian_matrix(d, d);
            for (std::size_t i = 0; i < d; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < d; ++j) acc += g(i, j) * base(r, j);
                x(r, i) = base(r, i) + noise * (acc / root_d + eps(r, i));
            }
        }
        return x;
    };

    AugmentedInstance out;
    Matrix x1 = corrupt(eps1);
    Matrix x2 = corrupt(eps2);
    out.batch = make_batch({std::move(x1), std::move(x2)});

    Matrix var(d, d), cross(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        var(i, i) = mu[i] + c;
        cross(i, i) = mu[i];
    }
    out.population.var = {var, var};
    out.population.cross.resize(2);
    out.population.cross[0].resize(2);
    out.population.cross[1].resize(2);
    out.population.cross[0][1] = cross;

    out.oracle.values.resize(d);
    for (std::size_t i = 0; i < d; ++i) out.oracle.values[i] = mu[i] / (mu[i] + c);
    return out;
}

}  // namespace gepey

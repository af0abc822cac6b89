#include "gepey/runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "gepey/cca.hpp"
#include "gepey/ey.hpp"
#include "gepey/gen.hpp"
#include "gepey/io.hpp"
#include "gepey/mlp.hpp"
#include "gepey/ssl.hpp"

namespace gepey {

Method method_from_name(const std::string& name) {
    if (name == "ey") return Method::ey;
    if (name == "sgha") return Method::sgha;
    if (name == "geigengame") return Method::geigengame;
    throw ConfigInvalid("unknown method: " + name);
}

Task task_from_name(const std::string& name) {
    if (name == "cca") return Task::cca;
    if (name == "pls") return Task::pls;
    if (name == "mcca") return Task::mcca;
    if (name == "gep") return Task::gep;
    if (name == "vicreg") return Task::vicreg;
    if (name == "bt") return Task::bt;
    if (name == "deep") return Task::deep;
    throw ConfigInvalid("unknown task: " + name);
}

namespace {

const double knan = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> csv_columns() {
    return {"step", "loss", "reward", "norm_penalty", "orth_penalty", "pcc", "tcc", "tmcc"};
}

struct Oracle {
    bool present = false;
    std::vector<double> values;
};

Oracle load_oracle(const std::string& prefix) {
    Oracle o;
    const std::string path = prefix + ".spectrum.gepm";
    if (!file_exists(path)) return o;
    const Matrix m = read_matrix_file(path);
    if (m.cols != 1) throw IoError("spectrum file must be one column: " + path);
    o.present = true;
    o.values = m.data;
    return o;
}

double pcc_or_nan(const Spectrum& learned, const Oracle& oracle) {
    if (!oracle.present) return knan;
    const std::size_t n = std::min(learned.size(), oracle.values.size());
    if (n == 0) return knan;
    Spectrum a, b;
    a.values.assign(learned.values.begin(), learned.values.begin() + std::ptrdiff_t(n));
    b.values.assign(oracle.values.begin(), oracle.values.begin() + std::ptrdiff_t(n));
    try {
        return metric_pcc(a, b);
    } catch (const Error&) {
        return knan;
    }
}

MultiviewBatch load_views(const std::string& prefix) {
    std::vector<Matrix> views;
    for (std::size_t i = 0;; ++i) {
        const std::string path = prefix + ".view" + std::to_string(i) + ".gepm";
        if (!file_exists(path)) break;
        views.push_back(read_matrix_file(path));
    }
    if (views.size() < 2)
        throw IoError("need <prefix>.view0.gepm and <prefix>.view1.gepm under: " + prefix);
    return make_batch(std::move(views));
}

struct RowMetrics {
    double pcc = knan;
    double tcc = knan;
    double tmcc = knan;
};

// All metric failures degrade to nan; the training state is untouched.
RowMetrics data_metrics(const MultiviewBatch& data, const WeightSet& w, std::size_t k,
                        double jitter, const Oracle& oracle) {
    RowMetrics m;
    try {
        m.pcc = pcc_or_nan(representation_spectrum(data, w, jitter), oracle);
    } catch (const Error&) {
    }
    const std::vector<Matrix> z = project(data, w);
    if (z.size() == 2) {
        try {
            m.tcc = metric_tcc(z[0], z[1], k, jitter);
        } catch (const Error&) {
        }
    }
    try {
        m.tmcc = metric_tmcc(z);
    } catch (const Error&) {
    }
    return m;
}

OptimizerConfig optimizer_from(const RunConfig& config) {
    OptimizerConfig oc;
    oc.kind = optimizer_kind_from_name(config.optimizer);
    oc.lr = config.lr;
    return oc;
}

void check_budget_flags(const RunConfig& config, std::size_t n) {
    const std::size_t m = config.batch_size;
    if (m == 1) throw ConfigInvalid("run: batch size must be 0 (full data) or at least 2");
    if (m == 0 && config.epochs != 0)
        throw ConfigInvalid("run: epochs require a batch size");
    if (m != 0 && 2 * m > n)
        throw ConfigInvalid("run: epoch pairing needs 2*batch_size <= samples");
}

Matrix spectrum_column(const std::vector<double>& values) {
    Matrix m(values.size(), 1);
    m.data = values;
    return m;
}

RunOutputs finish(const RunConfig& config, const CsvDoc& csv,
                  const std::vector<std::pair<std::string, Matrix>>& weights,
                  const std::vector<double>& spectrum) {
    RunOutputs out;
    out.csv_path = config.out_prefix + ".csv";
    write_csv(out.csv_path, csv);
    for (const auto& [suffix, m] : weights) {
        const std::string path = config.out_prefix + suffix;
        write_matrix_file(path, m);
        out.weight_paths.push_back(path);
    }
    out.spectrum_path = config.out_prefix + ".spectrum.gepm";
    write_matrix_file(out.spectrum_path, spectrum_column(spectrum));
    out.final_loss = csv.rows.back()[1];
    out.final_pcc = csv.rows.back()[5];
    return out;
}

// Learned spectrum or a nan column when the final state is degenerate (a
// collapsed representation is a legitimate end state for the ssl tasks).
std::vector<double> spectrum_or_nan(std::size_t k, const Spectrum* s) {
    if (s) return s->values;
    return std::vector<double>(k, knan);
}

RunOutputs run_linear(const RunConfig& config) {
    const MultiviewBatch data = load_views(config.in_prefix);
    const Oracle oracle = load_oracle(config.in_prefix);
    const std::size_t views = data.view_count();
    const std::size_t n = data.samples();
    const std::vector<std::size_t> dims = view_dims(data);

    std::vector<double> alpha = config.alpha;
    if (alpha.empty()) alpha.assign(views, config.task == Task::pls ? 1.0 : 0.0);
    if (alpha.size() != views) throw ConfigInvalid("run: one alpha per view required");

    std::size_t dmin = dims.front();
    for (std::size_t d : dims) dmin = std::min(dmin, d);
    if (config.k == 0 || config.k > dmin)
        throw KTooLarge("run: K outside [1, min view width]");
    check_budget_flags(config, n);
    if (config.method != Method::ey && config.optimizer != "sgd")
        throw ConfigInvalid("run: baseline methods define their own update rule");
    if (!(config.lr > 0.0)) throw ConfigInvalid("run: learning rate must be positive");

    Rng rng(config.seed);
    std::vector<Matrix> params;
    params.reserve(views);
    for (std::size_t d : dims) params.push_back(gaussian_init(d, config.k, rng));
    OptimizerState opt = make_optimizer(optimizer_from(config), params);

    std::size_t total = 0;
    for (std::size_t d : dims) total += d;
    Matrix stacked = stack_blocks(params);
    GammaEgState eg = make_gamma_eg_state(total, config.k);

    auto weights_now = [&]() {
        if (config.method == Method::ey) return make_weights(params, alpha);
        return make_weights(split_blocks(stacked, dims), alpha);
    };

    CsvDoc csv;
    csv.columns = csv_columns();
    auto log_row = [&](std::size_t s) {
        const WeightSet w = weights_now();
        const EyEvaluation ev = ey_loss_stochastic(data, data, w);
        const RowMetrics m = data_metrics(data, w, config.k, config.jitter, oracle);
        csv.rows.push_back({double(s), ev.loss, ev.reward, ev.norm_penalty, ev.orth_penalty,
                            m.pcc, m.tcc, m.tmcc});
    };
    auto update = [&](const MultiviewBatch& b1, const MultiviewBatch& b2) {
        switch (config.method) {
            case Method::ey: {
                std::vector<Matrix> grads = ey_gradients_per_view(b1, b2, make_weights(params, alpha));
                step(opt, params, grads);
                break;
            }
            case Method::sgha: {
                auto a1 = [&](const Matrix& v) { return apply_cross_cov(b1, v); };
                auto bop = [&](const Matrix& v) { return apply_ridge_var(b1, alpha, v); };
                auto a2 = [&](const Matrix& v) { return apply_cross_cov(b2, v); };
                stacked = sgha_update(stacked, a1, bop, a2, config.lr);
                break;
            }
            case Method::geigengame: {
                auto a1 = [&](const Matrix& v) { return apply_cross_cov(b1, v); };
                auto b2op = [&](const Matrix& v) { return apply_ridge_var(b2, alpha, v); };
                stacked = gamma_eg_update(stacked, eg, a1, b2op, config.lr);
                break;
            }
        }
    };

    log_row(0);
    std::size_t done = 0;
    const std::size_t m = config.batch_size;
    if (m == 0) {
        while (done < config.steps) {
            update(data, data);
            ++done;
            log_row(done);
        }
    } else if (config.epochs > 0 || config.steps > 0) {
        const std::size_t cap = config.steps;
        const std::size_t pairs_per_epoch = n / (2 * m);
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::vector<std::size_t> i1(m), i2(m);
        for (std::size_t e = 0; config.epochs == 0 || e < config.epochs; ++e) {
            if (cap > 0 && done >= cap) break;
            rng.shuffle(idx);
            for (std::size_t t = 0; t < pairs_per_epoch; ++t) {
                if (cap > 0 && done >= cap) break;
                std::copy(idx.begin() + 2 * t * m, idx.begin() + (2 * t + 1) * m, i1.begin());
                std::copy(idx.begin() + (2 * t + 1) * m, idx.begin() + (2 * t + 2) * m, i2.begin());
                update(take_rows(data, i1), take_rows(data, i2));
                ++done;
                log_row(done);
            }
        }
    }

    const WeightSet w = weights_now();
    std::vector<std::pair<std::string, Matrix>> files;
    for (std::size_t i = 0; i < views; ++i)
        files.emplace_back(".weights.view" + std::to_string(i) + ".gepm", w.weights[i]);
    std::vector<double> learned;
    try {
        learned = representation_spectrum(data, w, config.jitter).values;
    } catch (const Error&) {
        learned = spectrum_or_nan(config.k, nullptr);
    }
    return finish(config, csv, files, learned);
}

RunOutputs run_gep(const RunConfig& config) {
    const GepPair pair = make_gep_pair(read_matrix_file(config.in_prefix + ".a.gepm"),
                                       read_matrix_file(config.in_prefix + ".b.gepm"));
    const Oracle oracle = load_oracle(config.in_prefix);
    const std::size_t d = pair.a.rows;
    if (!config.alpha.empty()) throw ConfigInvalid("run: alpha does not apply to the gep task");
    if (config.batch_size != 0 || config.epochs != 0)
        throw ConfigInvalid("run: the gep task trains on the exact pencil");
    if (config.k == 0 || config.k > d) throw KTooLarge("run: K outside [1, D]");
    if (config.method != Method::ey && config.optimizer != "sgd")
        throw ConfigInvalid("run: baseline methods define their own update rule");
    if (!(config.lr > 0.0)) throw ConfigInvalid("run: learning rate must be positive");

    Rng rng(config.seed);
    std::vector<Matrix> params{gaussian_init(d, config.k, rng)};
    OptimizerState opt = make_optimizer(optimizer_from(config), params);
    GammaEgState eg = make_gamma_eg_state(d, config.k);

    CsvDoc csv;
    csv.columns = csv_columns();
    auto log_row = [&](std::size_t s) {
        const EyEvaluation ev = ey_loss(pair, params[0]);
        double pcc = knan;
        try {
            pcc = pcc_or_nan(extract_spectrum(pair, params[0]).spectrum, oracle);
        } catch (const Error&) {
        }
        csv.rows.push_back({double(s), ev.loss, ev.reward, ev.norm_penalty, ev.orth_penalty,
                            pcc, knan, knan});
    };

    log_row(0);
    for (std::size_t s = 0; s < config.steps; ++s) {
        switch (config.method) {
            case Method::ey: {
                std::vector<Matrix> grads{ey_loss(pair, params[0]).gradient};
                step(opt, params, grads);
                break;
            }
            case Method::sgha:
                params[0] = sgha_update(params[0], pair.a, pair.b, pair.a, config.lr);
                break;
            case Method::geigengame:
                params[0] = gamma_eg_update(params[0], eg, pair.a, pair.b, config.lr);
                break;
        }
        log_row(s + 1);
    }

    std::vector<std::pair<std::string, Matrix>> files{{".weights.gepm", params[0]}};
    std::vector<double> learned;
    try {
        learned = extract_spectrum(pair, params[0]).spectrum.values;
    } catch (const Error&) {
        learned = spectrum_or_nan(config.k, nullptr);
    }
    return finish(config, csv, files, learned);
}

RunOutputs run_ssl(const RunConfig& config) {
    const MultiviewBatch data = load_views(config.in_prefix);
    const Oracle oracle = load_oracle(config.in_prefix);
    if (data.view_count() != 2)
        throw ConfigInvalid("run: vicreg and bt need exactly two views");
    if (config.method != Method::ey)
        throw ConfigInvalid("run: vicreg and bt train by gradient descent only");
    if (config.batch_size != 0 || config.epochs != 0)
        throw ConfigInvalid("run: vicreg and bt train on the full data");
    const Matrix& x1 = data.views[0];
    const Matrix& x2 = data.views[1];
    if (config.k == 0 || config.k > std::min(x1.cols, x2.cols))
        throw KTooLarge("run: K outside [1, min view width]");

    VicregParams vp;
    double beta = 1.0;
    double penalty_weight = 0.0;
    if (config.task == Task::vicreg) {
        if (config.alpha.size() == 3) {
            vp.alpha = config.alpha[0];
            vp.beta = config.alpha[1];
            vp.gamma = config.alpha[2];
        } else if (!config.alpha.empty()) {
            throw ConfigInvalid("run: vicreg takes exactly three loss weights via --alpha");
        }
        validate(vp);
    } else {
        if (config.alpha.size() > 2)
            throw ConfigInvalid("run: bt takes beta and an optional penalty weight via --alpha");
        if (!config.alpha.empty()) beta = config.alpha[0];
        if (config.alpha.size() == 2) penalty_weight = config.alpha[1];
        if (!(beta > 0.0)) throw ConfigInvalid("run: bt beta must be positive");
        if (!(penalty_weight >= 0.0)) throw ConfigInvalid("run: negative penalty weight");
    }

    Rng rng(config.seed);
    std::vector<Matrix> p{gaussian_init(x1.cols, config.k, rng),
                          gaussian_init(x2.cols, config.k, rng)};
    OptimizerState opt = make_optimizer(optimizer_from(config), p);
    const std::vector<double> zeros{0.0, 0.0};

    CsvDoc csv;
    csv.columns = csv_columns();
    for (std::size_t s = 0; s <= config.steps; ++s) {
        std::vector<Matrix> grads;
        double loss, reward, norm, orth;
        if (config.task == Task::vicreg) {
            VicregEvaluation ev = vicreg_loss(x1, x2, p[0], p[1], vp);
            loss = ev.loss;
            reward = ev.invariance_reward;
            norm = ev.variance_term;
            orth = ev.covariance_term;
            grads.push_back(std::move(ev.grad1));
            grads.push_back(std::move(ev.grad2));
        } else {
            BtEvaluation ev = barlow_twins_loss(x1, x2, p[0], p[1], beta);
            grads.push_back(std::move(ev.grad1));
            grads.push_back(std::move(ev.grad2));
            double extra = 0.0;
            if (penalty_weight > 0.0) {
                for (std::size_t view = 0; view < 2; ++view) {
                    const VariancePenalty pen =
                        bt_variance_penalty(view == 0 ? x1 : x2, p[view], penalty_weight);
                    extra += pen.value;
                    for (std::size_t j = 0; j < grads[view].data.size(); ++j)
                        grads[view].data[j] += pen.grad.data[j];
                }
            }
            loss = ev.loss + extra;
            reward = ev.reward;
            norm = ev.diag_term + extra;
            orth = ev.offdiag_term;
        }
        const WeightSet w = make_weights(p, zeros);
        const RowMetrics m = data_metrics(data, w, config.k, config.jitter, oracle);
        csv.rows.push_back({double(s), loss, reward, norm, orth, m.pcc, m.tcc, m.tmcc});
        if (s < config.steps) step(opt, p, grads);
    }

    std::vector<std::pair<std::string, Matrix>> files;
    files.emplace_back(".weights.view0.gepm", p[0]);
    files.emplace_back(".weights.view1.gepm", p[1]);
    std::vector<double> learned;
    try {
        learned = representation_spectrum(data, make_weights(p, zeros), config.jitter).values;
    } catch (const Error&) {
        learned = spectrum_or_nan(config.k, nullptr);
    }
    return finish(config, csv, files, learned);
}

RunOutputs run_deep(const RunConfig& config) {
    const MultiviewBatch data = load_views(config.in_prefix);
    const Oracle oracle = load_oracle(config.in_prefix);
    if (config.method != Method::ey)
        throw ConfigInvalid("run: the deep task trains by gradient descent only");
    if (config.epochs != 0) throw ConfigInvalid("run: the deep task budgets by steps");
    for (double a : config.alpha)
        if (a != 0.0) throw ConfigInvalid("run: the deep task uses the pure variance metric");

    DeepConfig dc;
    dc.widths = {16, 16};
    dc.k = config.k;
    dc.tied = false;
    dc.train.steps = config.steps;
    dc.train.batch_size = config.batch_size;
    dc.train.optimizer = optimizer_from(config);
    dc.train.seed = config.seed;
    const DeepResult res = train_deep(data, dc);

    // Spectrum of the final representations as data views.
    std::vector<Matrix> z(data.view_count());
    for (std::size_t i = 0; i < data.view_count(); ++i)
        z[i] = forward(res.models[i], data.views[i]);
    Spectrum learned;
    bool have_spectrum = false;
    try {
        const MultiviewBatch zb = make_batch(z);
        const GepPair pencil = build_gep(zb, std::vector<double>(z.size(), 0.0), config.jitter);
        learned = gep_solve(pencil, config.k).spectrum;
        have_spectrum = true;
    } catch (const Error&) {
    }

    CsvDoc csv;
    csv.columns = csv_columns();
    const bool two = data.view_count() == 2;
    for (const DeepTraceRow& r : res.trace) {
        const bool last = r.step == config.steps;
        const double pcc = last && have_spectrum ? pcc_or_nan(learned, oracle) : knan;
        csv.rows.push_back({double(r.step), r.loss, r.reward, r.norm_penalty, r.orth_penalty,
                            pcc, two ? r.tcc : knan, two ? knan : r.tcc});
    }

    std::vector<std::pair<std::string, Matrix>> files;
    for (std::size_t i = 0; i < res.models.size(); ++i)
        for (std::size_t l = 0; l < res.models[i].layers.size(); ++l) {
            const Layer& layer = res.models[i].layers[l];
            const std::string stem = ".weights.view" + std::to_string(i) + ".layer" + std::to_string(l);
            files.emplace_back(stem + ".gepm", layer.weight);
            Matrix b(1, layer.bias.size());
            b.data = layer.bias;
            files.emplace_back(stem + ".bias.gepm", b);
        }
    return finish(config, csv, files,
                  have_spectrum ? learned.values : spectrum_or_nan(config.k, nullptr));
}

}  // namespace

RunOutputs run(const RunConfig& config) {
    if (config.in_prefix.empty() || config.out_prefix.empty())
        throw ConfigInvalid("run: input and output prefixes are required");
    switch (config.task) {
        case Task::gep:
            return run_gep(config);
        case Task::vicreg:
        case Task::bt:
            return run_ssl(config);
        case Task::deep:
            return run_deep(config);
        default:
            return run_linear(config);
    }
}

std::vector<std::string> write_gaussian_files(const std::string& prefix,
                                              const std::vector<std::size_t>& dims, std::size_t k,
                                              const std::vector<double>& rho, std::size_t n,
                                              std::uint64_t seed) {
    const GaussianInstance inst = gen_gaussian(dims, k, rho, n, seed);
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < inst.batch.view_count(); ++i) {
        paths.push_back(prefix + ".view" + std::to_string(i) + ".gepm");
        write_matrix_file(paths.back(), inst.batch.views[i]);
    }
    paths.push_back(prefix + ".spectrum.gepm");
    write_matrix_file(paths.back(), spectrum_column(inst.oracle.values));
    return paths;
}

std::vector<std::string> write_augmented_files(const std::string& prefix, std::size_t d,
                                               std::size_t n, double noise, std::uint64_t seed) {
    const AugmentedInstance inst = gen_augmented(d, n, noise, seed);
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < 2; ++i) {
        paths.push_back(prefix + ".view" + std::to_string(i) + ".gepm");
        write_matrix_file(paths.back(), inst.batch.views[i]);
    }
    paths.push_back(prefix + ".spectrum.gepm");
    write_matrix_file(paths.back(), spectrum_column(inst.oracle.values));
    return paths;
}

}  // namespace gepey

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gepey/errors.hpp"
#include "gepey/runner.hpp"
#include "gepey/verify.hpp"

namespace {

struct GenArgs {
    std::string kind = "gaussian";
    std::vector<std::size_t> dims{10, 10};
    std::size_t k = 2;
    std::vector<double> rho{0.9, 0.5};
    std::size_t d = 10;
    std::size_t n = 1000;
    double noise = 1.0;
    std::uint64_t seed = 0;
    std::string out;
};

int do_gen(const GenArgs& a) {
    std::vector<std::string> paths;
    if (a.kind == "gaussian") {
        paths = gepey::write_gaussian_files(a.out, a.dims, a.k, a.rho, a.n, a.seed);
    } else if (a.kind == "augmented") {
        paths = gepey::write_augmented_files(a.out, a.d, a.n, a.noise, a.seed);
    } else {
        throw gepey::ConfigInvalid("gen: kind must be gaussian or augmented");
    }
    for (const std::string& p : paths) std::cout << p << "\n";
    return 0;
}

int do_run(const gepey::RunConfig& config) {
    const gepey::RunOutputs out = gepey::run(config);
    std::cout << out.csv_path << "\n";
    for (const std::string& p : out.weight_paths) std::cout << p << "\n";
    std::cout << out.spectrum_path << "\n";
    std::cout << "final_loss " << out.final_loss << "\n";
    std::cout << "final_pcc " << out.final_pcc << "\n";
    return 0;
}

int do_verify(const std::string& suite, std::uint64_t seed) {
    const std::vector<gepey::CheckResult> results = gepey::verify_suite(suite, seed);
    bool all = true;
    for (const gepey::CheckResult& r : results) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        all = all && r.pass;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"top-k correlation subspaces by stochastic gradient descent"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "write a synthetic multiview dataset");
    gen_cmd->add_option("--kind", gen.kind, "gaussian or augmented");
    gen_cmd->add_option("--dims", gen.dims, "view widths (gaussian)");
    gen_cmd->add_option("--k", gen.k, "signal rank (gaussian)");
    gen_cmd->add_option("--rho", gen.rho, "signal correlations, descending (gaussian)");
    gen_cmd->add_option("--d", gen.d, "base dimension (augmented)");
    gen_cmd->add_option("--n", gen.n, "sample count");
    gen_cmd->add_option("--noise", gen.noise, "augmentation noise scale (augmented)");
    gen_cmd->add_option("--seed", gen.seed, "rng seed");
    gen_cmd->add_option("--out", gen.out, "output file prefix")->required();

    gepey::RunConfig rc;
    std::string method = "ey";
    std::string task = "cca";
    CLI::App* run_cmd = app.add_subcommand("run", "train on dataset files and write metrics");
    run_cmd->add_option("--method", method, "ey, sgha, or geigengame");
    run_cmd->add_option("--task", task, "cca, pls, mcca, gep, vicreg, bt, or deep");
    run_cmd->add_option("--k", rc.k, "components to learn");
    run_cmd->add_option("--alpha", rc.alpha,
                        "per-view metric interpolation; loss weights for vicreg and bt");
    run_cmd->add_option("--batch-size", rc.batch_size, "minibatch size, 0 trains on full data");
    run_cmd->add_option("--lr", rc.lr, "learning rate");
    run_cmd->add_option("--optimizer", rc.optimizer, "sgd, momentum, or adam");
    run_cmd->add_option("--steps", rc.steps, "update budget, 0 means uncapped");
    run_cmd->add_option("--epochs", rc.epochs, "full-pass budget, 0 means uncapped");
    run_cmd->add_option("--seed", rc.seed, "rng seed");
    run_cmd->add_option("--jitter", rc.jitter, "metric ridge for evaluation");
    run_cmd->add_option("--in", rc.in_prefix, "input file prefix")->required();
    run_cmd->add_option("--out", rc.out_prefix, "output file prefix")->required();

    std::string suite;
    std::uint64_t verify_seed = 0;
    CLI::App* verify_cmd = app.add_subcommand("verify", "run a property suite");
    verify_cmd->add_option("suite", suite, "oracle, equivalence, collapse, or interlace")
        ->required();
    verify_cmd->add_option("--seed", verify_seed, "rng seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_cmd->parsed()) return do_gen(gen);
        if (run_cmd->parsed()) {
            rc.method = gepey::method_from_name(method);
            rc.task = gepey::task_from_name(task);
            return do_run(rc);
        }
        return do_verify(suite, verify_seed);
    } catch (const gepey::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

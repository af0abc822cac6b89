#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gepey/matrix.hpp"

namespace gepey {

enum class Method { ey, sgha, geigengame };
enum class Task { cca, pls, mcca, gep, vicreg, bt, deep };

Method method_from_name(const std::string& name);
Task task_from_name(const std::string& name);

// One experiment invocation. alpha is the per-view metric for the
// correlation tasks; for vicreg it carries the three loss weights and for bt
// the off-diagonal weight plus an optional variance penalty weight.
struct RunConfig {
    Method method = Method::ey;
    Task task = Task::cca;
    std::size_t k = 1;
    std::vector<double> alpha;   // empty picks the task default
    std::size_t batch_size = 0;  // 0 trains on the full data every step
    double lr = 1e-2;
    std::string optimizer = "sgd";
    std::size_t steps = 0;
    std::size_t epochs = 0;
    std::uint64_t seed = 0;
    double jitter = 0.0;
    std::string in_prefix;
    std::string out_prefix;
};

struct RunOutputs {
    std::string csv_path;
    std::vector<std::string> weight_paths;
    std::string spectrum_path;
    double final_loss = 0.0;
    double final_pcc = 0.0;  // nan without an oracle file
};

// Loads <in>.view<i>.gepm (or <in>.a.gepm / <in>.b.gepm for the gep task),
// trains per config, and writes <out>.csv, the final weights, and the final
// spectrum. Every row holds the full-data evaluation after that many
// updates; metrics that are unavailable print as nan. Identical config and
// seed give identical bytes.
RunOutputs run(const RunConfig& config);

// gen backends: write the view files and the population spectrum under the
// prefix, return the written paths.
std::vector<std::string> write_gaussian_files(const std::string& prefix,
                                              const std::vector<std::size_t>& dims, std::size_t k,
                                              const std::vector<double>& rho, std::size_t n,
                                              std::uint64_t seed);
std::vector<std::string> write_augmented_files(const std::string& prefix, std::size_t d,
                                               std::size_t n, double noise, std::uint64_t seed);

}  // namespace gepey

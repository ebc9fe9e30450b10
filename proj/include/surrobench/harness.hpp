#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "surrobench/dataset.hpp"
#include "surrobench/surrogate.hpp"
#include "surrobench/synth.hpp"

namespace surrobench {

/// Named metric tables plus the CSV artifacts behind them.
struct ExperimentReport {
    std::string name;
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::uint64_t> seeds;
    nlohmann::json metrics = nlohmann::json::object();
    std::map<std::string, std::string> csv; // file name -> content

    nlohmann::json to_json() const;
    /// Writes report.json and every CSV into `dir`, each atomically.
    void write(const std::filesystem::path& dir) const;
};

/// 16 hex digits identifying a configuration.
std::string config_hash(const nlohmann::json& config);
/// root / "<name>-<config hash>"
std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& name,
                                    const nlohmann::json& config);

/// Runs fn(0) .. fn(n-1) on up to `jobs` threads. Each index must own its
/// state; results are written by index, so output order never depends on
/// scheduling.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Throws Error(InvalidArgument) when any genotype of `b` also occurs in `a`.
void assert_disjoint(const Dataset& a, const Dataset& b, const std::string& what);

/// Fits one boosted model on the train split (validation for early
/// stopping) and reports R2, Kendall tau and sparse Kendall tau on the
/// validation and test splits.
ExperimentReport run_datafit_eval(const Dataset& ds, const BoostParams& boost, const SplitSpec& split);

/// One row per optimizer tag: train on every other tag, score on the held-out tag.
ExperimentReport run_loo_eval(const Dataset& ds, const BoostParams& boost, int jobs = 1);

/// Predicted error of every genotype after replacing a ratio of its edges
/// by each parameter-free op, `repeats` random replacements per cell.
ExperimentReport run_paramfree_sweep(const SurrogateBenchmark& b, const std::vector<Genotype>& genotypes,
                                     const std::vector<double>& ratios, const std::vector<Op>& op_kinds,
                                     int repeats, std::uint64_t seed);

/// All topologies times `n_op_sets` random op assignments, the same cell in
/// both roles, scored against the oracle per cell depth.
ExperimentReport run_topology_sweep(const SurrogateBenchmark& b, const SyntheticOracle& oracle, int n_op_sets,
                                    std::uint64_t seed);

struct SmoothingConfig {
    std::size_t n_archs = 0; // 0 = the whole space
    int n_seeds = 3;
    int rotations = 0; // training seeds tried, 0 = all n_seeds
    int K = 10;
    int jobs = 1;
};

/// Tabular lookup of one seed versus a surrogate trained on that seed,
/// both scored against the mean of the remaining seeds.
ExperimentReport run_smoothing_experiment(const SyntheticOracle& oracle, const SmoothingConfig& cfg,
                                          const BoostParams& boost, std::uint64_t seed);

struct SuiteResult {
    ExperimentReport report;
    std::map<std::string, std::vector<Trajectory>> trajectories; // per optimizer, per repeat
};

/// Every optimizer for `n_repeats` seeds on the noisy surrogate. Repeat r
/// uses the same optimizer and noise streams for every optimizer.
SuiteResult run_benchmark_suite(const SurrogateBenchmark& b, const std::vector<std::string>& optimizers,
                                std::size_t budget, int n_repeats, std::uint64_t seed, int jobs = 1);

/// Median, quartiles and mean of the incumbent over repeats, per evaluation.
std::string incumbent_summary_csv(const std::vector<Trajectory>& runs);

} // namespace surrobench

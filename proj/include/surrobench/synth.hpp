#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "surrobench/dataset.hpp"
#include "surrobench/optimizers.hpp"

namespace surrobench {

/// Knobs of the synthetic ground truth. Tables are derived from `seed`.
struct OracleConfig {
    std::uint64_t seed = 0;
    SpaceConfig space;
    double noise_std = 1.7e-3;
    double center = 0.92;       // accuracy of a zero raw score
    double scale = 0.0025;      // accuracy per raw-score unit
    double param_free_shift = -1.2; // mean utility offset of parameter-free ops
    double interaction_density = 0.02;
    double interaction_std = 0.6;
    double depth_bonus_step = 0.35; // raw score per extra depth level
    int penalty_threshold = 4;      // parameter-free edges per cell tolerated
    double penalty_weight = 0.15;
    double runtime_base_s = 1500.0;
    double runtime_noise = 0.02; // relative std of noisy runtimes
};

nlohmann::json to_json(const OracleConfig& cfg);
OracleConfig oracle_config_from_json(const nlohmann::json& j);

/// Per-edge cost in seconds; convolutions dominate parameter-free ops.
double op_runtime_cost(Op op);
/// Per-edge parameter count.
std::int64_t op_param_count(Op op);

/// Additive op utilities per edge position, a depth bonus, sparse pairwise
/// interactions and a quadratic penalty on parameter-free edges beyond the
/// threshold, mapped affinely to accuracy and clamped to [0, 1].
class SyntheticOracle {
public:
    explicit SyntheticOracle(OracleConfig cfg);

    const OracleConfig& config() const { return cfg_; }
    const SpaceConfig& space() const { return cfg_.space; }

    /// Unclamped raw score.
    double raw_score(const Genotype& g) const;
    double truth(const Genotype& g) const;
    double evaluate_noisy(const Genotype& g, Rng& rng) const;
    double runtime_truth(const Genotype& g) const;
    double runtime_noisy(const Genotype& g, Rng& rng) const;
    std::int64_t n_params(const Genotype& g) const;

    /// Utility of `op` at edge position `edge` (0 .. 2n-1) of cell `cell`.
    double utility(int cell, int edge, Op op) const;
    double depth_bonus(int depth) const;
    double penalty(int param_free_edges) const;

    struct Interaction {
        int pos_a = 0; // global edge position, cell * 2n + edge
        Op op_a = Op::SepConv3x3;
        int pos_b = 0;
        Op op_b = Op::SepConv3x3;
        double weight = 0.0;
    };
    const std::vector<Interaction>& interactions() const { return interactions_; }
    /// Sum of interaction weights active in g.
    double interaction_score(const Genotype& g) const;

    /// A full evaluation record (noisy accuracies and runtime).
    EvalRecord make_record(const Genotype& g, const std::string& optimizer, std::int64_t seed, Rng& rng) const;

private:
    OracleConfig cfg_;
    std::vector<double> utility_; // [cell][edge][op ordinal]
    std::vector<Interaction> interactions_;
};

/// Objective over the noisy oracle; `records` (optional) receives every
/// evaluation as a dataset record tagged `optimizer`.
class OracleObjective : public Objective {
public:
    OracleObjective(const SyntheticOracle& oracle, std::uint64_t noise_seed, bool noisy = true,
                    std::vector<EvalRecord>* records = nullptr, std::string optimizer = {});

    Evaluation evaluate(const Genotype& g) override;
    const SpaceConfig& space() const override { return oracle_.space(); }
    std::string mode() const override { return "oracle"; }

private:
    const SyntheticOracle& oracle_;
    Rng rng_;
    bool noisy_;
    std::vector<EvalRecord>* records_;
    std::string optimizer_;
    std::int64_t seed_;
};

/// Runs each (optimizer tag, evaluation count) against the noisy oracle and
/// collects every evaluation, tagged by optimizer.
Dataset generate_dataset(const SyntheticOracle& oracle, const std::vector<std::pair<std::string, std::size_t>>& mix,
                         std::uint64_t seed);

/// `n_seeds` independent noisy evaluations of each genotype, seeds 1..n_seeds.
Dataset generate_repeats(const SyntheticOracle& oracle, const std::vector<Genotype>& genotypes, int n_seeds,
                         std::uint64_t seed, const std::string& optimizer = "RS");

} // namespace surrobench

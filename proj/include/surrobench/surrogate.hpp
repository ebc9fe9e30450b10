#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "surrobench/dataset.hpp"
#include "surrobench/gbtree.hpp"
#include "surrobench/metrics.hpp"
#include "surrobench/optimizers.hpp"

namespace surrobench {

inline constexpr int kModelFormatVersion = 1;

struct SurrogateBenchmark {
    std::vector<TreeEnsemble> members;
    TreeEnsemble runtime_model;
    SpaceConfig space;
    std::string feature_layout_version;
    double std_floor = 1e-4;
    double runtime_floor = 1.0;
    std::string version = "NB301-GBT-v0.9-synth";
    nlohmann::json hyperparameters = nlohmann::json::object();
};

struct QueryResult {
    double mean_acc = 0.0;
    double std_acc = 0.0;
    std::optional<double> sample_acc;
    double runtime_s = 1.0;
};

nlohmann::json to_json(const QueryResult& q);

/// One-hot rows of the categorical encoding, the surrogate feature layout.
FeatureMatrix encode_genotypes(const std::vector<Genotype>& genotypes, const SpaceConfig& cfg);

/// Member k trains on all folds but k and early-stops on fold k, with seed
/// offset k. Folds partition distinct genotypes, so repeated evaluations of
/// one architecture never straddle a fold boundary. Targets are val_acc.
SurrogateBenchmark fit_benchmark(const Dataset& ds, const BoostParams& boost, int K = 10);

/// Per-member accuracy predictions for a batch of genotypes, [member][row].
std::vector<std::vector<double>> member_predictions(const SurrogateBenchmark& b, const std::vector<Genotype>& gs);

QueryResult query(const SurrogateBenchmark& b, const Genotype& g, bool with_noise, Rng& rng);
/// Noise-free queries for many genotypes at once.
std::vector<QueryResult> query_batch(const SurrogateBenchmark& b, const std::vector<Genotype>& gs);

nlohmann::json to_json(const BoostParams& p);
/// Missing keys keep their LightGBM-profile defaults.
BoostParams boost_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TreeEnsemble& model);
TreeEnsemble tree_ensemble_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SurrogateBenchmark& b);
SurrogateBenchmark benchmark_from_json(const nlohmann::json& j);
void save(const SurrogateBenchmark& b, const std::filesystem::path& path);
SurrogateBenchmark load(const std::filesystem::path& path);

struct NoiseRow {
    Genotype genotype;
    double train_acc = 0.0;   // the seed-1 evaluation, i.e. the tabular answer
    double heldout_mean = 0.0; // mean over the remaining seeds
    GaussianSummary truth;     // over all seeds
    GaussianSummary predicted;
    double kl = 0.0;
};

struct NoiseReport {
    std::vector<NoiseRow> rows;
    double mae_tabular = 0.0;
    double mae_surrogate = 0.0;
    double mean_truth_std = 0.0;
    double mean_pred_std = 0.0;
    double mean_kl = 0.0;
    bool all_kl_finite = true;

    nlohmann::json summary() const;
};

/// Scores `b` against repeated evaluations: seed 1 is the one the surrogate
/// may have seen, the other seeds form the held-out mean. Every genotype
/// needs a seed-1 record and at least one other seed (InsufficientRepeats).
NoiseReport noise_report(const SurrogateBenchmark& b, const Dataset& repeats);

/// Fits a benchmark on `background` plus the seed-1 records of `repeats`,
/// the training data that noise_report presumes.
SurrogateBenchmark fit_for_noise_report(const Dataset& background, const Dataset& repeats, const BoostParams& boost,
                                        int K);

/// Surrogate as an optimizer objective. Noisy mode samples the predictive
/// distribution from an owned stream; mean mode returns the ensemble mean.
class SurrogateObjective : public Objective {
public:
    SurrogateObjective(const SurrogateBenchmark& b, std::uint64_t noise_seed, bool noisy = true);

    Evaluation evaluate(const Genotype& g) override;
    const SpaceConfig& space() const override { return b_.space; }
    std::string mode() const override { return noisy_ ? "surrogate-noisy" : "surrogate-mean"; }

private:
    const SurrogateBenchmark& b_;
    Rng rng_;
    bool noisy_;
    std::unordered_map<Genotype, QueryResult, GenotypeHash> cache_;
};

} // namespace surrobench

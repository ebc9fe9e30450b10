#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "surrobench/gbtree.hpp"
#include "surrobench/rng.hpp"
#include "surrobench/searchspace.hpp"

namespace surrobench {

struct Evaluation {
    double val_error = 1.0; // in [0, 1]
    double runtime_s = 1.0; // > 0
};

/// Black-box architecture objective. Noisy objectives own their noise
/// stream, so one instance serves exactly one optimizer run.
class Objective {
public:
    virtual ~Objective() = default;
    virtual Evaluation evaluate(const Genotype& g) = 0;
    virtual const SpaceConfig& space() const = 0;
    /// "oracle", "surrogate-noisy" or "surrogate-mean".
    virtual std::string mode() const = 0;
};

class FunctionObjective : public Objective {
public:
    using Fn = std::function<Evaluation(const Genotype&)>;

    FunctionObjective(SpaceConfig cfg, Fn fn, std::string mode = "oracle")
        : cfg_(std::move(cfg)), fn_(std::move(fn)), mode_(std::move(mode)) {}

    Evaluation evaluate(const Genotype& g) override { return fn_(g); }
    const SpaceConfig& space() const override { return cfg_; }
    std::string mode() const override { return mode_; }

private:
    SpaceConfig cfg_;
    Fn fn_;
    std::string mode_;
};

struct TrajectoryEvent {
    std::size_t eval_index = 0;
    double sim_time_s = 0.0; // cumulative runtime
    Genotype genotype;
    double val_error = 1.0;
    double incumbent_error = 1.0;
};

struct Trajectory {
    std::string optimizer;
    std::vector<TrajectoryEvent> events;

    double final_incumbent() const { return events.empty() ? 1.0 : events.back().incumbent_error; }
    /// Columns: eval_index, sim_time_s, val_error, incumbent_error, genotype_json.
    std::string to_csv() const;
};

/// Wraps an objective, enforces the evaluation budget and records the
/// anytime incumbent curve.
class TrajectoryRecorder {
public:
    TrajectoryRecorder(Objective& objective, std::string optimizer, std::size_t budget);

    double evaluate(const Genotype& g);
    bool exhausted() const { return trajectory_.events.size() >= budget_; }
    std::size_t remaining() const { return budget_ - trajectory_.events.size(); }
    const SpaceConfig& space() const { return objective_.space(); }
    Trajectory take() { return std::move(trajectory_); }

private:
    Objective& objective_;
    Trajectory trajectory_;
    std::size_t budget_;
    double clock_ = 0.0;
};

struct RsConfig {
    std::size_t budget = 100;
    /// Rejects already-evaluated genotypes until the space is exhausted.
    bool without_replacement = true;
};

struct ReConfig {
    std::size_t budget = 2000;
    std::size_t init_pop = 100;
    std::size_t sample_size = 100;
};

struct DeConfig {
    std::size_t budget = 2000;
    std::size_t pop = 100;
    double F = 0.5;
    double CR = 0.5;
};

struct TpeConfig {
    std::size_t budget = 2000;
    double gamma = 0.15;
    std::size_t n_candidates = 64;
    std::size_t n_init = 25;
    /// Aitchison-Aitken kernel bandwidth of the categorical estimators.
    double bandwidth = 0.2;
};

struct BananasConfig {
    std::size_t budget = 2000;
    std::size_t n_init = 100;
    std::size_t ensemble_size = 3;
    std::size_t n_mutation_candidates = 100;
    std::size_t top_k = 10;
    /// Architectures evaluated per predictor refit.
    std::size_t batch_size = 10;
    BoostParams predictor = default_predictor();

    static BoostParams default_predictor();
};

struct LocalSearchConfig {
    std::size_t budget = 2000;
    bool best_improvement = true;
};

Trajectory run_rs(Objective& obj, const RsConfig& cfg, Rng& rng);
Trajectory run_re(Objective& obj, const ReConfig& cfg, Rng& rng);
Trajectory run_de(Objective& obj, const DeConfig& cfg, Rng& rng);
Trajectory run_tpe(Objective& obj, const TpeConfig& cfg, Rng& rng);
Trajectory run_bananas_lite(Objective& obj, const BananasConfig& cfg, Rng& rng);
Trajectory run_local_search(Objective& obj, const LocalSearchConfig& cfg, Rng& rng);

/// Runs an optimizer by tag ("RS", "RE", "DE", "TPE", "BANANAS", "LS") with
/// its default config and the given budget.
Trajectory run_optimizer(const std::string& tag, Objective& obj, std::size_t budget, Rng& rng);
const std::vector<std::string>& optimizer_tags();

// ---------------------------------------------------------------------------
// Building blocks, exposed for testing.

/// One DE generation step for a single target vector: rand/1 mutation,
/// out-of-range repair by uniform resampling, binomial crossover without a
/// forced component.
std::vector<double> de_trial(const std::vector<double>& target, const std::vector<double>& a,
                             const std::vector<double>& b, const std::vector<double>& c, double F, double CR,
                             Rng& rng);

/// Per-dimension categorical densities of a set of observations.
class CategoricalDensity {
public:
    CategoricalDensity(const std::vector<int>& cardinalities, const std::vector<std::vector<int>>& points,
                       double bandwidth);

    double log_pdf(const std::vector<int>& x) const;
    std::vector<int> sample(Rng& rng) const;
    double prob(std::size_t dim, int value) const { return probs_[dim][static_cast<std::size_t>(value)]; }

private:
    std::vector<std::vector<double>> probs_;
};

/// TPE split: the best ceil(gamma * n) observations (at least one, at most
/// n - 1) form the good set. Returns log l(x) - log g(x).
double tpe_log_ratio(const CategoricalDensity& good, const CategoricalDensity& bad, const std::vector<int>& x);

} // namespace surrobench

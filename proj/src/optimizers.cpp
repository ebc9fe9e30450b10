#include "surrobench/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "surrobench/encoding.hpp"
#include "surrobench/error.hpp"

namespace surrobench {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

/// Total genotype count, saturated to the double range.
double space_size(const SpaceConfig& cfg) { return count_space(cfg).total.convert_to<double>(); }

} // namespace

std::string Trajectory::to_csv() const {
    std::string out = "eval_index,sim_time_s,val_error,incumbent_error,genotype_json\n";
    for (const auto& e : events) {
        out += std::to_string(e.eval_index);
        out += ',';
        out += fmt_double(e.sim_time_s);
        out += ',';
        out += fmt_double(e.val_error);
        out += ',';
        out += fmt_double(e.incumbent_error);
        out += ',';
        out += csv_quote(to_json(e.genotype).dump());
        out += '\n';
    }
    return out;
}

TrajectoryRecorder::TrajectoryRecorder(Objective& objective, std::string optimizer, std::size_t budget)
    : objective_(objective), budget_(budget) {
    if (budget == 0) {
        throw Error(ErrorCode::InvalidArgument, "evaluation budget must be positive");
    }
    trajectory_.optimizer = std::move(optimizer);
    trajectory_.events.reserve(budget);
}

double TrajectoryRecorder::evaluate(const Genotype& g) {
    if (exhausted()) {
        throw Error(ErrorCode::InvalidArgument, "evaluation budget exhausted");
    }
    const Evaluation ev = objective_.evaluate(g);
    if (!(ev.runtime_s > 0.0) || !(ev.val_error >= 0.0 && ev.val_error <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "objective returned an out-of-range evaluation");
    }
    clock_ += ev.runtime_s;
    TrajectoryEvent event;
    event.eval_index = trajectory_.events.size();
    event.sim_time_s = clock_;
    event.genotype = g;
    event.val_error = ev.val_error;
    event.incumbent_error =
        trajectory_.events.empty() ? ev.val_error : std::min(ev.val_error, trajectory_.events.back().incumbent_error);
    trajectory_.events.push_back(std::move(event));
    return ev.val_error;
}

// ---------------------------------------------------------------------------
// Random search

Trajectory run_rs(Objective& obj, const RsConfig& cfg, Rng& rng) {
    TrajectoryRecorder rec(obj, "RS", cfg.budget);
    const SpaceConfig& space = obj.space();
    const double total = space_size(space);
    std::unordered_set<Genotype, GenotypeHash> seen;
    while (!rec.exhausted()) {
        Genotype g = sample_uniform(rng, space);
        if (cfg.without_replacement) {
            if (static_cast<double>(seen.size()) >= total) {
                seen.clear();
            }
            while (!seen.insert(g).second) {
                g = sample_uniform(rng, space);
            }
        }
        rec.evaluate(g);
    }
    return rec.take();
}

// ---------------------------------------------------------------------------
// Regularized evolution

Trajectory run_re(Objective& obj, const ReConfig& cfg, Rng& rng) {
    if (cfg.init_pop == 0 || cfg.init_pop > cfg.budget || cfg.sample_size == 0) {
        throw Error(ErrorCode::InvalidArgument, "RE needs 0 < init_pop <= budget and a positive sample size");
    }
    TrajectoryRecorder rec(obj, "RE", cfg.budget);
    const SpaceConfig& space = obj.space();
    struct Member {
        Genotype genotype;
        double error;
    };
    std::deque<Member> population;
    while (population.size() < cfg.init_pop) {
        Genotype g = sample_uniform(rng, space);
        const double err = rec.evaluate(g);
        population.push_back({std::move(g), err});
    }
    while (!rec.exhausted()) {
        const std::size_t k = std::min(cfg.sample_size, population.size());
        // tournament without replacement
        std::vector<std::size_t> idx(population.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::size_t best = idx[0];
        double best_err = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
            if (population[idx[i]].error < best_err) {
                best_err = population[idx[i]].error;
                best = idx[i];
            }
        }
        Genotype child = mutate(population[best].genotype, rng, space);
        const double err = rec.evaluate(child);
        population.push_back({std::move(child), err});
        population.pop_front();
    }
    return rec.take();
}

// ---------------------------------------------------------------------------
// Differential evolution

std::vector<double> de_trial(const std::vector<double>& target, const std::vector<double>& a,
                             const std::vector<double>& b, const std::vector<double>& c, double F, double CR,
                             Rng& rng) {
    std::vector<double> trial = target;
    for (std::size_t d = 0; d < target.size(); ++d) {
        double v = a[d] + F * (b[d] - c[d]);
        if (!(v >= 0.0 && v < 1.0)) {
            v = uniform01(rng);
        }
        if (uniform01(rng) < CR) {
            trial[d] = v;
        }
    }
    return trial;
}

Trajectory run_de(Objective& obj, const DeConfig& cfg, Rng& rng) {
    if (cfg.pop < 4 || cfg.budget < cfg.pop) {
        throw Error(ErrorCode::InvalidArgument, "DE needs pop >= 4 and budget >= pop");
    }
    TrajectoryRecorder rec(obj, "DE", cfg.budget);
    const SpaceConfig& space = obj.space();
    const std::size_t dims = categorical_layout(space).size();

    std::vector<std::vector<double>> pop(cfg.pop, std::vector<double>(dims));
    std::vector<double> fitness(cfg.pop);
    for (std::size_t i = 0; i < cfg.pop; ++i) {
        for (auto& x : pop[i]) {
            x = uniform01(rng);
        }
        fitness[i] = rec.evaluate(from_categorical(from_unit(pop[i], space), space));
    }
    while (!rec.exhausted()) {
        // children are generated from the frozen parent generation
        const auto parents = pop;
        for (std::size_t i = 0; i < cfg.pop && !rec.exhausted(); ++i) {
            std::array<std::size_t, 3> pick{};
            for (std::size_t j = 0; j < 3; ++j) {
                std::size_t cand;
                do {
                    cand = uniform_index(rng, cfg.pop);
                } while (cand == i || std::find(pick.begin(), pick.begin() + j, cand) != pick.begin() + j);
                pick[j] = cand;
            }
            auto trial = de_trial(parents[i], parents[pick[0]], parents[pick[1]], parents[pick[2]], cfg.F, cfg.CR, rng);
            const double err = rec.evaluate(from_categorical(from_unit(trial, space), space));
            if (err <= fitness[i]) {
                pop[i] = std::move(trial);
                fitness[i] = err;
            }
        }
    }
    return rec.take();
}

// ---------------------------------------------------------------------------
// TPE

CategoricalDensity::CategoricalDensity(const std::vector<int>& cardinalities,
                                       const std::vector<std::vector<int>>& points, double bandwidth) {
    if (points.empty()) {
        throw Error(ErrorCode::EmptyInput, "density needs at least one observation");
    }
    probs_.resize(cardinalities.size());
    const double n = static_cast<double>(points.size());
    for (std::size_t d = 0; d < cardinalities.size(); ++d) {
        const int m = cardinalities[d];
        std::vector<double> freq(static_cast<std::size_t>(m), 0.0);
        for (const auto& p : points) {
            freq[static_cast<std::size_t>(p[d])] += 1.0 / n;
        }
        auto& pr = probs_[d];
        pr.resize(static_cast<std::size_t>(m));
        for (int v = 0; v < m; ++v) {
            const double f = freq[static_cast<std::size_t>(v)];
            pr[static_cast<std::size_t>(v)] = m == 1 ? 1.0 : (1.0 - bandwidth) * f + bandwidth * (1.0 - f) / (m - 1);
        }
    }
}

double CategoricalDensity::log_pdf(const std::vector<int>& x) const {
    double lp = 0.0;
    for (std::size_t d = 0; d < probs_.size(); ++d) {
        lp += std::log(probs_[d][static_cast<std::size_t>(x[d])]);
    }
    return lp;
}

std::vector<int> CategoricalDensity::sample(Rng& rng) const {
    std::vector<int> x(probs_.size());
    for (std::size_t d = 0; d < probs_.size(); ++d) {
        std::discrete_distribution<int> dist(probs_[d].begin(), probs_[d].end());
        x[d] = dist(rng);
    }
    return x;
}

double tpe_log_ratio(const CategoricalDensity& good, const CategoricalDensity& bad, const std::vector<int>& x) {
    return good.log_pdf(x) - bad.log_pdf(x);
}

Trajectory run_tpe(Objective& obj, const TpeConfig& cfg, Rng& rng) {
    if (cfg.budget < cfg.n_init || !(cfg.gamma > 0.0 && cfg.gamma < 1.0) || cfg.n_candidates == 0) {
        throw Error(ErrorCode::InvalidArgument, "TPE needs budget >= n_init, gamma in (0,1) and candidates");
    }
    TrajectoryRecorder rec(obj, "TPE", cfg.budget);
    const SpaceConfig& space = obj.space();
    const auto cards = categorical_layout(space);
    std::vector<std::pair<double, std::vector<int>>> observed;

    auto values_of = [&](const Genotype& g) {
        std::vector<int> v;
        for (const auto& d : to_categorical(g, space)) {
            v.push_back(d.value);
        }
        return v;
    };

    while (!rec.exhausted()) {
        Genotype next;
        if (observed.size() < std::max<std::size_t>(cfg.n_init, 2)) {
            next = sample_uniform(rng, space);
        } else {
            std::vector<std::size_t> order(observed.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return observed[a].first < observed[b].first; });
            const std::size_t n = observed.size();
            const std::size_t n_good = std::clamp<std::size_t>(
                static_cast<std::size_t>(std::ceil(cfg.gamma * static_cast<double>(n))), 1, n - 1);
            std::vector<std::vector<int>> good;
            std::vector<std::vector<int>> bad;
            for (std::size_t i = 0; i < n; ++i) {
                (i < n_good ? good : bad).push_back(observed[order[i]].second);
            }
            const CategoricalDensity l(cards, good, cfg.bandwidth);
            const CategoricalDensity g(cards, bad, cfg.bandwidth);
            std::vector<int> best;
            double best_score = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < cfg.n_candidates; ++c) {
                auto x = l.sample(rng);
                const double score = tpe_log_ratio(l, g, x);
                if (score > best_score) {
                    best_score = score;
                    best = std::move(x);
                }
            }
            next = from_categorical_values(best, space);
        }
        const double err = rec.evaluate(next);
        observed.emplace_back(err, values_of(next));
    }
    return rec.take();
}

// ---------------------------------------------------------------------------
// BANANAS-lite

BoostParams BananasConfig::default_predictor() {
    BoostParams p;
    p.n_rounds = 200;
    p.learning_rate = 0.1;
    p.max_depth = 6;
    p.max_leaves = 31;
    p.max_bin = 2;
    p.feature_fraction = 0.5;
    p.min_child_weight = 1.0;
    p.lambda_l1 = 0.0;
    p.lambda_l2 = 1.0;
    p.early_stopping_rounds = 20;
    return p;
}

Trajectory run_bananas_lite(Objective& obj, const BananasConfig& cfg, Rng& rng) {
    if (cfg.budget < cfg.n_init || cfg.n_init < 2 || cfg.ensemble_size == 0 || cfg.batch_size == 0 ||
        cfg.top_k == 0 || cfg.n_mutation_candidates == 0) {
        throw Error(ErrorCode::InvalidArgument, "invalid BANANAS configuration");
    }
    TrajectoryRecorder rec(obj, "BANANAS", cfg.budget);
    const SpaceConfig& space = obj.space();
    const std::size_t width = path_width(space);

    std::vector<Genotype> archs;
    std::vector<double> errors;
    std::vector<std::vector<std::uint32_t>> paths;
    std::unordered_set<Genotype, GenotypeHash> seen;
    const double total = space_size(space);

    auto record = [&](const Genotype& g) {
        errors.push_back(rec.evaluate(g));
        archs.push_back(g);
        paths.push_back(to_path(g, space).indices);
        seen.insert(g);
    };

    while (archs.size() < cfg.n_init && !rec.exhausted()) {
        Genotype g = sample_uniform(rng, space);
        if (static_cast<double>(seen.size()) < total && seen.contains(g)) {
            continue;
        }
        record(g);
    }

    std::size_t refit = 0;
    while (!rec.exhausted()) {
        // ensemble of boosted predictors, each early-stopped on its own 90/10 split
        std::vector<TreeEnsemble> members;
        for (std::size_t m = 0; m < cfg.ensemble_size; ++m) {
            std::vector<std::size_t> idx(archs.size());
            std::iota(idx.begin(), idx.end(), 0);
            std::shuffle(idx.begin(), idx.end(), rng);
            const std::size_t n_val = std::max<std::size_t>(1, idx.size() / 10);
            FeatureMatrix Xtr(width);
            FeatureMatrix Xva(width);
            std::vector<double> ytr;
            std::vector<double> yva;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const bool val = i < n_val;
                (val ? Xva : Xtr).add_binary_row(paths[idx[i]]);
                (val ? yva : ytr).push_back(errors[idx[i]]);
            }
            BoostParams p = cfg.predictor;
            p.seed = derive_seed(p.seed, "bananas-member", refit * cfg.ensemble_size + m);
            members.push_back(fit_boosted(Xtr, ytr, Xva, yva, p));
        }
        ++refit;

        // mutation-based candidates around the current top-k
        std::vector<std::size_t> order(archs.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return errors[a] < errors[b]; });
        const std::size_t k = std::min(cfg.top_k, order.size());
        std::vector<Genotype> candidates;
        std::unordered_set<Genotype, GenotypeHash> proposed;
        const bool space_left = static_cast<double>(seen.size()) < total;
        for (std::size_t attempt = 0; candidates.size() < cfg.n_mutation_candidates &&
                                      attempt < 20 * cfg.n_mutation_candidates;
             ++attempt) {
            Genotype g = mutate(archs[order[uniform_index(rng, k)]], rng, space);
            if (space_left && (seen.contains(g) || proposed.contains(g))) {
                continue;
            }
            proposed.insert(g);
            candidates.push_back(std::move(g));
        }
        if (candidates.empty()) {
            candidates.push_back(sample_uniform(rng, space));
        }

        // independent Thompson sampling: one random member scores each candidate
        FeatureMatrix Xc(width);
        for (const auto& g : candidates) {
            Xc.add_binary_row(to_path(g, space).indices);
        }
        std::vector<std::vector<double>> preds;
        for (const auto& m : members) {
            preds.push_back(predict(m, Xc));
        }
        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            scored.emplace_back(preds[uniform_index(rng, preds.size())][c], c);
        }
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 0; i < std::min(cfg.batch_size, scored.size()) && !rec.exhausted(); ++i) {
            record(candidates[scored[i].second]);
        }
    }
    return rec.take();
}

// ---------------------------------------------------------------------------
// Local search

Trajectory run_local_search(Objective& obj, const LocalSearchConfig& cfg, Rng& rng) {
    TrajectoryRecorder rec(obj, "LS", cfg.budget);
    const SpaceConfig& space = obj.space();
    while (!rec.exhausted()) {
        Genotype current = sample_uniform(rng, space);
        double current_err = rec.evaluate(current);
        bool improved = true;
        while (improved && !rec.exhausted()) {
            improved = false;
            auto nbrs = neighborhood(current, space);
            std::shuffle(nbrs.begin(), nbrs.end(), rng);
            Genotype best;
            double best_err = current_err;
            for (auto& n : nbrs) {
                if (rec.exhausted()) {
                    break;
                }
                const double err = rec.evaluate(n);
                if (err < best_err) {
                    best_err = err;
                    best = std::move(n);
                    improved = true;
                    if (!cfg.best_improvement) {
                        break;
                    }
                }
            }
            if (improved) {
                current = std::move(best);
                current_err = best_err;
            }
        }
    }
    return rec.take();
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& optimizer_tags() {
    static const std::vector<std::string> kTags = {"RS", "RE", "DE", "TPE", "BANANAS", "LS"};
    return kTags;
}

Trajectory run_optimizer(const std::string& tag, Objective& obj, std::size_t budget, Rng& rng) {
    if (tag == "RS") {
        RsConfig c;
        c.budget = budget;
        return run_rs(obj, c, rng);
    }
    if (tag == "RE") {
        ReConfig c;
        c.budget = budget;
        c.init_pop = std::min(c.init_pop, budget);
        return run_re(obj, c, rng);
    }
    if (tag == "DE") {
        DeConfig c;
        c.budget = budget;
        c.pop = std::min(c.pop, budget);
        return run_de(obj, c, rng);
    }
    if (tag == "TPE") {
        TpeConfig c;
        c.budget = budget;
        c.n_init = std::min(c.n_init, budget);
        return run_tpe(obj, c, rng);
    }
    if (tag == "BANANAS") {
        BananasConfig c;
        c.budget = budget;
        c.n_init = std::min(c.n_init, budget);
        return run_bananas_lite(obj, c, rng);
    }
    if (tag == "LS") {
        LocalSearchConfig c;
        c.budget = budget;
        return run_local_search(obj, c, rng);
    }
    throw Error(ErrorCode::UnknownOptimizer, "unknown optimizer '" + tag + "'");
}

} // namespace surrobench

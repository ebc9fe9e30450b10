#include "surrobench/surrogate.hpp"

#include <algorithm>
#include <cmath>

#include "surrobench/encoding.hpp"
#include "surrobench/error.hpp"
#include "surrobench/io.hpp"
#include "surrobench/metrics.hpp"

namespace surrobench {

namespace {

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::CorruptModel, why); }

std::vector<double> column(const Dataset& ds, const std::vector<std::size_t>& rows, double EvalRecord::*field) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (auto r : rows) {
        out.push_back(ds[r].*field);
    }
    return out;
}

FeatureMatrix encode_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
    FeatureMatrix X(one_hot_width(ds.space()));
    for (auto r : rows) {
        const auto idx = one_hot_indices(to_categorical(ds[r].genotype, ds.space()));
        X.add_binary_row(idx);
    }
    return X;
}

QueryResult summarize(const SurrogateBenchmark& b, std::span<const double> preds, double runtime) {
    double sum = 0.0;
    for (double p : preds) {
        sum += p;
    }
    QueryResult q;
    q.mean_acc = sum / static_cast<double>(preds.size());
    q.std_acc = std::max(sample_std(preds), b.std_floor);
    q.runtime_s = std::max(runtime, b.runtime_floor);
    return q;
}

} // namespace

nlohmann::json to_json(const QueryResult& q) {
    nlohmann::json j{{"mean_acc", q.mean_acc}, {"std_acc", q.std_acc}, {"runtime_s", q.runtime_s}};
    j["sample_acc"] = q.sample_acc ? nlohmann::json(*q.sample_acc) : nlohmann::json(nullptr);
    return j;
}

FeatureMatrix encode_genotypes(const std::vector<Genotype>& genotypes, const SpaceConfig& cfg) {
    FeatureMatrix X(one_hot_width(cfg));
    for (const auto& g : genotypes) {
        X.add_binary_row(one_hot_indices(to_categorical(g, cfg)));
    }
    return X;
}

SurrogateBenchmark fit_benchmark(const Dataset& ds, const BoostParams& boost, int K) {
    boost.check();
    if (K < 2) {
        throw Error(ErrorCode::InvalidArgument, "an ensemble needs K >= 2 members");
    }
    const auto& groups = ds.groups();
    if (groups.size() < static_cast<std::size_t>(K)) {
        throw Error(ErrorCode::TooFewRecords, "need at least K = " + std::to_string(K) + " distinct genotypes, got " +
                                                  std::to_string(groups.size()));
    }
    std::vector<std::size_t> order(groups.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng rng = make_rng(boost.seed, "folds");
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& members = groups[order[i]];
        auto& fold = folds[i % folds.size()];
        fold.insert(fold.end(), members.begin(), members.end());
    }
    for (auto& f : folds) {
        std::sort(f.begin(), f.end());
    }
    auto complement = [&](std::size_t k) {
        std::vector<std::size_t> rows;
        for (std::size_t j = 0; j < folds.size(); ++j) {
            if (j != k) {
                rows.insert(rows.end(), folds[j].begin(), folds[j].end());
            }
        }
        std::sort(rows.begin(), rows.end());
        return rows;
    };

    SurrogateBenchmark b;
    b.space = ds.space();
    b.feature_layout_version = feature_layout_version(ds.space());
    for (std::size_t k = 0; k < folds.size(); ++k) {
        const auto train = complement(k);
        BoostParams p = boost;
        p.seed = boost.seed + k;
        const auto ytr = column(ds, train, &EvalRecord::val_acc);
        const auto yva = column(ds, folds[k], &EvalRecord::val_acc);
        TreeEnsemble m = fit_boosted(encode_rows(ds, train), ytr, encode_rows(ds, folds[k]), yva, p);
        m.feature_layout_version = b.feature_layout_version;
        b.members.push_back(std::move(m));
    }

    const auto train = complement(0);
    BoostParams rp = boost;
    rp.seed = derive_seed(boost.seed, "runtime-model");
    b.runtime_model = fit_boosted(encode_rows(ds, train), column(ds, train, &EvalRecord::runtime_s),
                                  encode_rows(ds, folds[0]), column(ds, folds[0], &EvalRecord::runtime_s), rp);
    b.runtime_model.feature_layout_version = b.feature_layout_version;

    b.hyperparameters = {{"K", K}, {"boost", to_json(boost)}, {"target", "val_acc"}};
    return b;
}

std::vector<std::vector<double>> member_predictions(const SurrogateBenchmark& b, const std::vector<Genotype>& gs) {
    const FeatureMatrix X = encode_genotypes(gs, b.space);
    std::vector<std::vector<double>> out;
    out.reserve(b.members.size());
    for (const auto& m : b.members) {
        out.push_back(predict(m, X));
    }
    return out;
}

std::vector<QueryResult> query_batch(const SurrogateBenchmark& b, const std::vector<Genotype>& gs) {
    const auto preds = member_predictions(b, gs);
    const auto runtimes = predict(b.runtime_model, encode_genotypes(gs, b.space));
    std::vector<QueryResult> out;
    out.reserve(gs.size());
    std::vector<double> column_preds(b.members.size());
    for (std::size_t i = 0; i < gs.size(); ++i) {
        for (std::size_t k = 0; k < preds.size(); ++k) {
            column_preds[k] = preds[k][i];
        }
        out.push_back(summarize(b, column_preds, runtimes[i]));
    }
    return out;
}

QueryResult query(const SurrogateBenchmark& b, const Genotype& g, bool with_noise, Rng& rng) {
    if (b.members.empty()) {
        throw Error(ErrorCode::InvalidArgument, "benchmark has no members");
    }
    std::vector<double> row(one_hot_width(b.space), 0.0);
    for (auto i : one_hot_indices(to_categorical(canonicalize(g), b.space))) {
        row[i] = 1.0;
    }
    std::vector<double> preds;
    preds.reserve(b.members.size());
    for (const auto& m : b.members) {
        preds.push_back(m.predict_dense(row));
    }
    QueryResult q = summarize(b, preds, b.runtime_model.predict_dense(row));
    if (with_noise) {
        q.sample_acc = std::clamp(std::normal_distribution<double>(q.mean_acc, q.std_acc)(rng), 0.0, 1.0);
    }
    return q;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const BoostParams& p) {
    return {
        {"n_rounds", p.n_rounds},
        {"learning_rate", p.learning_rate},
        {"max_depth", p.max_depth},
        {"max_leaves", p.max_leaves},
        {"max_bin", p.max_bin},
        {"feature_fraction", p.feature_fraction},
        {"min_child_weight", p.min_child_weight},
        {"lambda_l1", p.lambda_l1},
        {"lambda_l2", p.lambda_l2},
        {"early_stopping_rounds", p.early_stopping_rounds},
        {"seed", p.seed},
    };
}

BoostParams boost_params_from_json(const nlohmann::json& j) {
    BoostParams p;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            field = j.at(key).get<std::decay_t<decltype(field)>>();
        }
    };
    try {
        get("n_rounds", p.n_rounds);
        get("learning_rate", p.learning_rate);
        get("max_depth", p.max_depth);
        get("max_leaves", p.max_leaves);
        get("max_bin", p.max_bin);
        get("feature_fraction", p.feature_fraction);
        get("min_child_weight", p.min_child_weight);
        get("lambda_l1", p.lambda_l1);
        get("lambda_l2", p.lambda_l2);
        get("early_stopping_rounds", p.early_stopping_rounds);
        get("seed", p.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("boost params: ") + e.what());
    }
    p.check();
    return p;
}

nlohmann::json to_json(const TreeEnsemble& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : model.trees) {
        nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                       left = nlohmann::json::array(), right = nlohmann::json::array(),
                       value = nlohmann::json::array();
        for (const auto& n : t) {
            feature.push_back(n.feature);
            threshold.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            value.push_back(n.value);
        }
        trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
                         {"value", value}});
    }
    return {
        {"base_score", model.base_score},
        {"shrinkage", model.shrinkage},
        {"n_features", model.n_features},
        {"feature_layout_version", model.feature_layout_version},
        {"trees", trees},
    };
}

TreeEnsemble tree_ensemble_from_json(const nlohmann::json& j) {
    TreeEnsemble m;
    try {
        m.base_score = j.at("base_score").get<double>();
        m.shrinkage = j.at("shrinkage").get<double>();
        m.n_features = j.at("n_features").get<std::size_t>();
        m.feature_layout_version = j.at("feature_layout_version").get<std::string>();
        for (const auto& jt : j.at("trees")) {
            const auto feature = jt.at("feature").get<std::vector<int>>();
            const auto threshold = jt.at("threshold").get<std::vector<double>>();
            const auto left = jt.at("left").get<std::vector<int>>();
            const auto right = jt.at("right").get<std::vector<int>>();
            const auto value = jt.at("value").get<std::vector<double>>();
            const std::size_t n = feature.size();
            if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n) {
                corrupt("tree arrays have inconsistent lengths");
            }
            Tree t(n);
            for (std::size_t i = 0; i < n; ++i) {
                t[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
                if (feature[i] >= 0) {
                    const auto in_range = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
                    if (static_cast<std::size_t>(feature[i]) >= m.n_features || !in_range(left[i]) ||
                        !in_range(right[i])) {
                        corrupt("tree node " + std::to_string(i) + " has an invalid split");
                    }
                }
            }
            m.trees.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        corrupt(e.what());
    }
    return m;
}

nlohmann::json to_json(const SurrogateBenchmark& b) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : b.members) {
        members.push_back(to_json(m));
    }
    return {
        {"format_version", kModelFormatVersion},
        {"benchmark_version", b.version},
        {"feature_layout_version", b.feature_layout_version},
        {"space", to_json(b.space)},
        {"std_floor", b.std_floor},
        {"runtime_floor", b.runtime_floor},
        {"hyperparameters", b.hyperparameters},
        {"members", members},
        {"runtime_model", to_json(b.runtime_model)},
    };
}

SurrogateBenchmark benchmark_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("format_version")) {
        corrupt("model file lacks format_version");
    }
    if (j.at("format_version") != kModelFormatVersion) {
        throw Error(ErrorCode::VersionMismatch, "model format_version " + j.at("format_version").dump() +
                                                    ", expected " + std::to_string(kModelFormatVersion));
    }
    SurrogateBenchmark b;
    try {
        b.version = j.at("benchmark_version").get<std::string>();
        b.feature_layout_version = j.at("feature_layout_version").get<std::string>();
        b.space = space_config_from_json(j.at("space"));
        b.std_floor = j.at("std_floor").get<double>();
        b.runtime_floor = j.at("runtime_floor").get<double>();
        b.hyperparameters = j.at("hyperparameters");
        for (const auto& jm : j.at("members")) {
            b.members.push_back(tree_ensemble_from_json(jm));
        }
        b.runtime_model = tree_ensemble_from_json(j.at("runtime_model"));
    } catch (const nlohmann::json::exception& e) {
        corrupt(e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CorruptModel) {
            throw;
        }
        corrupt(e.what());
    }
    if (b.feature_layout_version != feature_layout_version(b.space)) {
        throw Error(ErrorCode::LayoutMismatch, "feature layout '" + b.feature_layout_version +
                                                   "' does not match the stored space");
    }
    if (b.members.size() < 2 || !(b.std_floor > 0.0)) {
        corrupt("a benchmark needs at least two members and a positive std floor");
    }
    for (const auto& m : b.members) {
        if (m.n_features != one_hot_width(b.space)) {
            corrupt("member width differs from the feature layout");
        }
    }
    return b;
}

void save(const SurrogateBenchmark& b, const std::filesystem::path& path) {
    write_text_atomic(path, to_json(b).dump());
}

SurrogateBenchmark load(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        corrupt(path.string() + ": " + e.what());
    }
    return benchmark_from_json(j);
}

// ---------------------------------------------------------------------------

nlohmann::json NoiseReport::summary() const {
    return {
        {"n_genotypes", rows.size()},
        {"mae_tabular", mae_tabular},
        {"mae_surrogate", mae_surrogate},
        {"mean_truth_std", mean_truth_std},
        {"mean_pred_std", mean_pred_std},
        {"mean_kl", mean_kl},
        {"all_kl_finite", all_kl_finite},
    };
}

NoiseReport noise_report(const SurrogateBenchmark& b, const Dataset& repeats) {
    if (repeats.empty()) {
        throw Error(ErrorCode::InsufficientRepeats, "no repeated evaluations");
    }
    NoiseReport rep;
    std::vector<Genotype> genotypes;
    for (const auto& group : repeats.groups()) {
        NoiseRow row;
        row.genotype = repeats[group.front()].genotype;
        std::vector<double> all, others;
        bool has_first = false;
        for (auto p : group) {
            const auto& r = repeats[p];
            all.push_back(r.val_acc);
            if (r.seed == 1 && !has_first) {
                row.train_acc = r.val_acc;
                has_first = true;
            } else {
                others.push_back(r.val_acc);
            }
        }
        if (!has_first || others.empty()) {
            throw Error(ErrorCode::InsufficientRepeats,
                        "genotype " + genotype_key(row.genotype) + " needs a seed-1 record and another seed");
        }
        row.heldout_mean = mean(others);
        row.truth = {mean(all), std::max(sample_std(all), b.std_floor)};
        genotypes.push_back(row.genotype);
        rep.rows.push_back(std::move(row));
    }

    const auto preds = query_batch(b, genotypes);
    std::vector<double> heldout, tabular, surrogate;
    double truth_std = 0.0, pred_std = 0.0, kl = 0.0;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        auto& row = rep.rows[i];
        row.predicted = {preds[i].mean_acc, preds[i].std_acc};
        row.kl = kl_gaussian(row.truth, row.predicted);
        rep.all_kl_finite = rep.all_kl_finite && std::isfinite(row.kl);
        heldout.push_back(row.heldout_mean);
        tabular.push_back(row.train_acc);
        surrogate.push_back(row.predicted.mean);
        truth_std += row.truth.std;
        pred_std += row.predicted.std;
        kl += row.kl;
    }
    const double n = static_cast<double>(rep.rows.size());
    rep.mae_tabular = mae(heldout, tabular);
    rep.mae_surrogate = mae(heldout, surrogate);
    rep.mean_truth_std = truth_std / n;
    rep.mean_pred_std = pred_std / n;
    rep.mean_kl = kl / n;
    return rep;
}

SurrogateBenchmark fit_for_noise_report(const Dataset& background, const Dataset& repeats, const BoostParams& boost,
                                        int K) {
    Dataset train(repeats.space());
    for (const auto& r : background.records()) {
        if (!repeats.contains(r.genotype)) {
            train.add(r);
        }
    }
    for (const auto& r : repeats.records()) {
        if (r.seed == 1) {
            train.add(r);
        }
    }
    return fit_benchmark(train, boost, K);
}

// ---------------------------------------------------------------------------

SurrogateObjective::SurrogateObjective(const SurrogateBenchmark& b, std::uint64_t noise_seed, bool noisy)
    : b_(b), rng_(noise_seed), noisy_(noisy) {}

Evaluation SurrogateObjective::evaluate(const Genotype& g) {
    auto it = cache_.find(g);
    if (it == cache_.end()) {
        Rng unused(0);
        it = cache_.emplace(g, query(b_, g, false, unused)).first;
    }
    const QueryResult& q = it->second;
    double acc = q.mean_acc;
    if (noisy_) {
        acc = std::clamp(std::normal_distribution<double>(q.mean_acc, q.std_acc)(rng_), 0.0, 1.0);
    }
    return {1.0 - acc, q.runtime_s};
}

} // namespace surrobench

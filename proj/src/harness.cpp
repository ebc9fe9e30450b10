#include "surrobench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "surrobench/error.hpp"
#include "surrobench/io.hpp"
#include "surrobench/metrics.hpp"

namespace surrobench {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> val_accs(const Dataset& ds) {
    std::vector<double> y;
    y.reserve(ds.size());
    for (const auto& r : ds.records()) {
        y.push_back(r.val_acc);
    }
    return y;
}

std::vector<Genotype> genotypes_of(const Dataset& ds) {
    std::vector<Genotype> gs;
    gs.reserve(ds.size());
    for (const auto& r : ds.records()) {
        gs.push_back(r.genotype);
    }
    return gs;
}

TreeEnsemble fit_on(const Dataset& train, const Dataset& val, const BoostParams& boost) {
    return fit_boosted(encode_genotypes(genotypes_of(train), train.space()), val_accs(train),
                       encode_genotypes(genotypes_of(val), val.space()), val_accs(val), boost);
}

nlohmann::json score(const std::vector<double>& y, const std::vector<double>& pred) {
    return {{"n", y.size()},
            {"r2", r2(y, pred)},
            {"kt", kendall_tau(y, pred)},
            {"skt", sparse_kendall_tau(y, pred)},
            {"skt_pred_only", sparse_kendall_tau(y, pred, false)}};
}

/// Splits `ds` by genotype: roughly `frac` of the groups go to the second part.
std::pair<Dataset, Dataset> group_holdout(const Dataset& ds, double frac, Rng& rng) {
    std::vector<std::size_t> order(ds.groups().size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_hold = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frac * order.size())));
    std::vector<std::size_t> keep, hold;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& members = ds.groups()[order[i]];
        auto& side = i < n_hold ? hold : keep;
        side.insert(side.end(), members.begin(), members.end());
    }
    std::sort(keep.begin(), keep.end());
    std::sort(hold.begin(), hold.end());
    return {ds.subset(keep), ds.subset(hold)};
}

nlohmann::json spread(std::vector<double> v) {
    return {{"n", v.size()},
            {"median", median(v)},
            {"q25", quantile(v, 0.25)},
            {"q75", quantile(v, 0.75)},
            {"mean", mean(v)}};
}

} // namespace

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json artifacts = nlohmann::json::array();
    for (const auto& [file, content] : csv) {
        artifacts.push_back(file);
    }
    return {{"name", name}, {"config", config}, {"seeds", seeds}, {"metrics", metrics}, {"artifacts", artifacts}};
}

void ExperimentReport::write(const std::filesystem::path& dir) const {
    for (const auto& [file, content] : csv) {
        write_text_atomic(dir / file, content);
    }
    write_text_atomic(dir / "report.json", to_json().dump(2) + "\n");
}

std::string config_hash(const nlohmann::json& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& name,
                                    const nlohmann::json& config) {
    return root / (name + "-" + config_hash(config));
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

void assert_disjoint(const Dataset& a, const Dataset& b, const std::string& what) {
    for (const auto& group : b.groups()) {
        const auto& g = b[group.front()].genotype;
        if (a.contains(g)) {
            throw Error(ErrorCode::InvalidArgument, what + ": genotype " + genotype_key(g) + " leaks across splits");
        }
    }
}

// ---------------------------------------------------------------------------

ExperimentReport run_datafit_eval(const Dataset& ds, const BoostParams& boost, const SplitSpec& split) {
    const auto parts = stratified_split(ds, split);
    assert_disjoint(parts.train, parts.val, "train/val");
    assert_disjoint(parts.train, parts.test, "train/test");
    assert_disjoint(parts.val, parts.test, "val/test");
    const TreeEnsemble model = fit_on(parts.train, parts.val, boost);

    ExperimentReport rep;
    rep.name = "datafit";
    rep.config = {{"boost", to_json(boost)},
                  {"split", {{"train", split.train}, {"val", split.val}, {"test", split.test}, {"seed", split.seed}}},
                  {"n_records", ds.size()}};
    rep.seeds = {boost.seed, split.seed};
    std::string csv = "split,genotype,y_true,y_pred\n";
    rep.metrics["n_train"] = parts.train.size();
    rep.metrics["n_trees"] = model.trees.size();
    for (const auto* name : {"val", "test"}) {
        const Dataset& part = std::string(name) == "val" ? parts.val : parts.test;
        const auto y = val_accs(part);
        const auto pred = predict(model, encode_genotypes(genotypes_of(part), part.space()));
        rep.metrics[name] = score(y, pred);
        for (std::size_t i = 0; i < y.size(); ++i) {
            csv += std::string(name) + "," + genotype_key(part[i].genotype) + "," + fmt(y[i]) + "," + fmt(pred[i]) +
                   "\n";
        }
    }
    rep.csv["predictions.csv"] = std::move(csv);
    return rep;
}

ExperimentReport run_loo_eval(const Dataset& ds, const BoostParams& boost, int jobs) {
    const auto tags = ds.optimizers();
    if (tags.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "leave-one-optimizer-out needs at least two optimizer tags");
    }
    std::vector<nlohmann::json> rows(tags.size());
    parallel_for(tags.size(), jobs, [&](std::size_t t) {
        const auto part = loo_partition(ds, tags[t]);
        assert_disjoint(part.train_val, part.held_out, "left-out " + tags[t]);
        Rng rng = make_rng(boost.seed, "loo-val:" + tags[t]);
        const auto [train, val] = group_holdout(part.train_val, 0.1, rng);
        const TreeEnsemble model = fit_on(train, val, boost);
        const auto y = val_accs(part.held_out);
        const auto pred = predict(model, encode_genotypes(genotypes_of(part.held_out), ds.space()));
        rows[t] = {{"left_out", tags[t]},
                   {"n_train", train.size()},
                   {"n_held_out", y.size()},
                   {"r2", r2(y, pred)},
                   {"skt", sparse_kendall_tau(y, pred)}};
    });

    ExperimentReport rep;
    rep.name = "loo";
    rep.config = {{"boost", to_json(boost)}, {"tags", tags}, {"n_records", ds.size()}};
    rep.seeds = {boost.seed};
    rep.metrics["rows"] = rows;
    std::string csv = "left_out,n_train,n_held_out,r2,skt\n";
    for (const auto& r : rows) {
        csv += r["left_out"].get<std::string>() + "," + std::to_string(r["n_train"].get<std::size_t>()) + "," +
               std::to_string(r["n_held_out"].get<std::size_t>()) + "," + fmt(r["r2"].get<double>()) + "," +
               fmt(r["skt"].get<double>()) + "\n";
    }
    rep.csv["loo.csv"] = std::move(csv);
    return rep;
}

ExperimentReport run_paramfree_sweep(const SurrogateBenchmark& b, const std::vector<Genotype>& genotypes,
                                     const std::vector<double>& ratios, const std::vector<Op>& op_kinds,
                                     int repeats, std::uint64_t seed) {
    if (repeats < 1 || genotypes.empty() || ratios.empty() || op_kinds.empty()) {
        throw Error(ErrorCode::InvalidArgument, "sweep needs genotypes, ratios, op kinds and repeats >= 1");
    }
    struct Row {
        std::size_t genotype;
        std::size_t ratio;
        std::size_t op;
        int repeat;
    };
    std::vector<Row> rows;
    std::vector<Genotype> variants;
    Rng rng = make_rng(seed, "paramfree");
    for (std::size_t gi = 0; gi < genotypes.size(); ++gi) {
        for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
            for (std::size_t oi = 0; oi < op_kinds.size(); ++oi) {
                for (int rep = 0; rep < repeats; ++rep) {
                    variants.push_back(ratios[ri] == 0.0 ? genotypes[gi]
                                                         : replace_parameter_free(genotypes[gi], rng, ratios[ri],
                                                                                  op_kinds[oi]));
                    rows.push_back({gi, ri, oi, rep});
                }
            }
        }
    }
    const auto preds = query_batch(b, variants);

    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> groups;
    std::string csv = "genotype_index,ratio,op,repeat,pred_error\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double err = 1.0 - preds[i].mean_acc;
        const auto& r = rows[i];
        groups[{r.ratio, r.op}].push_back(err);
        csv += std::to_string(r.genotype) + "," + fmt(ratios[r.ratio]) + "," +
               std::string(to_string(op_kinds[r.op])) + "," + std::to_string(r.repeat) + "," + fmt(err) + "\n";
    }

    ExperimentReport rep;
    rep.name = "paramfree";
    nlohmann::json ops = nlohmann::json::array();
    for (Op op : op_kinds) {
        ops.push_back(to_string(op));
    }
    rep.config = {{"n_genotypes", genotypes.size()}, {"ratios", ratios}, {"op_kinds", ops}, {"repeats", repeats},
                  {"benchmark_version", b.version}};
    rep.seeds = {seed};
    nlohmann::json table = nlohmann::json::array();
    for (auto& [key, errs] : groups) {
        auto entry = spread(errs);
        entry["ratio"] = ratios[key.first];
        entry["op"] = to_string(op_kinds[key.second]);
        table.push_back(std::move(entry));
    }
    rep.metrics["groups"] = std::move(table);
    rep.metrics["n_rows"] = rows.size();
    rep.csv["paramfree.csv"] = std::move(csv);
    return rep;
}

ExperimentReport run_topology_sweep(const SurrogateBenchmark& b, const SyntheticOracle& oracle, int n_op_sets,
                                    std::uint64_t seed) {
    if (n_op_sets < 1) {
        throw Error(ErrorCode::InvalidArgument, "need at least one op set");
    }
    if (!(oracle.space() == b.space)) {
        throw Error(ErrorCode::LayoutMismatch, "oracle and benchmark use different spaces");
    }
    const auto topologies = enumerate_topologies(b.space);
    const std::size_t n_edges = 2 * static_cast<std::size_t>(b.space.n_intermediate);
    Rng rng = make_rng(seed, "topology-ops");

    std::vector<Genotype> gs;
    std::vector<int> depths, op_set_of, topo_of;
    for (int s = 0; s < n_op_sets; ++s) {
        std::vector<Op> ops(n_edges);
        for (auto& op : ops) {
            op = b.space.ops[uniform_index(rng, b.space.ops.size())];
        }
        for (std::size_t t = 0; t < topologies.size(); ++t) {
            const Cell cell = canonicalize(make_cell(topologies[t], ops));
            gs.push_back({cell, cell});
            depths.push_back(depth(cell));
            op_set_of.push_back(s);
            topo_of.push_back(static_cast<int>(t));
        }
    }
    const auto preds = query_batch(b, gs);

    std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_depth; // truth, prediction
    std::vector<double> all_truth, all_pred;
    std::string csv = "topology_index,op_set,depth,pred_acc,truth_acc\n";
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const double truth = oracle.truth(gs[i]);
        by_depth[depths[i]].first.push_back(truth);
        by_depth[depths[i]].second.push_back(preds[i].mean_acc);
        all_truth.push_back(truth);
        all_pred.push_back(preds[i].mean_acc);
        csv += std::to_string(topo_of[i]) + "," + std::to_string(op_set_of[i]) + "," + std::to_string(depths[i]) +
               "," + fmt(preds[i].mean_acc) + "," + fmt(truth) + "\n";
    }
    auto safe_skt = [](const std::vector<double>& t, const std::vector<double>& p) -> nlohmann::json {
        try {
            return sparse_kendall_tau(t, p);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::AllTied || e.code() == ErrorCode::EmptyInput) {
                return nullptr;
            }
            throw;
        }
    };

    ExperimentReport rep;
    rep.name = "topology";
    rep.config = {{"n_op_sets", n_op_sets}, {"n_topologies", topologies.size()},
                  {"truth_source", "synthetic oracle"}, {"benchmark_version", b.version}};
    rep.seeds = {seed};
    nlohmann::json table = nlohmann::json::array();
    for (const auto& [d, tp] : by_depth) {
        table.push_back({{"depth", d}, {"n", tp.first.size()}, {"skt", safe_skt(tp.first, tp.second)}});
    }
    rep.metrics["per_depth"] = std::move(table);
    rep.metrics["n_rows"] = gs.size();
    rep.metrics["skt_all"] = safe_skt(all_truth, all_pred);
    rep.csv["topology.csv"] = std::move(csv);
    return rep;
}

ExperimentReport run_smoothing_experiment(const SyntheticOracle& oracle, const SmoothingConfig& cfg,
                                          const BoostParams& boost, std::uint64_t seed) {
    if (cfg.n_seeds < 3) {
        throw Error(ErrorCode::InsufficientRepeats, "the smoothing experiment needs at least 3 seeds");
    }
    const SpaceConfig& space = oracle.space();
    std::vector<Genotype> gs;
    const auto space_size = count_space(space).total;
    if (cfg.n_archs == 0 || space_size <= cfg.n_archs) {
        gs = enumerate_genotypes(space);
    } else {
        Rng rng = make_rng(seed, "smoothing-archs");
        std::unordered_set<Genotype, GenotypeHash> seen;
        while (gs.size() < cfg.n_archs) {
            Genotype g = sample_uniform(rng, space);
            if (seen.insert(g).second) {
                gs.push_back(std::move(g));
            }
        }
    }
    const Dataset repeats = generate_repeats(oracle, gs, cfg.n_seeds, derive_seed(seed, "smoothing-noise"));

    // evals[i][s] = evaluation of genotype i under seed s + 1
    std::vector<std::vector<double>> evals(gs.size());
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const auto& pos = repeats.positions(gs[i]);
        evals[i].resize(static_cast<std::size_t>(cfg.n_seeds));
        for (auto p : pos) {
            evals[i][static_cast<std::size_t>(repeats[p].seed - 1)] = repeats[p].val_acc;
        }
    }

    const int rotations = cfg.rotations <= 0 ? cfg.n_seeds : std::min(cfg.rotations, cfg.n_seeds);
    std::vector<nlohmann::json> rows(static_cast<std::size_t>(rotations));
    parallel_for(rows.size(), cfg.jobs, [&](std::size_t rot) {
        const auto train_seed = static_cast<std::int64_t>(rot + 1);
        Dataset train(space);
        for (const auto& r : repeats.records()) {
            if (r.seed == train_seed) {
                train.add(r);
            }
        }
        BoostParams p = boost;
        p.seed = derive_seed(boost.seed, "smoothing-rotation", rot);
        const SurrogateBenchmark b = fit_benchmark(train, p, cfg.K);
        const auto preds = query_batch(b, gs);
        std::vector<double> target, tabular, surrogate;
        for (std::size_t i = 0; i < gs.size(); ++i) {
            double sum = 0.0;
            for (std::size_t s = 0; s < evals[i].size(); ++s) {
                if (s != rot) {
                    sum += evals[i][s];
                }
            }
            target.push_back(sum / static_cast<double>(cfg.n_seeds - 1));
            tabular.push_back(evals[i][rot]);
            surrogate.push_back(preds[i].mean_acc);
        }
        rows[rot] = {{"train_seed", train_seed},
                     {"mae_tabular", mae(target, tabular)},
                     {"mae_surrogate", mae(target, surrogate)}};
    });

    double tab = 0.0, sur = 0.0;
    std::string csv = "train_seed,mae_tabular,mae_surrogate\n";
    for (const auto& r : rows) {
        tab += r["mae_tabular"].get<double>();
        sur += r["mae_surrogate"].get<double>();
        csv += std::to_string(r["train_seed"].get<std::int64_t>()) + "," + fmt(r["mae_tabular"].get<double>()) + "," +
               fmt(r["mae_surrogate"].get<double>()) + "\n";
    }
    const double sigma = oracle.config().noise_std;
    const double n_other = cfg.n_seeds - 1;

    ExperimentReport rep;
    rep.name = "smoothing";
    rep.config = {{"oracle", to_json(oracle.config())}, {"n_archs", gs.size()}, {"n_seeds", cfg.n_seeds},
                  {"rotations", rotations},           {"K", cfg.K},           {"boost", to_json(boost)}};
    rep.seeds = {seed, boost.seed};
    rep.metrics["rotations"] = rows;
    rep.metrics["mae_tabular"] = tab / rotations;
    rep.metrics["mae_surrogate"] = sur / rotations;
    // mean absolute value of a centred normal with variance sigma^2 (1 + 1 / n_other)
    rep.metrics["mae_tabular_analytic"] = sigma * std::sqrt(1.0 + 1.0 / n_other) * std::sqrt(2.0 / std::numbers::pi);
    rep.csv["smoothing.csv"] = std::move(csv);
    return rep;
}

// ---------------------------------------------------------------------------

std::string incumbent_summary_csv(const std::vector<Trajectory>& runs) {
    std::string csv = "eval_index,median_sim_time_s,median_incumbent,q25_incumbent,q75_incumbent,mean_incumbent\n";
    if (runs.empty()) {
        return csv;
    }
    std::size_t len = runs.front().events.size();
    for (const auto& r : runs) {
        len = std::min(len, r.events.size());
    }
    for (std::size_t i = 0; i < len; ++i) {
        std::vector<double> inc, t;
        for (const auto& r : runs) {
            inc.push_back(r.events[i].incumbent_error);
            t.push_back(r.events[i].sim_time_s);
        }
        csv += std::to_string(i + 1) + "," + fmt(median(t)) + "," + fmt(median(inc)) + "," +
               fmt(quantile(inc, 0.25)) + "," + fmt(quantile(inc, 0.75)) + "," + fmt(mean(inc)) + "\n";
    }
    return csv;
}

SuiteResult run_benchmark_suite(const SurrogateBenchmark& b, const std::vector<std::string>& optimizers,
                                std::size_t budget, int n_repeats, std::uint64_t seed, int jobs) {
    if (optimizers.empty() || n_repeats < 1 || budget == 0) {
        throw Error(ErrorCode::InvalidArgument, "suite needs optimizers, repeats >= 1 and a positive budget");
    }
    const auto n_rep = static_cast<std::size_t>(n_repeats);
    std::vector<Trajectory> runs(optimizers.size() * n_rep);
    parallel_for(runs.size(), jobs, [&](std::size_t unit) {
        const auto r = unit % n_rep;
        SurrogateObjective obj(b, derive_seed(seed, "suite-noise", r), true);
        Rng rng = make_rng(seed, "suite-optimizer", r);
        runs[unit] = run_optimizer(optimizers[unit / n_rep], obj, budget, rng);
    });

    SuiteResult out;
    auto& rep = out.report;
    rep.name = "suite";
    rep.config = {{"optimizers", optimizers}, {"budget", budget}, {"n_repeats", n_repeats},
                  {"benchmark_version", b.version}, {"mode", "surrogate-noisy"}};
    rep.seeds = {seed};
    for (std::size_t o = 0; o < optimizers.size(); ++o) {
        const auto& tag = optimizers[o];
        std::vector<Trajectory> mine(runs.begin() + static_cast<std::ptrdiff_t>(o * n_rep),
                                     runs.begin() + static_cast<std::ptrdiff_t>((o + 1) * n_rep));
        std::vector<double> finals;
        for (std::size_t r = 0; r < mine.size(); ++r) {
            finals.push_back(mine[r].final_incumbent());
            rep.csv["traj_" + tag + "_r" + std::to_string(r) + ".csv"] = mine[r].to_csv();
        }
        rep.csv["incumbent_" + tag + ".csv"] = incumbent_summary_csv(mine);
        auto entry = spread(finals);
        entry["finals"] = finals;
        rep.metrics["final_incumbent"][tag] = std::move(entry);
        out.trajectories[tag] = std::move(mine);
    }
    return out;
}

} // namespace surrobench

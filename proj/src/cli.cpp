#include "surrobench/cli.hpp"

#include <cstdlib>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "surrobench/error.hpp"
#include "surrobench/harness.hpp"
#include "surrobench/io.hpp"

namespace surrobench {

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string out;
    int jobs = 1;
    int n_intermediate = 4;
    int n_ops = 7;

    SpaceConfig space() const { return reduced_space(n_intermediate, n_ops); }
};

struct BoostFlags {
    std::string profile = "lgb";
    std::string file;
    double learning_rate = 0.0;
    int n_rounds = 0;

    BoostParams resolve(std::uint64_t seed) const {
        BoostParams p;
        if (!file.empty()) {
            p = boost_params_from_json(nlohmann::json::parse(read_text(file)));
        } else if (profile == "xgb") {
            p = BoostParams::xgb_defaults();
        } else if (profile != "lgb") {
            throw Error(ErrorCode::InvalidArgument, "unknown boosting profile '" + profile + "'");
        }
        if (learning_rate > 0.0) {
            p.learning_rate = learning_rate;
        }
        if (n_rounds > 0) {
            p.n_rounds = n_rounds;
        }
        p.seed = seed;
        p.check();
        return p;
    }

    void attach(CLI::App* app) {
        app->add_option("--profile", profile, "Boosting defaults: lgb or xgb")->capture_default_str();
        app->add_option("--boost", file, "JSON file of boosting parameters");
        app->add_option("--learning-rate", learning_rate, "Override the learning rate");
        app->add_option("--n-rounds", n_rounds, "Override the number of boosting rounds");
    }
};

struct OracleFlags {
    std::string file;
    double noise_std = -1.0;
    long long oracle_seed = -1;

    OracleConfig resolve(const Globals& g) const {
        OracleConfig c;
        if (!file.empty()) {
            c = oracle_config_from_json(nlohmann::json::parse(read_text(file)));
        } else {
            c.space = g.space();
            c.seed = g.seed;
        }
        if (noise_std >= 0.0) {
            c.noise_std = noise_std;
        }
        if (oracle_seed >= 0) {
            c.seed = static_cast<std::uint64_t>(oracle_seed);
        }
        return c;
    }

    void attach(CLI::App* app) {
        app->add_option("--oracle", file, "Oracle config JSON (as written by synth-gen)");
        app->add_option("--noise-std", noise_std, "Evaluation noise of the oracle");
        app->add_option("--oracle-seed", oracle_seed, "Seed of the oracle tables (default: --seed)");
    }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::size_t>> parse_mix(const std::string& s) {
    std::vector<std::pair<std::string, std::size_t>> mix;
    for (const auto& item : split_list(s)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw Error(ErrorCode::InvalidArgument, "mix entries look like TAG:COUNT, got '" + item + "'");
        }
        mix.emplace_back(item.substr(0, colon), std::stoul(item.substr(colon + 1)));
    }
    return mix;
}

/// Records the run configuration and returns the run directory.
std::filesystem::path open_run(const Globals& g, const std::string& name, nlohmann::json config) {
    config["subcommand"] = name;
    config["seed"] = g.seed;
    config["space"] = to_json(g.space());
    const auto dir = run_directory(g.out, name, config);
    write_text_atomic(dir / "config.json", config.dump(2) + "\n");
    return dir;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        return false;
    }
    throw Error(ErrorCode::InvalidArgument, "expected true or false, got '" + s + "'");
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Surrogate benchmark for cell-based architecture search"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand
    app.failure_message(CLI::FailureMessage::help);

    Globals g;
    const char* env_out = std::getenv("SURROBENCH_OUT");
    g.out = env_out && *env_out ? env_out : "runs";
    app.add_option("--seed", g.seed, "Root seed of every random stream")->capture_default_str();
    app.add_option("--out", g.out, "Output root (default: $SURROBENCH_OUT or ./runs)");
    app.add_option("--jobs", g.jobs, "Parallel workers")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--n-intermediate", g.n_intermediate, "Intermediate nodes per cell")->capture_default_str();
    app.add_option("--n-ops", g.n_ops, "Use the first N operations")->check(CLI::Range(1, 7))->capture_default_str();

    std::function<void()> action;

    // count-space
    auto* count_cmd = app.add_subcommand("count-space", "Exact size of the search space");
    count_cmd->callback([&] {
        action = [&] {
            const auto c = count_space(g.space());
            out << nlohmann::json{{"topologies_per_cell", c.topologies_per_cell.str()},
                                  {"genotypes_per_cell", c.genotypes_per_cell.str()},
                                  {"total", c.total.str()}}
                       .dump()
                << "\n";
        };
    });

    // synth-gen
    OracleFlags gen_oracle;
    std::string gen_mix = "RS:1000";
    auto* gen_cmd = app.add_subcommand("synth-gen", "Collect a dataset from the synthetic oracle");
    gen_oracle.attach(gen_cmd);
    gen_cmd->add_option("--mix", gen_mix, "Optimizer mix, e.g. RS:1000,RE:500")->capture_default_str();
    gen_cmd->callback([&] {
        action = [&] {
            const OracleConfig oc = gen_oracle.resolve(g);
            const auto dir = open_run(g, "synth-gen", {{"oracle", to_json(oc)}, {"mix", gen_mix}});
            const Dataset ds = generate_dataset(SyntheticOracle(oc), parse_mix(gen_mix), g.seed);
            save_jsonl(ds, dir / "dataset.jsonl");
            write_text_atomic(dir / "oracle.json", to_json(oc).dump(2) + "\n");
            out << nlohmann::json{{"run_dir", dir.string()},
                                  {"dataset", (dir / "dataset.jsonl").string()},
                                  {"oracle", (dir / "oracle.json").string()},
                                  {"n_records", ds.size()}}
                       .dump()
                << "\n";
        };
    });

    // fit
    BoostFlags fit_boost;
    std::string fit_data;
    int fit_k = 10;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a surrogate ensemble on the train and validation splits");
    fit_boost.attach(fit_cmd);
    fit_cmd->add_option("--data", fit_data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--K", fit_k, "Ensemble members")->capture_default_str();
    fit_cmd->callback([&] {
        action = [&] {
            const BoostParams p = fit_boost.resolve(g.seed);
            const auto dir = open_run(g, "fit", {{"data", fit_data}, {"K", fit_k}, {"boost", to_json(p)}});
            const Dataset ds = load_jsonl(fit_data, g.space());
            SplitSpec spec;
            spec.seed = g.seed;
            const auto idx = stratified_split_indices(ds, spec);
            std::vector<std::size_t> train_val = idx.train;
            train_val.insert(train_val.end(), idx.val.begin(), idx.val.end());
            std::sort(train_val.begin(), train_val.end());
            const SurrogateBenchmark b = fit_benchmark(ds.subset(train_val), p, fit_k);
            save(b, dir / "model.json");
            save_jsonl(ds.subset(idx.test), dir / "test.jsonl");
            out << nlohmann::json{{"run_dir", dir.string()},
                                  {"model", (dir / "model.json").string()},
                                  {"test", (dir / "test.jsonl").string()}}
                       .dump()
                << "\n";
        };
    });

    // eval
    BoostFlags eval_boost;
    std::string eval_data;
    std::string eval_model;
    auto* eval_cmd = app.add_subcommand(
        "eval", "Score a saved model on a dataset, or fit and score one model on a stratified split");
    eval_boost.attach(eval_cmd);
    eval_cmd->add_option("--data", eval_data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--model", eval_model, "Saved model; omit to run the train/val/test protocol")
        ->check(CLI::ExistingFile);
    eval_cmd->callback([&] {
        action = [&] {
            const Dataset ds = load_jsonl(eval_data, g.space());
            ExperimentReport rep;
            if (eval_model.empty()) {
                SplitSpec spec;
                spec.seed = g.seed;
                rep = run_datafit_eval(ds, eval_boost.resolve(g.seed), spec);
            } else {
                const SurrogateBenchmark b = load(eval_model);
                std::vector<Genotype> gs;
                std::vector<double> y;
                for (const auto& r : ds.records()) {
                    gs.push_back(r.genotype);
                    y.push_back(r.val_acc);
                }
                std::vector<double> pred;
                for (const auto& q : query_batch(b, gs)) {
                    pred.push_back(q.mean_acc);
                }
                rep.name = "eval";
                rep.config = {{"model", eval_model}, {"benchmark_version", b.version}};
                rep.metrics["test"] = {{"n", y.size()},
                                       {"r2", r2(y, pred)},
                                       {"kt", kendall_tau(y, pred)},
                                       {"skt", sparse_kendall_tau(y, pred)}};
            }
            rep.config["data"] = eval_data;
            const auto dir = open_run(g, "eval", rep.config);
            rep.seeds.push_back(g.seed);
            rep.write(dir);
            out << nlohmann::json{{"run_dir", dir.string()}, {"metrics", rep.metrics}}.dump() << "\n";
        };
    });

    // loo
    BoostFlags loo_boost;
    std::string loo_data;
    auto* loo_cmd = app.add_subcommand("loo", "Leave-one-optimizer-out evaluation");
    loo_boost.attach(loo_cmd);
    loo_cmd->add_option("--data", loo_data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
    loo_cmd->callback([&] {
        action = [&] {
            const BoostParams p = loo_boost.resolve(g.seed);
            const auto dir = open_run(g, "loo", {{"data", loo_data}, {"boost", to_json(p)}});
            const ExperimentReport rep = run_loo_eval(load_jsonl(loo_data, g.space()), p, g.jobs);
            rep.write(dir);
            out << nlohmann::json{{"run_dir", dir.string()}, {"metrics", rep.metrics}}.dump() << "\n";
        };
    });

    // sweep-paramfree
    std::string pf_model;
    std::string pf_data;
    std::string pf_ratios = "0,0.25,0.5,0.75,1";
    std::string pf_ops = "max_pool_3x3,avg_pool_3x3,skip_connect";
    int pf_repeats = 4;
    auto* pf_cmd = app.add_subcommand("sweep-paramfree", "Replace edges by parameter-free operations");
    pf_cmd->add_option("--model", pf_model, "Saved model")->required()->check(CLI::ExistingFile);
    pf_cmd->add_option("--data", pf_data, "Genotypes to perturb (e.g. the test split)")
        ->required()
        ->check(CLI::ExistingFile);
    pf_cmd->add_option("--ratios", pf_ratios, "Comma-separated ratios")->capture_default_str();
    pf_cmd->add_option("--ops", pf_ops, "Comma-separated parameter-free ops")->capture_default_str();
    pf_cmd->add_option("--repeats", pf_repeats, "Random replacements per setting")->capture_default_str();
    pf_cmd->callback([&] {
        action = [&] {
            const auto dir = open_run(g, "sweep-paramfree",
                                      {{"model", pf_model}, {"data", pf_data}, {"ratios", pf_ratios}, {"ops", pf_ops},
                                       {"repeats", pf_repeats}});
            const SurrogateBenchmark b = load(pf_model);
            const Dataset ds = load_jsonl(pf_data, b.space);
            std::vector<Genotype> gs;
            for (const auto& group : ds.groups()) {
                gs.push_back(ds[group.front()].genotype);
            }
            std::vector<double> ratios;
            for (const auto& r : split_list(pf_ratios)) {
                ratios.push_back(std::stod(r));
            }
            std::vector<Op> ops;
            for (const auto& o : split_list(pf_ops)) {
                ops.push_back(op_from_string(o));
            }
            const auto rep = run_paramfree_sweep(b, gs, ratios, ops, pf_repeats, g.seed);
            rep.write(dir);
            out << nlohmann::json{{"run_dir", dir.string()}, {"metrics", rep.metrics}}.dump() << "\n";
        };
    });

    // sweep-topology
    std::string topo_model;
    OracleFlags topo_oracle;
    int topo_sets = 10;
    auto* topo_cmd = app.add_subcommand("sweep-topology", "Score every cell topology against the oracle");
    topo_oracle.attach(topo_cmd);
    topo_cmd->add_option("--model", topo_model, "Saved model")->required()->check(CLI::ExistingFile);
    topo_cmd->add_option("--op-sets", topo_sets, "Random operation sets")->capture_default_str();
    topo_cmd->callback([&] {
        action = [&] {
            const OracleConfig oc = topo_oracle.resolve(g);
            const auto dir =
                open_run(g, "sweep-topology", {{"model", topo_model}, {"oracle", to_json(oc)}, {"op_sets", topo_sets}});
            const auto rep = run_topology_sweep(load(topo_model), SyntheticOracle(oc), topo_sets, g.seed);
            rep.write(dir);
            out << nlohmann::json{{"run_dir", dir.string()}, {"metrics", rep.metrics}}.dump() << "\n";
        };
    });

    // smoothing
    OracleFlags sm_oracle;
    BoostFlags sm_boost;
    SmoothingConfig sm;
    auto* sm_cmd = app.add_subcommand("smoothing", "Tabular lookup versus surrogate on repeated evaluations");
    sm_oracle.attach(sm_cmd);
    sm_boost.attach(sm_cmd);
    sm_cmd->add_option("--n-archs", sm.n_archs, "Architectures (0 = the whole space)")->capture_default_str();
    sm_cmd->add_option("--n-seeds", sm.n_seeds, "Evaluations per architecture")->capture_default_str();
    sm_cmd->add_option("--rotations", sm.rotations, "Training seeds tried (0 = all)")->capture_default_str();
    sm_cmd->add_option("--K", sm.K, "Ensemble members")->capture_default_str();
    sm_cmd->callback([&] {
        action = [&] {
            const OracleConfig oc = sm_oracle.resolve(g);
            const BoostParams p = sm_boost.resolve(g.seed);
            SmoothingConfig cfg = sm;
            cfg.jobs = g.jobs;
            const auto dir = open_run(g, "smoothing",
                                      {{"oracle", to_json(oc)}, {"boost", to_json(p)}, {"n_archs", cfg.n_archs},
                                       {"n_seeds", cfg.n_seeds}, {"rotations", cfg.rotations}, {"K", cfg.K}});
            const auto rep = run_smoothing_experiment(SyntheticOracle(oc), cfg, p, g.seed);
            rep.write(dir);
            out << nlohmann::json{{"run_dir", dir.string()}, {"metrics", rep.metrics}}.dump() << "\n";
        };
    });

    // run-opt
    std::string opt_model;
    std::string opt_list = "RS,RE";
    std::size_t opt_budget = 100;
    int opt_repeats = 5;
    auto* opt_cmd = app.add_subcommand("run-opt", "Run optimizers on the noisy surrogate");
    opt_cmd->add_option("--model", opt_model, "Saved model")->required()->check(CLI::ExistingFile);
    opt_cmd->add_option("--optimizers", opt_list, "Comma-separated RS,RE,DE,TPE,BANANAS,LS")->capture_default_str();
    opt_cmd->add_option("--budget", opt_budget, "Evaluations per run")->capture_default_str();
    opt_cmd->add_option("--repeats", opt_repeats, "Seeds per optimizer")->capture_default_str();
    opt_cmd->callback([&] {
        action = [&] {
            const auto dir = open_run(g, "run-opt",
                                      {{"model", opt_model}, {"optimizers", opt_list}, {"budget", opt_budget},
                                       {"repeats", opt_repeats}});
            const auto res =
                run_benchmark_suite(load(opt_model), split_list(opt_list), opt_budget, opt_repeats, g.seed, g.jobs);
            res.report.write(dir);
            out << nlohmann::json{{"run_dir", dir.string()}, {"metrics", res.report.metrics}}.dump() << "\n";
        };
    });

    // query
    std::string q_model;
    std::string q_genotype;
    std::string q_noise = "false";
    auto* q_cmd = app.add_subcommand("query", "Query a saved model for one genotype");
    q_cmd->add_option("--model", q_model, "Saved model")->required()->check(CLI::ExistingFile);
    q_cmd->add_option("--genotype", q_genotype, "Genotype JSON file")->required()->check(CLI::ExistingFile);
    q_cmd->add_option("--noise", q_noise, "Sample the predictive distribution (true/false)")->capture_default_str();
    q_cmd->callback([&] {
        action = [&] {
            const SurrogateBenchmark b = load(q_model);
            nlohmann::json jg;
            try {
                jg = nlohmann::json::parse(read_text(q_genotype));
            } catch (const nlohmann::json::parse_error& e) {
                throw Error(ErrorCode::ParseError, q_genotype + ": " + e.what());
            }
            const Genotype geno = genotype_from_json(jg);
            validate(geno, b.space);
            Rng rng = make_rng(g.seed, "query");
            out << to_json(query(b, geno, parse_bool(q_noise), rng)).dump() << "\n";
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }
    try {
        action();
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace surrobench

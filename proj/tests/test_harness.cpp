#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <set>

#include "surrobench/error.hpp"
#include "surrobench/harness.hpp"
#include "surrobench/io.hpp"

using namespace surrobench;

namespace {

BoostParams fast_boost() {
    BoostParams p;
    p.n_rounds = 150;
    p.learning_rate = 0.1;
    p.lambda_l2 = 1.0;
    p.early_stopping_rounds = 20;
    return p;
}

const SyntheticOracle& oracle() {
    static const SyntheticOracle o([] {
        OracleConfig c;
        c.seed = 3;
        return c;
    }());
    return o;
}

const SurrogateBenchmark& benchmark() {
    static const SurrogateBenchmark b = fit_benchmark(generate_dataset(oracle(), {{"RS", 600}}, 2), fast_boost(), 3);
    return b;
}

std::vector<Genotype> random_genotypes(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Genotype> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(sample_uniform(rng, SpaceConfig{}));
    }
    return out;
}

std::size_t csv_rows(const std::string& csv) { return static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1; }

} // namespace

TEST_CASE("config hash and run directories") {
    const nlohmann::json a = {{"seed", 1}, {"n", 2}};
    const nlohmann::json b = {{"n", 2}, {"seed", 1}};
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) != config_hash({{"seed", 2}, {"n", 2}}));
    CHECK(run_directory("runs", "fit", a) == std::filesystem::path("runs") / ("fit-" + config_hash(a)));
}

TEST_CASE("parallel_for visits every index and rethrows") {
    for (int jobs : {1, 3}) {
        std::vector<int> hit(50, 0);
        parallel_for(hit.size(), jobs, [&](std::size_t i) { hit[i] += 1; });
        CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
        CHECK_THROWS_AS(parallel_for(10, jobs,
                                     [](std::size_t i) {
                                         if (i == 7) {
                                             throw Error(ErrorCode::InvalidArgument, "boom");
                                         }
                                     }),
                        Error);
    }
}

TEST_CASE("leakage assert") {
    const Dataset ds = generate_dataset(oracle(), {{"RS", 20}}, 1);
    const Dataset head = ds.subset({0, 1, 2});
    const Dataset tail = ds.subset({3, 4, 5});
    CHECK_NOTHROW(assert_disjoint(head, tail, "x"));
    CHECK_THROWS_AS(assert_disjoint(head, ds.subset({2, 9}), "x"), Error);
}

TEST_CASE("data-fit evaluation reports held-out metrics") {
    const Dataset ds = generate_dataset(oracle(), {{"RS", 800}, {"RE", 400}}, 4);
    const ExperimentReport rep = run_datafit_eval(ds, fast_boost(), SplitSpec{0.8, 0.1, 0.1, 1});
    for (const char* side : {"val", "test"}) {
        const auto& m = rep.metrics.at(side);
        CHECK(m.contains("r2"));
        CHECK(m.contains("kt"));
        CHECK(m.contains("skt"));
        CHECK(m.at("r2").get<double>() > 0.3);
    }
    CHECK(rep.metrics.at("val").at("n").get<std::size_t>() + rep.metrics.at("test").at("n").get<std::size_t>() +
              rep.metrics.at("n_train").get<std::size_t>() ==
          ds.size());

    const auto dir = std::filesystem::temp_directory_path() / "surrobench_test_harness_report";
    std::filesystem::remove_all(dir);
    rep.write(dir);
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "predictions.csv"));
    const auto back = nlohmann::json::parse(read_text(dir / "report.json"));
    CHECK(back.at("name") == rep.name);
    std::filesystem::remove_all(dir);
}

TEST_CASE("leave-one-optimizer-out has one row per tag") {
    const Dataset ds = generate_dataset(oracle(), {{"RS", 300}, {"RE", 300}}, 5);
    const ExperimentReport rep = run_loo_eval(ds, fast_boost(), 2);
    const auto& rows = rep.metrics.at("rows");
    REQUIRE(rows.size() == 2);
    std::set<std::string> tags;
    for (const auto& r : rows) {
        tags.insert(r.at("left_out").get<std::string>());
    }
    CHECK(tags == std::set<std::string>{"RE", "RS"});
    CHECK(csv_rows(rep.csv.at("loo.csv")) == 2);
    CHECK_THROWS_AS(run_loo_eval(generate_dataset(oracle(), {{"RS", 50}}, 1), fast_boost()), Error);
}

TEST_CASE("parameter-free sweep") {
    const auto gs = random_genotypes(15, 6);
    const std::vector<double> ratios = {0.0, 0.5, 1.0};
    const std::vector<Op> ops = {Op::MaxPool3x3, Op::AvgPool3x3, Op::SkipConnect};
    const ExperimentReport rep = run_paramfree_sweep(benchmark(), gs, ratios, ops, 4, 7);
    CHECK(rep.metrics.at("n_rows") == 15 * 3 * 3 * 4);
    CHECK(csv_rows(rep.csv.at("paramfree.csv")) == 15 * 3 * 3 * 4);

    // ratio 0 rows equal the base predictions
    const auto base = query_batch(benchmark(), gs);
    std::multiset<double> want;
    for (const auto& q : base) {
        for (int k = 0; k < 3 * 4; ++k) {
            want.insert(1.0 - q.mean_acc);
        }
    }
    const ExperimentReport zero = run_paramfree_sweep(benchmark(), gs, {0.0}, ops, 4, 7);
    std::istringstream in(zero.csv.at("paramfree.csv"));
    std::string line;
    std::getline(in, line);
    std::multiset<double> got;
    while (std::getline(in, line)) {
        got.insert(std::stod(line.substr(line.rfind(',') + 1)));
    }
    REQUIRE(got.size() == want.size());
    auto g = got.begin();
    for (double w : want) {
        CHECK(*g == doctest::Approx(w).epsilon(1e-15));
        ++g;
    }

    CHECK(run_paramfree_sweep(benchmark(), gs, ratios, ops, 4, 7).csv == rep.csv);
}

TEST_CASE("topology sweep covers every topology per op set") {
    const ExperimentReport rep = run_topology_sweep(benchmark(), oracle(), 10, 3);
    CHECK(rep.metrics.at("n_rows") == 1800);
    CHECK(csv_rows(rep.csv.at("topology.csv")) == 1800);
    std::size_t total = 0;
    for (const auto& d : rep.metrics.at("per_depth")) {
        total += d.at("n").get<std::size_t>();
        const int depth = d.at("depth").get<int>();
        CHECK(depth >= 1);
        CHECK(depth <= 4);
    }
    CHECK(total == 1800);
    CHECK(run_topology_sweep(benchmark(), oracle(), 10, 3).csv == rep.csv);
}

TEST_CASE("smoothing experiment without noise") {
    OracleConfig c;
    c.seed = 1;
    c.space = reduced_space(2, 2);
    c.noise_std = 0.0;
    const SyntheticOracle quiet(c);
    SmoothingConfig sc;
    sc.n_archs = 400;
    sc.K = 3;
    sc.rotations = 1;
    const ExperimentReport rep = run_smoothing_experiment(quiet, sc, fast_boost(), 1);
    CHECK(rep.metrics.at("mae_tabular").get<double>() == 0.0);
    CHECK(rep.metrics.at("mae_tabular_analytic").get<double>() == 0.0);
    CHECK(rep.metrics.at("rotations").size() == 1);

    sc.n_seeds = 2;
    CHECK_THROWS_AS(run_smoothing_experiment(quiet, sc, fast_boost(), 1), Error);
}

TEST_CASE("benchmark suite") {
    const SuiteResult res = run_benchmark_suite(benchmark(), {"RS", "RE", "DE"}, 120, 5, 11, 2);
    std::size_t traj_files = 0;
    for (const auto& [name, content] : res.report.csv) {
        traj_files += name.rfind("traj_", 0) == 0 ? 1 : 0;
    }
    CHECK(traj_files == 15);
    for (const auto& [tag, runs] : res.trajectories) {
        REQUIRE(runs.size() == 5);
        for (const auto& t : runs) {
            REQUIRE(t.events.size() == 120);
            for (std::size_t i = 1; i < t.events.size(); ++i) {
                CHECK(t.events[i].sim_time_s > t.events[i - 1].sim_time_s);
            }
        }
        CHECK(res.report.metrics.at("final_incumbent").at(tag).at("n") == 5);
    }
    CHECK(csv_rows(res.report.csv.at("incumbent_RS.csv")) == 120);

    const SuiteResult again = run_benchmark_suite(benchmark(), {"RS", "RE", "DE"}, 120, 5, 11, 1);
    CHECK(again.report.csv == res.report.csv);
}

#include <doctest.h>

#include <cmath>

#include "surrobench/metrics.hpp"
#include "surrobench/synth.hpp"

using namespace surrobench;

namespace {

OracleConfig config(std::uint64_t seed, double noise = 1.7e-3) {
    OracleConfig c;
    c.seed = seed;
    c.noise_std = noise;
    return c;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

Genotype uniform_ops(Op op) {
    Rng rng(0);
    Genotype g = sample_uniform(rng, SpaceConfig{});
    for (int c = 0; c < 2; ++c) {
        for (auto& node : g.cell(c).nodes) {
            node[0].op = op;
            node[1].op = op;
        }
    }
    return canonicalize(g);
}

} // namespace

TEST_CASE("oracle is deterministic given its seed") {
    const SyntheticOracle a(config(3));
    const SyntheticOracle b(config(3));
    const SyntheticOracle other(config(4));
    Rng rng(1);
    int differ = 0;
    for (int i = 0; i < 500; ++i) {
        const Genotype g = sample_uniform(rng, SpaceConfig{});
        CHECK(a.truth(g) == b.truth(g));
        CHECK(a.truth(g) >= 0.0);
        CHECK(a.truth(g) <= 1.0);
        differ += a.truth(g) != other.truth(g) ? 1 : 0;
    }
    CHECK(differ > 450);

    const OracleConfig back = oracle_config_from_json(nlohmann::json::parse(to_json(config(3)).dump()));
    CHECK(to_json(back) == to_json(config(3)));
    const SyntheticOracle c(back);
    Rng r2(2);
    const Genotype g = sample_uniform(r2, SpaceConfig{});
    CHECK(c.truth(g) == a.truth(g));
}

TEST_CASE("noise model") {
    Rng rng(5);
    const Genotype g = sample_uniform(rng, SpaceConfig{});
    const SyntheticOracle quiet(config(1, 0.0));
    for (int i = 0; i < 10; ++i) {
        CHECK(quiet.evaluate_noisy(g, rng) == quiet.truth(g));
    }

    const SyntheticOracle noisy(config(1, 1.7e-3));
    std::vector<double> draws;
    for (int i = 0; i < 10'000; ++i) {
        draws.push_back(noisy.evaluate_noisy(g, rng));
    }
    CHECK(std::abs(sample_std(draws) / 1.7e-3 - 1.0) < 0.05);
    CHECK(std::abs(mean(draws) - noisy.truth(g)) < 1e-4);
}

TEST_CASE("one op change moves the score by the utility and interaction deltas") {
    const SyntheticOracle oracle(config(9, 0.0));
    Rng rng(6);
    for (int i = 0; i < 500; ++i) {
        const Genotype g = sample_uniform(rng, SpaceConfig{});
        const int c = static_cast<int>(uniform_index(rng, 2));
        const int node = static_cast<int>(uniform_index(rng, 4));
        const int slot = static_cast<int>(uniform_index(rng, 2));
        Genotype h = g;
        Edge& e = h.cell(c).nodes[node][slot];
        const Op old_op = e.op;
        // stay within one parameter class so the penalty term is unchanged
        const std::vector<Op> pool = is_parameter_free(old_op)
                                         ? std::vector<Op>{Op::MaxPool3x3, Op::AvgPool3x3, Op::SkipConnect}
                                         : std::vector<Op>{Op::SepConv3x3, Op::SepConv5x5, Op::DilConv3x3, Op::DilConv5x5};
        Op new_op = old_op;
        while (new_op == old_op) {
            new_op = pool[uniform_index(rng, pool.size())];
        }
        e.op = new_op;
        // no canonicalization: the edge keeps its position, which the utility table is keyed on
        const double expected = oracle.utility(c, 2 * node + slot, new_op) - oracle.utility(c, 2 * node + slot, old_op) +
                                oracle.interaction_score(h) - oracle.interaction_score(g);
        CHECK(oracle.raw_score(h) - oracle.raw_score(g) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("interaction score sums active pairs") {
    const SyntheticOracle oracle(config(2, 0.0));
    CHECK_FALSE(oracle.interactions().empty());
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const Genotype g = sample_uniform(rng, SpaceConfig{});
        std::vector<Op> ops;
        for (int c = 0; c < 2; ++c) {
            for (const auto& node : g.cell(c).nodes) {
                ops.push_back(node[0].op);
                ops.push_back(node[1].op);
            }
        }
        double s = 0.0;
        for (const auto& it : oracle.interactions()) {
            if (ops[it.pos_a] == it.op_a && ops[it.pos_b] == it.op_b) {
                s += it.weight;
            }
        }
        CHECK(oracle.interaction_score(g) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("penalty grows once a cell exceeds four parameter-free edges") {
    const SyntheticOracle oracle(config(1));
    for (int k = 0; k <= 4; ++k) {
        CHECK(oracle.penalty(k) == 0.0);
    }
    for (int k = 5; k <= 8; ++k) {
        CHECK(oracle.penalty(k) > oracle.penalty(k - 1));
    }
}

TEST_CASE("runtime and parameter algebra") {
    const SyntheticOracle oracle(config(1));
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const Genotype g = sample_uniform(rng, SpaceConfig{});
        double t = oracle.config().runtime_base_s;
        for (int c = 0; c < 2; ++c) {
            for (const auto& node : g.cell(c).nodes) {
                t += op_runtime_cost(node[0].op) + op_runtime_cost(node[1].op);
            }
        }
        CHECK(oracle.runtime_truth(g) == doctest::Approx(t));
        CHECK(oracle.runtime_noisy(g, rng) > 0.0);
    }

    const Genotype skip = uniform_ops(Op::SkipConnect);
    const double minimal = oracle.runtime_truth(skip);
    for (Op op : kAllOps) {
        CHECK(op_runtime_cost(op) >= op_runtime_cost(Op::SkipConnect));
        CHECK(oracle.runtime_truth(uniform_ops(op)) >= minimal);
    }
    for (Op conv : {Op::SepConv3x3, Op::SepConv5x5, Op::DilConv3x3, Op::DilConv5x5}) {
        for (Op free_op : {Op::MaxPool3x3, Op::AvgPool3x3, Op::SkipConnect}) {
            CHECK(op_runtime_cost(conv) > op_runtime_cost(free_op));
        }
    }
    Genotype one = skip;
    one.normal.nodes[2][1].op = Op::SepConv5x5;
    CHECK(oracle.runtime_truth(canonicalize(one)) - minimal ==
          doctest::Approx(op_runtime_cost(Op::SepConv5x5) - op_runtime_cost(Op::SkipConnect)));
    CHECK(oracle.n_params(one) - oracle.n_params(skip) == op_param_count(Op::SepConv5x5));
}

TEST_CASE("neighbouring architectures have correlated truths") {
    const SyntheticOracle oracle(config(7, 0.0));
    const SpaceConfig cfg;
    Rng rng(9);
    std::vector<double> a;
    std::vector<double> b;
    for (int i = 0; i < 5000; ++i) {
        const Genotype g = sample_uniform(rng, cfg);
        const auto nb = neighborhood(g, cfg);
        a.push_back(oracle.truth(g));
        b.push_back(oracle.truth(nb[uniform_index(rng, nb.size())]));
    }
    CHECK(pearson(a, b) > 0.5);
}

TEST_CASE("dataset generation") {
    const SyntheticOracle oracle(config(1));
    const Dataset ds = generate_dataset(oracle, {{"RS", 1000}}, 3);
    CHECK(ds.size() == 1000);
    for (const auto& r : ds.records()) {
        CHECK(r.optimizer == "RS");
        CHECK(is_valid(r.genotype, ds.space()));
    }
    const Dataset back = parse_jsonl(to_jsonl(ds));
    CHECK(back.records() == ds.records());
    CHECK(to_jsonl(generate_dataset(oracle, {{"RS", 1000}}, 3)) == to_jsonl(ds));
    CHECK_THROWS(generate_dataset(oracle, {{"RS", 0}}, 3));

    const Dataset rep = generate_repeats(oracle, {ds[0].genotype, ds[1].genotype}, 3, 4);
    CHECK(rep.size() == 6);
    CHECK(rep.groups().size() == 2);
}

TEST_CASE("evolution collects better architectures than random search") {
    const SyntheticOracle oracle(config(1));
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Dataset ds = generate_dataset(oracle, {{"RS", 600}, {"RE", 600}}, seed);
        std::vector<double> rs;
        std::vector<double> re;
        for (const auto& r : ds.records()) {
            (r.optimizer == "RS" ? rs : re).push_back(1.0 - r.val_acc);
        }
        // compare the ECDFs in the low-error region
        const double cut = quantile(rs, 0.1);
        wins += ecdf(re)(cut) > ecdf(rs)(cut) ? 1 : 0;
    }
    CHECK(wins >= 3);
}

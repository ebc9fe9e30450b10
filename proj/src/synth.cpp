#include "surrobench/synth.hpp"

#include <algorithm>
#include <cmath>

#include "surrobench/error.hpp"

namespace surrobench {

namespace {

constexpr std::size_t kOps = kAllOps.size();

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

Op edge_op(const Genotype& g, int global_pos, int n_intermediate) {
    const int per_cell = 2 * n_intermediate;
    const int edge = global_pos % per_cell;
    return g.cell(global_pos / per_cell).nodes[edge / 2][edge % 2].op;
}

} // namespace

double op_runtime_cost(Op op) {
    switch (op) {
    case Op::SepConv3x3: return 310.0;
    case Op::SepConv5x5: return 460.0;
    case Op::DilConv3x3: return 220.0;
    case Op::DilConv5x5: return 290.0;
    case Op::MaxPool3x3: return 24.0;
    case Op::AvgPool3x3: return 26.0;
    case Op::SkipConnect: return 6.0;
    }
    return 0.0;
}

std::int64_t op_param_count(Op op) {
    switch (op) {
    case Op::SepConv3x3: return 41'000;
    case Op::SepConv5x5: return 68'000;
    case Op::DilConv3x3: return 20'500;
    case Op::DilConv5x5: return 34'000;
    default: return 0;
    }
}

nlohmann::json to_json(const OracleConfig& c) {
    return {
        {"seed", c.seed},
        {"space", to_json(c.space)},
        {"noise_std", c.noise_std},
        {"center", c.center},
        {"scale", c.scale},
        {"param_free_shift", c.param_free_shift},
        {"interaction_density", c.interaction_density},
        {"interaction_std", c.interaction_std},
        {"depth_bonus_step", c.depth_bonus_step},
        {"penalty_threshold", c.penalty_threshold},
        {"penalty_weight", c.penalty_weight},
        {"runtime_base_s", c.runtime_base_s},
        {"runtime_noise", c.runtime_noise},
    };
}

OracleConfig oracle_config_from_json(const nlohmann::json& j) {
    OracleConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            field = j.at(key).get<std::decay_t<decltype(field)>>();
        }
    };
    get("seed", c.seed);
    if (j.contains("space")) {
        c.space = space_config_from_json(j.at("space"));
    }
    get("noise_std", c.noise_std);
    get("center", c.center);
    get("scale", c.scale);
    get("param_free_shift", c.param_free_shift);
    get("interaction_density", c.interaction_density);
    get("interaction_std", c.interaction_std);
    get("depth_bonus_step", c.depth_bonus_step);
    get("penalty_threshold", c.penalty_threshold);
    get("penalty_weight", c.penalty_weight);
    get("runtime_base_s", c.runtime_base_s);
    get("runtime_noise", c.runtime_noise);
    return c;
}

SyntheticOracle::SyntheticOracle(OracleConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.noise_std < 0.0 || cfg_.scale <= 0.0 || cfg_.runtime_base_s <= 0.0) {
        throw Error(ErrorCode::InvalidArgument, "oracle needs noise_std >= 0, scale > 0 and a positive runtime base");
    }
    const int n = cfg_.space.n_intermediate;
    const int edges = 2 * n;
    Rng rng = make_rng(cfg_.seed, "oracle-utility");
    std::normal_distribution<double> normal(0.0, 1.0);
    utility_.resize(2 * static_cast<std::size_t>(edges) * kOps);
    for (int c = 0; c < 2; ++c) {
        for (int e = 0; e < edges; ++e) {
            for (std::size_t o = 0; o < kOps; ++o) {
                const double shift = is_parameter_free(kAllOps[o]) ? cfg_.param_free_shift : 0.0;
                utility_[(static_cast<std::size_t>(c) * edges + e) * kOps + o] = normal(rng) + shift;
            }
        }
    }

    Rng irng = make_rng(cfg_.seed, "oracle-interactions");
    std::normal_distribution<double> weight(0.0, cfg_.interaction_std);
    const int positions = 2 * edges;
    for (int a = 0; a < positions; ++a) {
        for (int b = a + 1; b < positions; ++b) {
            for (Op op_a : cfg_.space.ops) {
                for (Op op_b : cfg_.space.ops) {
                    if (uniform01(irng) < cfg_.interaction_density) {
                        interactions_.push_back({a, op_a, b, op_b, weight(irng)});
                    }
                }
            }
        }
    }
}

double SyntheticOracle::utility(int cell, int edge, Op op) const {
    const int edges = 2 * cfg_.space.n_intermediate;
    return utility_[(static_cast<std::size_t>(cell) * edges + edge) * kOps + static_cast<std::size_t>(op)];
}

double SyntheticOracle::depth_bonus(int d) const {
    // concave in depth, peaking at depth 3
    const double x = d - 1;
    return cfg_.depth_bonus_step * (x - x * x / 4.0);
}

double SyntheticOracle::penalty(int param_free_edges) const {
    const int excess = std::max(0, param_free_edges - cfg_.penalty_threshold);
    return cfg_.penalty_weight * excess * excess;
}

double SyntheticOracle::interaction_score(const Genotype& g) const {
    const int n = cfg_.space.n_intermediate;
    double s = 0.0;
    for (const auto& it : interactions_) {
        if (edge_op(g, it.pos_a, n) == it.op_a && edge_op(g, it.pos_b, n) == it.op_b) {
            s += it.weight;
        }
    }
    return s;
}

double SyntheticOracle::raw_score(const Genotype& g) const {
    double s = 0.0;
    for (int c = 0; c < 2; ++c) {
        const Cell& cell = g.cell(c);
        for (std::size_t node = 0; node < cell.nodes.size(); ++node) {
            for (int slot = 0; slot < 2; ++slot) {
                s += utility(c, static_cast<int>(2 * node) + slot, cell.nodes[node][slot].op);
            }
        }
        s += depth_bonus(depth(cell));
        s -= penalty(count_parameter_free(cell));
    }
    return s + interaction_score(g);
}

double SyntheticOracle::truth(const Genotype& g) const { return clamp01(cfg_.center + cfg_.scale * raw_score(g)); }

double SyntheticOracle::evaluate_noisy(const Genotype& g, Rng& rng) const {
    const double t = truth(g);
    if (cfg_.noise_std == 0.0) {
        return t;
    }
    return clamp01(t + std::normal_distribution<double>(0.0, cfg_.noise_std)(rng));
}

double SyntheticOracle::runtime_truth(const Genotype& g) const {
    double t = cfg_.runtime_base_s;
    for (int c = 0; c < 2; ++c) {
        for (const auto& node : g.cell(c).nodes) {
            for (const auto& edge : node) {
                t += op_runtime_cost(edge.op);
            }
        }
    }
    return t;
}

double SyntheticOracle::runtime_noisy(const Genotype& g, Rng& rng) const {
    const double t = runtime_truth(g);
    if (cfg_.runtime_noise == 0.0) {
        return t;
    }
    return std::max(1.0, t * (1.0 + std::normal_distribution<double>(0.0, cfg_.runtime_noise)(rng)));
}

std::int64_t SyntheticOracle::n_params(const Genotype& g) const {
    std::int64_t p = 250'000;
    for (int c = 0; c < 2; ++c) {
        for (const auto& node : g.cell(c).nodes) {
            for (const auto& edge : node) {
                p += op_param_count(edge.op);
            }
        }
    }
    return p;
}

EvalRecord SyntheticOracle::make_record(const Genotype& g, const std::string& optimizer, std::int64_t seed,
                                        Rng& rng) const {
    EvalRecord r;
    r.genotype = g;
    const double t = truth(g);
    std::normal_distribution<double> noise(0.0, cfg_.noise_std > 0.0 ? cfg_.noise_std : 1e-300);
    r.val_acc = cfg_.noise_std > 0.0 ? clamp01(t + noise(rng)) : t;
    r.train_acc = clamp01(t + 0.06 + (cfg_.noise_std > 0.0 ? noise(rng) : 0.0));
    r.test_acc = clamp01(t - 0.004 + (cfg_.noise_std > 0.0 ? noise(rng) : 0.0));
    r.runtime_s = runtime_noisy(g, rng);
    r.n_params = n_params(g);
    r.optimizer = optimizer;
    r.seed = seed;
    return r;
}

// ---------------------------------------------------------------------------

OracleObjective::OracleObjective(const SyntheticOracle& oracle, std::uint64_t noise_seed, bool noisy,
                                 std::vector<EvalRecord>* records, std::string optimizer)
    : oracle_(oracle), rng_(noise_seed), noisy_(noisy), records_(records), optimizer_(std::move(optimizer)), seed_(1) {}

Evaluation OracleObjective::evaluate(const Genotype& g) {
    if (!noisy_) {
        return {1.0 - oracle_.truth(g), oracle_.runtime_truth(g)};
    }
    EvalRecord r = oracle_.make_record(g, optimizer_, seed_, rng_);
    const Evaluation ev{1.0 - r.val_acc, r.runtime_s};
    if (records_) {
        records_->push_back(std::move(r));
    }
    return ev;
}

Dataset generate_dataset(const SyntheticOracle& oracle, const std::vector<std::pair<std::string, std::size_t>>& mix,
                         std::uint64_t seed) {
    Dataset ds(oracle.space());
    for (const auto& [tag, count] : mix) {
        if (count == 0) {
            throw Error(ErrorCode::InvalidArgument, "optimizer '" + tag + "' needs a positive evaluation count");
        }
        std::vector<EvalRecord> records;
        OracleObjective obj(oracle, derive_seed(seed, "collect-noise:" + tag), true, &records, tag);
        Rng rng = make_rng(seed, "collect-search:" + tag);
        run_optimizer(tag, obj, count, rng);
        for (auto& r : records) {
            ds.add(std::move(r));
        }
    }
    return ds;
}

Dataset generate_repeats(const SyntheticOracle& oracle, const std::vector<Genotype>& genotypes, int n_seeds,
                         std::uint64_t seed, const std::string& optimizer) {
    if (n_seeds < 1) {
        throw Error(ErrorCode::InvalidArgument, "need at least one seed per genotype");
    }
    Dataset ds(oracle.space());
    Rng rng = make_rng(seed, "repeats");
    for (int s = 1; s <= n_seeds; ++s) {
        for (const auto& g : genotypes) {
            ds.add(oracle.make_record(g, optimizer, s, rng));
        }
    }
    return ds;
}

} // namespace surrobench

#include "surrobench/searchspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "surrobench/error.hpp"

namespace surrobench {

namespace {

constexpr std::array<std::string_view, 7> kOpNames = {
    "sep_conv_3x3", "sep_conv_5x5", "dil_conv_3x3", "dil_conv_5x5",
    "max_pool_3x3", "avg_pool_3x3", "skip_connect",
};

void sort_edges(NodeEdges& edges) {
    if (edges[1] < edges[0]) {
        std::swap(edges[0], edges[1]);
    }
}

} // namespace

std::string_view to_string(Op op) { return kOpNames.at(static_cast<std::size_t>(op)); }

Op op_from_string(std::string_view tag) {
    for (std::size_t i = 0; i < kOpNames.size(); ++i) {
        if (kOpNames[i] == tag) {
            return static_cast<Op>(i);
        }
    }
    throw Error(ErrorCode::UnknownOp, "unknown operation '" + std::string(tag) + "'");
}

std::optional<int> SpaceConfig::op_index(Op op) const {
    auto it = std::find(ops.begin(), ops.end(), op);
    if (it == ops.end()) {
        return std::nullopt;
    }
    return static_cast<int>(it - ops.begin());
}

SpaceConfig reduced_space(int n_intermediate, int n_ops) {
    if (n_intermediate < 1 || n_ops < 1 || n_ops > static_cast<int>(kAllOps.size())) {
        throw Error(ErrorCode::InvalidArgument, "reduced space needs n_intermediate >= 1 and 1..7 ops");
    }
    SpaceConfig cfg;
    cfg.n_intermediate = n_intermediate;
    cfg.ops.assign(kAllOps.begin(), kAllOps.begin() + n_ops);
    return cfg;
}

int pair_count(int k) { return (k + 1) * k / 2; }

int pair_index(int k, int a, int b) {
    // ids 0..k; pairs (a < b) in lexicographic order
    const int n = k + 1;
    int index = 0;
    for (int i = 0; i < a; ++i) {
        index += n - 1 - i;
    }
    return index + (b - a - 1);
}

std::pair<int, int> pair_from_index(int k, int index) {
    const int n = k + 1;
    for (int a = 0; a < n - 1; ++a) {
        const int row = n - 1 - a;
        if (index < row) {
            return {a, a + 1 + index};
        }
        index -= row;
    }
    throw Error(ErrorCode::InvalidArgument, "parent-pair index out of range");
}

Cell canonicalize(Cell cell) {
    for (auto& node : cell.nodes) {
        sort_edges(node);
    }
    return cell;
}

Genotype canonicalize(Genotype g) {
    return {canonicalize(std::move(g.normal)), canonicalize(std::move(g.reduction))};
}

void validate(const Cell& cell, const SpaceConfig& cfg) {
    if (static_cast<int>(cell.nodes.size()) != cfg.n_intermediate) {
        throw Error(ErrorCode::InvalidArgument, "cell has " + std::to_string(cell.nodes.size()) +
                                                    " intermediate nodes, expected " +
                                                    std::to_string(cfg.n_intermediate));
    }
    for (int k = 1; k <= cfg.n_intermediate; ++k) {
        const auto& node = cell.nodes[k - 1];
        for (const auto& edge : node) {
            if (edge.parent < 0 || edge.parent > k) {
                throw Error(ErrorCode::ParentOutOfRange,
                            "node " + std::to_string(k) + " parent " + std::to_string(edge.parent) +
                                " outside {0.." + std::to_string(k) + "}");
            }
            if (!cfg.op_index(edge.op)) {
                throw Error(ErrorCode::UnknownOp, "operation " + std::string(to_string(edge.op)) +
                                                      " not in the configured op set");
            }
        }
        if (node[0].parent == node[1].parent) {
            throw Error(ErrorCode::DuplicateParent,
                        "node " + std::to_string(k) + " uses parent " + std::to_string(node[0].parent) + " twice");
        }
        if (node[1] < node[0]) {
            throw Error(ErrorCode::NotCanonical, "node " + std::to_string(k) + " edges out of order");
        }
    }
}

void validate(const Genotype& g, const SpaceConfig& cfg) {
    validate(g.normal, cfg);
    validate(g.reduction, cfg);
}

bool is_valid(const Genotype& g, const SpaceConfig& cfg) {
    try {
        validate(g, cfg);
        return true;
    } catch (const Error&) {
        return false;
    }
}

Cell sample_cell(Rng& rng, const SpaceConfig& cfg) {
    Cell cell;
    cell.nodes.resize(cfg.n_intermediate);
    for (int k = 1; k <= cfg.n_intermediate; ++k) {
        const auto [a, b] = pair_from_index(k, static_cast<int>(uniform_index(rng, pair_count(k))));
        const Op op_a = cfg.ops[uniform_index(rng, cfg.ops.size())];
        const Op op_b = cfg.ops[uniform_index(rng, cfg.ops.size())];
        cell.nodes[k - 1] = {Edge{a, op_a}, Edge{b, op_b}};
    }
    return cell;
}

Genotype sample_uniform(Rng& rng, const SpaceConfig& cfg) {
    Genotype g;
    g.normal = sample_cell(rng, cfg);
    g.reduction = sample_cell(rng, cfg);
    return g;
}

Genotype apply_mutation(const Genotype& g, const SpaceConfig& cfg, int cell_index, MutationKind kind,
                        Rng& rng) {
    Genotype child = g;
    if (kind == MutationKind::Identity) {
        return child;
    }
    Cell& cell = child.cell(cell_index);
    const int node_pos = static_cast<int>(uniform_index(rng, cell.nodes.size()));
    const int edge_pos = static_cast<int>(uniform_index(rng, 2));
    NodeEdges& node = cell.nodes[node_pos];
    Edge& edge = node[edge_pos];

    if (kind == MutationKind::ParentChange) {
        const int k = node_pos + 1;
        std::vector<int> alternatives;
        for (int p = 0; p <= k; ++p) {
            if (p != node[0].parent && p != node[1].parent) {
                alternatives.push_back(p);
            }
        }
        if (alternatives.empty()) {
            throw Error(ErrorCode::MutationImpossible,
                        "node " + std::to_string(k) + " has a single admissible parent pair");
        }
        edge.parent = alternatives[uniform_index(rng, alternatives.size())];
    } else {
        std::vector<Op> alternatives;
        for (Op op : cfg.ops) {
            if (op != edge.op) {
                alternatives.push_back(op);
            }
        }
        if (alternatives.empty()) {
            throw Error(ErrorCode::MutationImpossible, "op set has a single operation");
        }
        edge.op = alternatives[uniform_index(rng, alternatives.size())];
    }
    sort_edges(node);
    return child;
}

Mutation mutate_traced(const Genotype& g, Rng& rng, const SpaceConfig& cfg) {
    static constexpr std::array<MutationKind, 3> kKinds = {MutationKind::ParentChange, MutationKind::OpChange,
                                                           MutationKind::Identity};
    const int cell_index = static_cast<int>(uniform_index(rng, 2));
    for (;;) {
        const MutationKind kind = kKinds[uniform_index(rng, kKinds.size())];
        try {
            return {apply_mutation(g, cfg, cell_index, kind, rng), cell_index, kind};
        } catch (const Error& e) {
            if (e.code() != ErrorCode::MutationImpossible) {
                throw;
            }
        }
    }
}

Genotype mutate(const Genotype& g, Rng& rng, const SpaceConfig& cfg) {
    return mutate_traced(g, rng, cfg).child;
}

std::vector<Genotype> neighborhood(const Genotype& g, const SpaceConfig& cfg) {
    std::vector<Genotype> result;
    for (int c = 0; c < 2; ++c) {
        const Cell& cell = g.cell(c);
        for (std::size_t n = 0; n < cell.nodes.size(); ++n) {
            const int k = static_cast<int>(n) + 1;
            for (int e = 0; e < 2; ++e) {
                const NodeEdges& node = cell.nodes[n];
                for (Op op : cfg.ops) {
                    if (op == node[e].op) {
                        continue;
                    }
                    Genotype next = g;
                    next.cell(c).nodes[n][e].op = op;
                    sort_edges(next.cell(c).nodes[n]);
                    result.push_back(std::move(next));
                }
                for (int p = 0; p <= k; ++p) {
                    if (p == node[0].parent || p == node[1].parent) {
                        continue;
                    }
                    Genotype next = g;
                    next.cell(c).nodes[n][e].parent = p;
                    sort_edges(next.cell(c).nodes[n]);
                    result.push_back(std::move(next));
                }
            }
        }
    }
    return result;
}

int depth(const Cell& cell) {
    std::vector<int> node_depth(cell.nodes.size(), 0);
    int best = 0;
    for (std::size_t n = 0; n < cell.nodes.size(); ++n) {
        int longest_parent = 0;
        for (const auto& edge : cell.nodes[n]) {
            if (edge.parent >= 2) {
                longest_parent = std::max(longest_parent, node_depth[edge.parent - 2]);
            }
        }
        node_depth[n] = longest_parent + 1;
        best = std::max(best, node_depth[n]);
    }
    return best;
}

SpaceCount count_space(const SpaceConfig& cfg) {
    using boost::multiprecision::cpp_int;
    cpp_int topologies = 1;
    for (int k = 1; k <= cfg.n_intermediate; ++k) {
        topologies *= pair_count(k);
    }
    cpp_int ops = 1;
    for (int e = 0; e < cfg.edges_per_cell(); ++e) {
        ops *= static_cast<unsigned>(cfg.ops.size());
    }
    SpaceCount count;
    count.topologies_per_cell = topologies;
    count.genotypes_per_cell = topologies * ops;
    count.total = count.genotypes_per_cell * count.genotypes_per_cell;
    return count;
}

std::vector<Topology> enumerate_topologies(const SpaceConfig& cfg) {
    const auto count = count_space(cfg).topologies_per_cell;
    if (count > cfg.enumeration_cap) {
        throw Error(ErrorCode::SpaceTooLarge, "topology count " + count.str() + " exceeds enumeration cap");
    }
    const int n = cfg.n_intermediate;
    std::vector<Topology> result;
    result.reserve(count.convert_to<std::size_t>());
    std::vector<int> digit(n, 0);
    for (;;) {
        Topology t(n);
        for (int k = 1; k <= n; ++k) {
            t[k - 1] = pair_from_index(k, digit[k - 1]);
        }
        result.push_back(std::move(t));
        // odometer with the last node varying fastest
        int pos = n - 1;
        while (pos >= 0 && ++digit[pos] == pair_count(pos + 1)) {
            digit[pos] = 0;
            --pos;
        }
        if (pos < 0) {
            break;
        }
    }
    return result;
}

Cell make_cell(const Topology& topology, const std::vector<Op>& ops) {
    if (ops.size() != 2 * topology.size()) {
        throw Error(ErrorCode::InvalidArgument, "make_cell needs two ops per node");
    }
    Cell cell;
    cell.nodes.resize(topology.size());
    for (std::size_t n = 0; n < topology.size(); ++n) {
        cell.nodes[n] = {Edge{topology[n].first, ops[2 * n]}, Edge{topology[n].second, ops[2 * n + 1]}};
        sort_edges(cell.nodes[n]);
    }
    return cell;
}

std::vector<Cell> enumerate_cells(const SpaceConfig& cfg) {
    const auto count = count_space(cfg).genotypes_per_cell;
    if (count > cfg.enumeration_cap) {
        throw Error(ErrorCode::SpaceTooLarge, "cell count " + count.str() + " exceeds enumeration cap");
    }
    const auto topologies = enumerate_topologies(cfg);
    const int n_edges = cfg.edges_per_cell();
    const int n_ops = static_cast<int>(cfg.ops.size());
    std::vector<Cell> cells;
    cells.reserve(count.convert_to<std::size_t>());
    for (const auto& topology : topologies) {
        std::vector<int> digit(n_edges, 0);
        std::vector<Op> ops(n_edges);
        for (;;) {
            for (int e = 0; e < n_edges; ++e) {
                ops[e] = cfg.ops[digit[e]];
            }
            cells.push_back(make_cell(topology, ops));
            int pos = n_edges - 1;
            while (pos >= 0 && ++digit[pos] == n_ops) {
                digit[pos] = 0;
                --pos;
            }
            if (pos < 0) {
                break;
            }
        }
    }
    return cells;
}

void for_each_genotype(const SpaceConfig& cfg, const std::function<void(const Genotype&)>& visit) {
    const auto total = count_space(cfg).total;
    if (total > cfg.enumeration_cap) {
        throw Error(ErrorCode::SpaceTooLarge, "genotype count " + total.str() + " exceeds enumeration cap");
    }
    const auto cells = enumerate_cells(cfg);
    Genotype g;
    for (const auto& normal : cells) {
        g.normal = normal;
        for (const auto& reduction : cells) {
            g.reduction = reduction;
            visit(g);
        }
    }
}

std::vector<Genotype> enumerate_genotypes(const SpaceConfig& cfg) {
    std::vector<Genotype> result;
    for_each_genotype(cfg, [&](const Genotype& g) { result.push_back(g); });
    return result;
}

int count_parameter_free(const Cell& cell) {
    int count = 0;
    for (const auto& node : cell.nodes) {
        for (const auto& edge : node) {
            count += is_parameter_free(edge.op) ? 1 : 0;
        }
    }
    return count;
}

Genotype replace_parameter_free(const Genotype& g, Rng& rng, double ratio, Op op_kind) {
    if (!is_parameter_free(op_kind)) {
        throw Error(ErrorCode::NotParameterFree, std::string(to_string(op_kind)) + " has parameters");
    }
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "replacement ratio must lie in [0, 1]");
    }
    Genotype result = g;
    for (int c = 0; c < 2; ++c) {
        Cell& cell = result.cell(c);
        const int n_edges = static_cast<int>(cell.nodes.size()) * 2;
        // 1e-9 absorbs representation error in products such as 0.3 * 10
        const int n_replace = std::min(n_edges, static_cast<int>(std::ceil(ratio * n_edges - 1e-9)));
        std::vector<int> edges(n_edges);
        std::iota(edges.begin(), edges.end(), 0);
        for (int i = 0; i < n_replace; ++i) {
            const int j = i + static_cast<int>(uniform_index(rng, n_edges - i));
            std::swap(edges[i], edges[j]);
            cell.nodes[edges[i] / 2][edges[i] % 2].op = op_kind;
        }
        cell = canonicalize(std::move(cell));
    }
    return result;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const Cell& cell) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : cell.nodes) {
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& edge : node) {
            edges.push_back(nlohmann::json::array({edge.parent, std::string(to_string(edge.op))}));
        }
        nodes.push_back(std::move(edges));
    }
    return nodes;
}

nlohmann::json to_json(const Genotype& g) {
    const Genotype canon = canonicalize(g);
    return {{"normal", to_json(canon.normal)}, {"reduction", to_json(canon.reduction)}};
}

Cell cell_from_json(const nlohmann::json& j) {
    if (!j.is_array()) {
        throw Error(ErrorCode::ParseError, "cell must be an array of nodes");
    }
    Cell cell;
    for (const auto& node_json : j) {
        if (!node_json.is_array() || node_json.size() != 2) {
            throw Error(ErrorCode::ParseError, "each node must hold exactly two edges");
        }
        NodeEdges node;
        for (std::size_t e = 0; e < 2; ++e) {
            const auto& edge = node_json[e];
            if (!edge.is_array() || edge.size() != 2 || !edge[0].is_number_integer() || !edge[1].is_string()) {
                throw Error(ErrorCode::ParseError, "edge must be [parent, op]");
            }
            node[e] = Edge{edge[0].get<int>(), op_from_string(edge[1].get<std::string>())};
        }
        cell.nodes.push_back(node);
    }
    return canonicalize(std::move(cell));
}

Genotype genotype_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("normal") || !j.contains("reduction")) {
        throw Error(ErrorCode::ParseError, "genotype needs 'normal' and 'reduction'");
    }
    return {cell_from_json(j.at("normal")), cell_from_json(j.at("reduction"))};
}

std::string genotype_key(const Genotype& g) {
    std::string key;
    key.reserve(64);
    for (int c = 0; c < 2; ++c) {
        if (c == 1) {
            key += '|';
        }
        for (const auto& node : g.cell(c).nodes) {
            for (const auto& edge : node) {
                key += std::to_string(edge.parent);
                key += static_cast<char>('a' + static_cast<int>(edge.op));
            }
            key += ';';
        }
    }
    return key;
}

std::size_t GenotypeHash::operator()(const Genotype& g) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int c = 0; c < 2; ++c) {
        for (const auto& node : g.cell(c).nodes) {
            for (const auto& edge : node) {
                h ^= static_cast<std::uint64_t>(edge.parent) * 8 + static_cast<std::uint64_t>(edge.op);
                h *= 0x100000001b3ULL;
            }
        }
        h = splitmix64(h);
    }
    return static_cast<std::size_t>(h);
}

nlohmann::json to_json(const SpaceConfig& cfg) {
    nlohmann::json ops = nlohmann::json::array();
    for (Op op : cfg.ops) {
        ops.push_back(std::string(to_string(op)));
    }
    return {{"n_intermediate", cfg.n_intermediate}, {"ops", ops}};
}

SpaceConfig space_config_from_json(const nlohmann::json& j) {
    SpaceConfig cfg;
    cfg.n_intermediate = j.at("n_intermediate").get<int>();
    cfg.ops.clear();
    for (const auto& op : j.at("ops")) {
        cfg.ops.push_back(op_from_string(op.get<std::string>()));
    }
    if (cfg.n_intermediate < 1 || cfg.ops.empty()) {
        throw Error(ErrorCode::InvalidArgument, "space config needs n_intermediate >= 1 and a nonempty op set");
    }
    return cfg;
}

} // namespace surrobench

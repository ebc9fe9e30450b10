#include "surrobench/encoding.hpp"

#include <algorithm>
#include <cmath>

#include "surrobench/error.hpp"

namespace surrobench {

std::vector<int> categorical_layout(const SpaceConfig& cfg) {
    std::vector<int> cards;
    const int n_ops = static_cast<int>(cfg.ops.size());
    for (int c = 0; c < 2; ++c) {
        for (int k = 1; k <= cfg.n_intermediate; ++k) {
            cards.push_back(pair_count(k));
        }
        for (int e = 0; e < cfg.edges_per_cell(); ++e) {
            cards.push_back(n_ops);
        }
    }
    return cards;
}

CategoricalVector to_categorical(const Genotype& g, const SpaceConfig& cfg) {
    CategoricalVector v;
    v.reserve(4 * cfg.n_intermediate);
    const int n_ops = static_cast<int>(cfg.ops.size());
    for (int c = 0; c < 2; ++c) {
        const Cell& cell = g.cell(c);
        for (int k = 1; k <= cfg.n_intermediate; ++k) {
            const auto& node = cell.nodes[k - 1];
            v.push_back({pair_count(k), pair_index(k, node[0].parent, node[1].parent)});
        }
        for (const auto& node : cell.nodes) {
            for (const auto& edge : node) {
                const auto idx = cfg.op_index(edge.op);
                if (!idx) {
                    throw Error(ErrorCode::UnknownOp, std::string(to_string(edge.op)) + " not in op set");
                }
                v.push_back({n_ops, *idx});
            }
        }
    }
    return v;
}

Genotype from_categorical_values(const std::vector<int>& values, const SpaceConfig& cfg) {
    const auto cards = categorical_layout(cfg);
    if (values.size() != cards.size()) {
        throw Error(ErrorCode::LayoutMismatch, "categorical vector has " + std::to_string(values.size()) +
                                                   " dims, layout expects " + std::to_string(cards.size()));
    }
    for (std::size_t d = 0; d < values.size(); ++d) {
        if (values[d] < 0 || values[d] >= cards[d]) {
            throw Error(ErrorCode::InvalidArgument, "category out of range in dim " + std::to_string(d));
        }
    }
    const int n = cfg.n_intermediate;
    const int per_cell = 3 * n;
    Genotype g;
    for (int c = 0; c < 2; ++c) {
        Topology topology(n);
        std::vector<Op> ops(2 * n);
        for (int k = 1; k <= n; ++k) {
            topology[k - 1] = pair_from_index(k, values[c * per_cell + k - 1]);
        }
        for (int e = 0; e < 2 * n; ++e) {
            ops[e] = cfg.ops[values[c * per_cell + n + e]];
        }
        g.cell(c) = make_cell(topology, ops);
    }
    return g;
}

Genotype from_categorical(const CategoricalVector& v, const SpaceConfig& cfg) {
    std::vector<int> values;
    values.reserve(v.size());
    for (const auto& dim : v) {
        values.push_back(dim.value);
    }
    return from_categorical_values(values, cfg);
}

UnitVector to_unit(const CategoricalVector& v) {
    UnitVector x;
    x.reserve(v.size());
    for (const auto& dim : v) {
        x.push_back((dim.value + 0.5) / dim.cardinality);
    }
    return x;
}

CategoricalVector from_unit(const UnitVector& x, const SpaceConfig& cfg) {
    const auto cards = categorical_layout(cfg);
    if (x.size() != cards.size()) {
        throw Error(ErrorCode::LayoutMismatch, "unit vector has " + std::to_string(x.size()) + " dims");
    }
    CategoricalVector v(cards.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (!(x[d] >= 0.0 && x[d] < 1.0)) {
            throw Error(ErrorCode::OutOfUnitRange, "coordinate " + std::to_string(d) + " = " + std::to_string(x[d]));
        }
        const int m = cards[d];
        v[d] = {m, std::min(m - 1, static_cast<int>(std::floor(x[d] * m)))};
    }
    return v;
}

std::size_t one_hot_width(const SpaceConfig& cfg) {
    std::size_t width = 0;
    for (int m : categorical_layout(cfg)) {
        width += static_cast<std::size_t>(m);
    }
    return width;
}

std::vector<std::uint32_t> one_hot_indices(const CategoricalVector& v) {
    std::vector<std::uint32_t> indices;
    indices.reserve(v.size());
    std::uint32_t offset = 0;
    for (const auto& dim : v) {
        indices.push_back(offset + static_cast<std::uint32_t>(dim.value));
        offset += static_cast<std::uint32_t>(dim.cardinality);
    }
    return indices;
}

std::vector<double> one_hot(const CategoricalVector& v) {
    std::size_t width = 0;
    for (const auto& dim : v) {
        width += static_cast<std::size_t>(dim.cardinality);
    }
    std::vector<double> row(width, 0.0);
    for (auto i : one_hot_indices(v)) {
        row[i] = 1.0;
    }
    return row;
}

std::vector<std::vector<Op>> cell_paths(const Cell& cell) {
    // paths_to[n] holds the op sequences of all input -> node n paths
    std::vector<std::vector<std::vector<Op>>> paths_to(cell.nodes.size());
    std::vector<std::vector<Op>> all;
    for (std::size_t n = 0; n < cell.nodes.size(); ++n) {
        for (const auto& edge : cell.nodes[n]) {
            if (edge.parent < 2) {
                paths_to[n].push_back({edge.op});
            } else {
                for (const auto& prefix : paths_to[edge.parent - 2]) {
                    auto path = prefix;
                    path.push_back(edge.op);
                    paths_to[n].push_back(std::move(path));
                }
            }
        }
        // every intermediate node feeds the output concat
        all.insert(all.end(), paths_to[n].begin(), paths_to[n].end());
    }
    return all;
}

std::size_t path_width(const SpaceConfig& cfg) {
    std::size_t per_cell = 0;
    std::size_t power = 1;
    for (int len = 1; len <= cfg.n_intermediate; ++len) {
        power *= cfg.ops.size();
        per_cell += power;
    }
    return 2 * per_cell;
}

PathFeature to_path(const Genotype& g, const SpaceConfig& cfg) {
    const std::size_t m = cfg.ops.size();
    const std::size_t cell_width = path_width(cfg) / 2;
    std::vector<std::size_t> length_offset(cfg.n_intermediate + 2, 0);
    std::size_t power = 1;
    for (int len = 1; len <= cfg.n_intermediate; ++len) {
        length_offset[len + 1] = length_offset[len] + power * m;
        power *= m;
    }

    PathFeature feature;
    feature.width = 2 * cell_width;
    for (int c = 0; c < 2; ++c) {
        for (const auto& path : cell_paths(g.cell(c))) {
            std::size_t code = 0;
            for (Op op : path) {
                const auto idx = cfg.op_index(op);
                if (!idx) {
                    throw Error(ErrorCode::UnknownOp, std::string(to_string(op)) + " not in op set");
                }
                code = code * m + static_cast<std::size_t>(*idx);
            }
            feature.indices.push_back(static_cast<std::uint32_t>(c * cell_width + length_offset[path.size()] + code));
        }
    }
    std::sort(feature.indices.begin(), feature.indices.end());
    feature.indices.erase(std::unique(feature.indices.begin(), feature.indices.end()), feature.indices.end());
    return feature;
}

std::string feature_layout_version(const SpaceConfig& cfg) {
    std::string tag = "onehot-v1:n" + std::to_string(cfg.n_intermediate) + ":ops";
    for (Op op : cfg.ops) {
        tag += std::to_string(static_cast<int>(op));
    }
    return tag;
}

} // namespace surrobench

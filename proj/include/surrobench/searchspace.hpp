#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "surrobench/rng.hpp"

namespace surrobench {

// Ordinals are part of the model-file contract; do not reorder.
enum class Op : std::uint8_t {
    SepConv3x3 = 0,
    SepConv5x5 = 1,
    DilConv3x3 = 2,
    DilConv5x5 = 3,
    MaxPool3x3 = 4,
    AvgPool3x3 = 5,
    SkipConnect = 6,
};

inline constexpr std::array<Op, 7> kAllOps = {Op::SepConv3x3, Op::SepConv5x5, Op::DilConv3x3,
                                              Op::DilConv5x5, Op::MaxPool3x3, Op::AvgPool3x3,
                                              Op::SkipConnect};

constexpr bool is_parameter_free(Op op) {
    return op == Op::MaxPool3x3 || op == Op::AvgPool3x3 || op == Op::SkipConnect;
}

std::string_view to_string(Op op);
/// Throws Error(UnknownOp) for tags outside the seven DARTS operations.
Op op_from_string(std::string_view tag);

/// Node ids inside a cell: 0 and 1 are the cell inputs, id k+1 is
/// intermediate node k (1-based). Intermediate node k draws its two
/// parents from ids {0, ..., k}.
struct Edge {
    int parent = 0;
    Op op = Op::SepConv3x3;

    auto operator<=>(const Edge&) const = default;
};

using NodeEdges = std::array<Edge, 2>;

struct Cell {
    std::vector<NodeEdges> nodes;

    bool operator==(const Cell&) const = default;
    std::size_t n_intermediate() const { return nodes.size(); }
};

struct Genotype {
    Cell normal;
    Cell reduction;

    bool operator==(const Genotype&) const = default;

    const Cell& cell(int which) const { return which == 0 ? normal : reduction; }
    Cell& cell(int which) { return which == 0 ? normal : reduction; }
};

struct SpaceConfig {
    int n_intermediate = 4;
    std::vector<Op> ops{kAllOps.begin(), kAllOps.end()};
    std::uint64_t enumeration_cap = 10'000'000;

    /// Position of `op` inside `ops`, if admitted.
    std::optional<int> op_index(Op op) const;
    int edges_per_cell() const { return 2 * n_intermediate; }

    bool operator==(const SpaceConfig& other) const {
        return n_intermediate == other.n_intermediate && ops == other.ops;
    }
};

/// Reduced spaces are described by (n_intermediate, first n ops).
SpaceConfig reduced_space(int n_intermediate, int n_ops);

// ---------------------------------------------------------------------------
// Parent-pair indexing (lexicographic order over sorted pairs)

/// Number of admissible parent pairs of 1-based intermediate node k: C(k+1, 2).
int pair_count(int k);
int pair_index(int k, int a, int b);
std::pair<int, int> pair_from_index(int k, int index);

// ---------------------------------------------------------------------------

Cell canonicalize(Cell cell);
Genotype canonicalize(Genotype g);

/// Throws Error with ParentOutOfRange, DuplicateParent, NotCanonical or
/// UnknownOp when `g` violates the cell invariants under `cfg`.
void validate(const Genotype& g, const SpaceConfig& cfg);
void validate(const Cell& cell, const SpaceConfig& cfg);
bool is_valid(const Genotype& g, const SpaceConfig& cfg);

Genotype sample_uniform(Rng& rng, const SpaceConfig& cfg);
Cell sample_cell(Rng& rng, const SpaceConfig& cfg);

enum class MutationKind { ParentChange, OpChange, Identity };

struct Mutation {
    Genotype child;
    int cell = 0; // 0 normal, 1 reduction
    MutationKind kind = MutationKind::Identity;
};

/// Applies one mutation of the given kind to `cell_index`. Throws
/// Error(MutationImpossible) when the drawn edge admits no alternative
/// (parent change on intermediate node 1, or op change with a single op).
Genotype apply_mutation(const Genotype& g, const SpaceConfig& cfg, int cell_index,
                        MutationKind kind, Rng& rng);

/// Regularized-evolution mutation: pick a cell, then one of
/// {parent change, op change, identity} uniformly; impossible draws are
/// re-drawn.
Mutation mutate_traced(const Genotype& g, Rng& rng, const SpaceConfig& cfg);
Genotype mutate(const Genotype& g, Rng& rng, const SpaceConfig& cfg);

/// Every genotype one parent change or one op change away from `g`.
std::vector<Genotype> neighborhood(const Genotype& g, const SpaceConfig& cfg);

/// Longest input-to-output path, counted in intermediate nodes.
int depth(const Cell& cell);

struct SpaceCount {
    boost::multiprecision::cpp_int topologies_per_cell;
    boost::multiprecision::cpp_int genotypes_per_cell;
    boost::multiprecision::cpp_int total;
};

SpaceCount count_space(const SpaceConfig& cfg);

/// One parent pair per intermediate node.
using Topology = std::vector<std::pair<int, int>>;

/// All parent-pair assignments of one cell in lexicographic order.
/// Throws Error(SpaceTooLarge) beyond cfg.enumeration_cap.
std::vector<Topology> enumerate_topologies(const SpaceConfig& cfg);

/// Visits every canonical genotype exactly once, in a deterministic order.
void for_each_genotype(const SpaceConfig& cfg, const std::function<void(const Genotype&)>& visit);
std::vector<Genotype> enumerate_genotypes(const SpaceConfig& cfg);
std::vector<Cell> enumerate_cells(const SpaceConfig& cfg);

/// Builds a cell from a topology and 2n ops (ops listed per node, lower parent first).
Cell make_cell(const Topology& topology, const std::vector<Op>& ops);

/// Sets ceil(ratio * edges) uniformly chosen edges per cell to `op_kind`.
Genotype replace_parameter_free(const Genotype& g, Rng& rng, double ratio, Op op_kind);

int count_parameter_free(const Cell& cell);

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const Genotype& g);
nlohmann::json to_json(const Cell& cell);
/// Accepts any edge order; the result is canonicalized but not validated
/// against a SpaceConfig.
Genotype genotype_from_json(const nlohmann::json& j);
Cell cell_from_json(const nlohmann::json& j);

/// Compact stable string form, used as a map key and in CSV output.
std::string genotype_key(const Genotype& g);

struct GenotypeHash {
    std::size_t operator()(const Genotype& g) const noexcept;
};

nlohmann::json to_json(const SpaceConfig& cfg);
SpaceConfig space_config_from_json(const nlohmann::json& j);

} // namespace surrobench

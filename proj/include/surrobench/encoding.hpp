#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surrobench/searchspace.hpp"

namespace surrobench {

struct CategoricalDim {
    int cardinality = 1;
    int value = 0;

    bool operator==(const CategoricalDim&) const = default;
};

/// Per cell: n parent-pair dims (cardinalities C(k+1,2)) then 2n op dims;
/// normal cell first. 24 dims for the full space.
using CategoricalVector = std::vector<CategoricalDim>;

/// Coordinates in [0,1), one per categorical dim.
using UnitVector = std::vector<double>;

/// Cardinalities of the categorical layout; a pure function of cfg.
std::vector<int> categorical_layout(const SpaceConfig& cfg);

CategoricalVector to_categorical(const Genotype& g, const SpaceConfig& cfg);
Genotype from_categorical(const CategoricalVector& v, const SpaceConfig& cfg);
/// Decodes raw category values against the layout of cfg.
Genotype from_categorical_values(const std::vector<int>& values, const SpaceConfig& cfg);

/// Sub-interval midpoints (value + 0.5) / cardinality.
UnitVector to_unit(const CategoricalVector& v);
/// Category floor(c * m) per dim; throws Error(OutOfUnitRange) outside [0,1).
CategoricalVector from_unit(const UnitVector& x, const SpaceConfig& cfg);

/// Width of the concatenated one-hot blocks (152 for the full space).
std::size_t one_hot_width(const SpaceConfig& cfg);
std::vector<double> one_hot(const CategoricalVector& v);
/// Positions of the ones in one_hot(v), ascending.
std::vector<std::uint32_t> one_hot_indices(const CategoricalVector& v);

/// Sparse indicator over op sequences of length 1..n per cell.
struct PathFeature {
    std::vector<std::uint32_t> indices; // sorted, unique
    std::size_t width = 0;

    bool operator==(const PathFeature&) const = default;
};

std::size_t path_width(const SpaceConfig& cfg);
PathFeature to_path(const Genotype& g, const SpaceConfig& cfg);
/// Op sequences (input to output) of every simple path through the cell.
std::vector<std::vector<Op>> cell_paths(const Cell& cell);

/// Tag embedded into serialized models that consume one_hot rows.
std::string feature_layout_version(const SpaceConfig& cfg);

} // namespace surrobench

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "surrobench/searchspace.hpp"

namespace surrobench {

struct EvalRecord {
    Genotype genotype;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double test_acc = 0.0;
    double runtime_s = 1.0;
    std::int64_t n_params = 1;
    std::string optimizer;
    std::int64_t seed = 0;

    bool operator==(const EvalRecord&) const = default;
};

inline constexpr int kDatasetFormatVersion = 1;

/// Records plus a multi-map from canonical genotype to record positions.
/// Repeated evaluations of one genotype are allowed.
class Dataset {
public:
    explicit Dataset(SpaceConfig cfg = {}) : cfg_(std::move(cfg)) {}

    /// Validates and canonicalizes; throws Error(InvalidRecord).
    void add(EvalRecord record);

    const std::vector<EvalRecord>& records() const { return records_; }
    const EvalRecord& operator[](std::size_t i) const { return records_[i]; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const SpaceConfig& space() const { return cfg_; }

    /// Distinct genotypes in first-appearance order, with their record positions.
    const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
    /// Record positions of `g`; empty when never evaluated.
    const std::vector<std::size_t>& positions(const Genotype& g) const;
    bool contains(const Genotype& g) const;

    /// Sorted distinct optimizer tags.
    std::vector<std::string> optimizers() const;

    Dataset subset(const std::vector<std::size_t>& positions) const;

private:
    SpaceConfig cfg_;
    std::vector<EvalRecord> records_;
    std::vector<std::vector<std::size_t>> groups_;
    std::unordered_map<Genotype, std::size_t, GenotypeHash> group_of_;
};

/// Throws Error(InvalidRecord) describing the first violated field rule.
void check_record(const EvalRecord& record, const SpaceConfig& cfg);

nlohmann::json to_json(const EvalRecord& record);
EvalRecord record_from_json(const nlohmann::json& j);

/// One JSON record per line. Errors carry the 1-based line number.
Dataset load_jsonl(const std::filesystem::path& path, const SpaceConfig& cfg = {});
Dataset parse_jsonl(const std::string& text, const SpaceConfig& cfg = {});
void save_jsonl(const Dataset& ds, const std::filesystem::path& path);
std::string to_jsonl(const Dataset& ds);

struct SplitSpec {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
    std::uint64_t seed = 0;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

struct DatasetSplit {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Group-aware split stratified on the optimizer tag: all evaluations of
/// one genotype land on the same side; a genotype's stratum is the tag of
/// its first record.
SplitIndices stratified_split_indices(const Dataset& ds, const SplitSpec& spec);
DatasetSplit stratified_split(const Dataset& ds, const SplitSpec& spec);

struct LooPartition {
    Dataset train_val;
    Dataset held_out;
};

/// held_out = the records of `left_out`; train_val = every other record
/// whose genotype was not also evaluated by `left_out`.
LooPartition loo_partition(const Dataset& ds, const std::string& left_out);

struct GenotypeNoise {
    Genotype genotype;
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;
};

struct NoiseStats {
    std::vector<GenotypeNoise> per_genotype; // genotypes with n >= 2 only
    double mean_std = 0.0;
};

/// Sample std (n - 1) of val_acc over repeated evaluations.
NoiseStats noise_stats(const Dataset& ds);

/// Right-continuous empirical CDF.
struct Ecdf {
    std::vector<double> x; // sorted distinct support
    std::vector<double> F; // F(x[i])

    double operator()(double v) const;
    std::string to_csv() const;
};

Ecdf ecdf(std::vector<double> values);

} // namespace surrobench

#include "surrobench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "surrobench/error.hpp"
#include "surrobench/io.hpp"
#include "surrobench/metrics.hpp"
#include "surrobench/rng.hpp"

namespace surrobench {

namespace {

bool is_fraction(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

} // namespace

void check_record(const EvalRecord& record, const SpaceConfig& cfg) {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidRecord, why); };
    if (!is_fraction(record.train_acc)) {
        fail("train_acc outside [0, 1]");
    }
    if (!is_fraction(record.val_acc)) {
        fail("val_acc outside [0, 1]");
    }
    if (!is_fraction(record.test_acc)) {
        fail("test_acc outside [0, 1]");
    }
    if (!(std::isfinite(record.runtime_s) && record.runtime_s > 0.0)) {
        fail("runtime_s must be positive");
    }
    if (record.n_params <= 0) {
        fail("n_params must be positive");
    }
    if (record.optimizer.empty()) {
        fail("optimizer tag is empty");
    }
    try {
        validate(record.genotype, cfg);
    } catch (const Error& e) {
        fail(std::string("genotype: ") + e.what());
    }
}

void Dataset::add(EvalRecord record) {
    record.genotype = canonicalize(std::move(record.genotype));
    check_record(record, cfg_);
    const std::size_t pos = records_.size();
    auto [it, inserted] = group_of_.try_emplace(record.genotype, groups_.size());
    if (inserted) {
        groups_.emplace_back();
    }
    groups_[it->second].push_back(pos);
    records_.push_back(std::move(record));
}

const std::vector<std::size_t>& Dataset::positions(const Genotype& g) const {
    static const std::vector<std::size_t> kNone;
    const auto it = group_of_.find(canonicalize(g));
    return it == group_of_.end() ? kNone : groups_[it->second];
}

bool Dataset::contains(const Genotype& g) const { return !positions(g).empty(); }

std::vector<std::string> Dataset::optimizers() const {
    std::set<std::string> tags;
    for (const auto& r : records_) {
        tags.insert(r.optimizer);
    }
    return {tags.begin(), tags.end()};
}

Dataset Dataset::subset(const std::vector<std::size_t>& positions) const {
    Dataset out(cfg_);
    for (auto p : positions) {
        out.add(records_.at(p));
    }
    return out;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const EvalRecord& record) {
    return {
        {"genotype", to_json(record.genotype)},
        {"train_acc", record.train_acc},
        {"val_acc", record.val_acc},
        {"test_acc", record.test_acc},
        {"runtime_s", record.runtime_s},
        {"n_params", record.n_params},
        {"optimizer", record.optimizer},
        {"seed", record.seed},
        {"format_version", kDatasetFormatVersion},
    };
}

EvalRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::InvalidRecord, "record must be a JSON object");
    }
    if (j.contains("format_version") && j.at("format_version") != kDatasetFormatVersion) {
        throw Error(ErrorCode::InvalidRecord, "unsupported format_version " + j.at("format_version").dump());
    }
    try {
        EvalRecord r;
        r.genotype = genotype_from_json(j.at("genotype"));
        r.train_acc = j.at("train_acc").get<double>();
        r.val_acc = j.at("val_acc").get<double>();
        r.test_acc = j.at("test_acc").get<double>();
        r.runtime_s = j.at("runtime_s").get<double>();
        r.n_params = j.at("n_params").get<std::int64_t>();
        r.optimizer = j.at("optimizer").get<std::string>();
        r.seed = j.at("seed").get<std::int64_t>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidRecord, e.what());
    }
}

Dataset parse_jsonl(const std::string& text, const SpaceConfig& cfg) {
    Dataset ds(cfg);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            ds.add(record_from_json(j));
        } catch (const Error& e) {
            const auto code = e.code() == ErrorCode::ParseError ? ErrorCode::ParseError : ErrorCode::InvalidRecord;
            throw Error(code, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return ds;
}

Dataset load_jsonl(const std::filesystem::path& path, const SpaceConfig& cfg) {
    return parse_jsonl(read_text(path), cfg);
}

std::string to_jsonl(const Dataset& ds) {
    std::string out;
    for (const auto& r : ds.records()) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

void save_jsonl(const Dataset& ds, const std::filesystem::path& path) { write_text_atomic(path, to_jsonl(ds)); }

// ---------------------------------------------------------------------------

SplitIndices stratified_split_indices(const Dataset& ds, const SplitSpec& spec) {
    if (!(spec.train > 0.0 && spec.val > 0.0 && spec.test > 0.0) ||
        std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "split fractions must be positive and sum to 1");
    }
    if (ds.empty()) {
        throw Error(ErrorCode::EmptyStratum, "cannot split an empty dataset");
    }
    std::map<std::string, std::vector<std::size_t>> strata; // tag -> group ids
    for (std::size_t gi = 0; gi < ds.groups().size(); ++gi) {
        strata[ds[ds.groups()[gi].front()].optimizer].push_back(gi);
    }

    SplitIndices out;
    for (auto& [tag, group_ids] : strata) {
        Rng rng = make_rng(spec.seed, "split:" + tag);
        std::shuffle(group_ids.begin(), group_ids.end(), rng);
        std::size_t total = 0;
        for (auto gi : group_ids) {
            total += ds.groups()[gi].size();
        }
        const auto n_train = static_cast<std::size_t>(std::llround(spec.train * static_cast<double>(total)));
        const auto n_val = static_cast<std::size_t>(std::llround(spec.val * static_cast<double>(total)));
        std::size_t in_train = 0;
        std::size_t in_val = 0;
        for (auto gi : group_ids) {
            const auto& members = ds.groups()[gi];
            std::vector<std::size_t>* side = &out.test;
            if (in_train < n_train) {
                side = &out.train;
                in_train += members.size();
            } else if (in_val < n_val) {
                side = &out.val;
                in_val += members.size();
            }
            side->insert(side->end(), members.begin(), members.end());
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

DatasetSplit stratified_split(const Dataset& ds, const SplitSpec& spec) {
    const auto idx = stratified_split_indices(ds, spec);
    return {ds.subset(idx.train), ds.subset(idx.val), ds.subset(idx.test)};
}

LooPartition loo_partition(const Dataset& ds, const std::string& left_out) {
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds[i].optimizer == left_out) {
            held.push_back(i);
        }
    }
    if (held.empty()) {
        throw Error(ErrorCode::UnknownOptimizer, "no records tagged '" + left_out + "'");
    }
    LooPartition part{Dataset(ds.space()), ds.subset(held)};
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds[i].optimizer != left_out && !part.held_out.contains(ds[i].genotype)) {
            part.train_val.add(ds[i]);
        }
    }
    return part;
}

NoiseStats noise_stats(const Dataset& ds) {
    NoiseStats stats;
    double sum = 0.0;
    for (const auto& group : ds.groups()) {
        if (group.size() < 2) {
            continue;
        }
        std::vector<double> vals;
        for (auto p : group) {
            vals.push_back(ds[p].val_acc);
        }
        GenotypeNoise entry{ds[group.front()].genotype, mean(vals), sample_std(vals), vals.size()};
        sum += entry.std;
        stats.per_genotype.push_back(std::move(entry));
    }
    if (!stats.per_genotype.empty()) {
        stats.mean_std = sum / static_cast<double>(stats.per_genotype.size());
    }
    return stats;
}

double Ecdf::operator()(double v) const {
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    if (it == x.begin()) {
        return 0.0;
    }
    return F[static_cast<std::size_t>(it - x.begin()) - 1];
}

std::string Ecdf::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "x,F\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out << x[i] << ',' << F[i] << '\n';
    }
    return out.str();
}

Ecdf ecdf(std::vector<double> values) {
    if (values.empty()) {
        throw Error(ErrorCode::EmptyInput, "ECDF of an empty sample");
    }
    std::sort(values.begin(), values.end());
    Ecdf e;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i]) {
            continue;
        }
        e.x.push_back(values[i]);
        e.F.push_back(static_cast<double>(i + 1) / n);
    }
    return e;
}

} // namespace surrobench

#include "surrobench/gbtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "surrobench/error.hpp"
#include "surrobench/rng.hpp"

namespace surrobench {

// ---------------------------------------------------------------------------
// FeatureMatrix

FeatureMatrix FeatureMatrix::from_dense(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix m(rows.empty() ? 0 : rows.front().size());
    for (const auto& row : rows) {
        m.add_dense_row(row);
    }
    return m;
}

void FeatureMatrix::add_row(std::span<const std::uint32_t> indices, std::span<const double> values) {
    if (indices.size() != values.size()) {
        throw Error(ErrorCode::InvalidArgument, "row indices and values differ in length");
    }
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= n_cols_ || (i > 0 && indices[i] <= indices[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "row indices must be ascending and within the column count");
        }
    }
    indices_.insert(indices_.end(), indices.begin(), indices.end());
    values_.insert(values_.end(), values.begin(), values.end());
    row_ptr_.push_back(indices_.size());
}

void FeatureMatrix::add_binary_row(std::span<const std::uint32_t> indices) {
    const std::vector<double> ones(indices.size(), 1.0);
    add_row(indices, ones);
}

void FeatureMatrix::add_dense_row(std::span<const double> row) {
    if (row.size() != n_cols_) {
        throw Error(ErrorCode::LayoutMismatch, "dense row width differs from matrix width");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (row[c] != 0.0) {
            indices_.push_back(static_cast<std::uint32_t>(c));
            values_.push_back(row[c]);
        }
    }
    row_ptr_.push_back(indices_.size());
}

double FeatureMatrix::at(std::size_t r, std::size_t c) const {
    const auto idx = row_indices(r);
    const auto it = std::lower_bound(idx.begin(), idx.end(), static_cast<std::uint32_t>(c));
    if (it == idx.end() || *it != c) {
        return 0.0;
    }
    return values_[row_ptr_[r] + static_cast<std::size_t>(it - idx.begin())];
}

void FeatureMatrix::densify_row(std::size_t r, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const auto idx = row_indices(r);
    const auto val = row_values(r);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out[idx[i]] = val[i];
    }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
    FeatureMatrix m(n_cols_);
    for (auto r : rows) {
        m.add_row(row_indices(r), row_values(r));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Prediction

double predict_tree(const Tree& tree, std::span<const double> dense_row) {
    int node = 0;
    while (!tree[node].is_leaf()) {
        const auto& n = tree[node];
        node = dense_row[n.feature] < n.threshold ? n.left : n.right;
    }
    return tree[node].value;
}

namespace {

double sparse_value(std::span<const std::uint32_t> idx, std::span<const double> val, int feature) {
    const auto it = std::lower_bound(idx.begin(), idx.end(), static_cast<std::uint32_t>(feature));
    if (it == idx.end() || static_cast<int>(*it) != feature) {
        return 0.0;
    }
    return val[static_cast<std::size_t>(it - idx.begin())];
}

double predict_tree_sparse(const Tree& tree, std::span<const std::uint32_t> idx, std::span<const double> val) {
    int node = 0;
    while (!tree[node].is_leaf()) {
        const auto& n = tree[node];
        node = sparse_value(idx, val, n.feature) < n.threshold ? n.left : n.right;
    }
    return tree[node].value;
}

} // namespace

double TreeEnsemble::predict_dense(std::span<const double> row) const {
    if (row.size() != n_features) {
        throw Error(ErrorCode::LayoutMismatch, "row has " + std::to_string(row.size()) + " features, model expects " +
                                                   std::to_string(n_features));
    }
    double sum = 0.0;
    for (const auto& tree : trees) {
        sum += predict_tree(tree, row);
    }
    return base_score + shrinkage * sum;
}

std::vector<double> predict(const TreeEnsemble& model, const FeatureMatrix& X) {
    if (X.cols() != model.n_features) {
        throw Error(ErrorCode::LayoutMismatch, "matrix has " + std::to_string(X.cols()) + " features, model expects " +
                                                   std::to_string(model.n_features));
    }
    std::vector<double> out(X.rows());
    std::vector<double> row(X.cols());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        X.densify_row(r, row); // absent entries read as 0, as in the sparse walk
        double sum = 0.0;
        for (const auto& tree : model.trees) {
            sum += predict_tree(tree, row);
        }
        out[r] = model.base_score + model.shrinkage * sum;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Params

BoostParams BoostParams::xgb_defaults() {
    BoostParams p;
    p.learning_rate = 0.00824;
    p.max_depth = 13;
    p.max_leaves = 0;
    p.max_bin = 256;
    p.feature_fraction = 0.2545;
    p.min_child_weight = 39;
    p.lambda_l1 = 0.2417;
    p.lambda_l2 = 31.3933;
    return p;
}

void BoostParams::check() const {
    if (n_rounds < 0 || !(learning_rate > 0.0 && learning_rate <= 1.0) || max_depth < 1 || max_leaves < 0 ||
        max_bin < 0 || !(feature_fraction > 0.0 && feature_fraction <= 1.0) || min_child_weight < 0.0 ||
        lambda_l1 < 0.0 || lambda_l2 < 0.0 || early_stopping_rounds < 0) {
        throw Error(ErrorCode::InvalidArgument, "boosting parameters out of range");
    }
}

void ForestParams::check() const {
    if (n_estimators < 1 || !(max_features > 0.0 && max_features <= 1.0) || min_samples_split < 2 ||
        min_samples_leaf < 1 || max_depth < 0) {
        throw Error(ErrorCode::InvalidArgument, "forest parameters out of range");
    }
}

double soft_threshold(double g, double alpha) {
    if (g > alpha) {
        return g - alpha;
    }
    if (g < -alpha) {
        return g + alpha;
    }
    return 0.0;
}

double leaf_value(double g, double h, double alpha, double lambda) {
    const double denom = h + lambda;
    return denom > 0.0 ? soft_threshold(g, alpha) / denom : 0.0;
}

// ---------------------------------------------------------------------------
// Tree growing

namespace {

constexpr double kMinSplitGain = 1e-15;

struct FeatureBins {
    std::vector<double> thresholds; // between consecutive bins
    int default_bin = 0;            // bin of an implicit zero

    int n_bins() const { return static_cast<int>(thresholds.size()) + 1; }
    int bin_of(double v) const {
        return static_cast<int>(std::upper_bound(thresholds.begin(), thresholds.end(), v) - thresholds.begin());
    }
};

FeatureBins make_bins(std::vector<double> nonzero, std::size_t n_rows, int max_bin) {
    std::sort(nonzero.begin(), nonzero.end());
    const std::size_t zero_count = n_rows - nonzero.size();
    std::vector<double> distinct;
    std::vector<std::size_t> counts;
    auto push = [&](double v, std::size_t c) {
        if (!distinct.empty() && distinct.back() == v) {
            counts.back() += c;
        } else {
            distinct.push_back(v);
            counts.push_back(c);
        }
    };
    bool zero_done = zero_count == 0;
    for (double v : nonzero) {
        if (!zero_done && v > 0.0) {
            push(0.0, zero_count);
            zero_done = true;
        }
        push(v, 1);
    }
    if (!zero_done) {
        push(0.0, zero_count);
    }

    FeatureBins bins;
    const std::size_t d = distinct.size();
    if (max_bin == 0 || d <= static_cast<std::size_t>(max_bin)) {
        for (std::size_t i = 0; i + 1 < d; ++i) {
            bins.thresholds.push_back(0.5 * (distinct[i] + distinct[i + 1]));
        }
    } else {
        // Greedy quantile cut; a run of tied values never straddles a cut.
        double target = static_cast<double>(n_rows) / max_bin;
        std::size_t cum = 0;
        std::size_t start = 0;
        for (std::size_t i = 0; i + 1 < d; ++i) {
            cum += counts[i];
            const int made = static_cast<int>(bins.thresholds.size());
            if (made >= max_bin - 1) {
                break;
            }
            if (static_cast<double>(cum - start) >= target) {
                bins.thresholds.push_back(0.5 * (distinct[i] + distinct[i + 1]));
                start = cum;
                target = static_cast<double>(n_rows - cum) / (max_bin - made - 1);
            }
        }
    }
    bins.default_bin = bins.bin_of(0.0);
    return bins;
}

/// Training matrix mapped to global bin ids; entries in a feature's
/// default bin are left implicit.
class BinnedData {
public:
    BinnedData(const FeatureMatrix& X, int max_bin) {
        const std::size_t n = X.rows();
        const std::size_t m = X.cols();
        std::vector<std::vector<double>> columns(m);
        for (std::size_t r = 0; r < n; ++r) {
            const auto idx = X.row_indices(r);
            const auto val = X.row_values(r);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                columns[idx[i]].push_back(val[i]);
            }
        }
        features_.reserve(m);
        offset_.assign(m + 1, 0);
        for (std::size_t f = 0; f < m; ++f) {
            features_.push_back(make_bins(std::move(columns[f]), n, max_bin));
            offset_[f + 1] = offset_[f] + static_cast<std::uint32_t>(features_.back().n_bins());
        }
        row_ptr_.assign(1, 0);
        row_ptr_.reserve(n + 1);
        for (std::size_t r = 0; r < n; ++r) {
            const auto idx = X.row_indices(r);
            const auto val = X.row_values(r);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const auto& fb = features_[idx[i]];
                const int b = fb.bin_of(val[i]);
                if (b != fb.default_bin) {
                    bins_.push_back(offset_[idx[i]] + static_cast<std::uint32_t>(b));
                }
            }
            row_ptr_.push_back(bins_.size());
        }
    }

    std::size_t n_features() const { return features_.size(); }
    std::size_t total_bins() const { return offset_.back(); }
    const FeatureBins& feature(std::size_t f) const { return features_[f]; }
    std::uint32_t offset(std::size_t f) const { return offset_[f]; }

    std::span<const std::uint32_t> row_bins(std::size_t r) const {
        return {bins_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }

    int bin(std::size_t r, std::size_t f) const {
        const auto row = row_bins(r);
        const auto it = std::lower_bound(row.begin(), row.end(), offset_[f]);
        if (it != row.end() && *it < offset_[f + 1]) {
            return static_cast<int>(*it - offset_[f]);
        }
        return features_[f].default_bin;
    }

private:
    std::vector<FeatureBins> features_;
    std::vector<std::uint32_t> offset_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> bins_;
};

struct GradHess {
    double g = 0.0;
    double h = 0.0;
};

using Histogram = std::vector<GradHess>;

struct GrowParams {
    double lambda_l1 = 0.0;
    double lambda_l2 = 0.0;
    double min_child_weight = 0.0;
    double min_split_weight = 0.0; // nodes lighter than this stay leaves
    int max_depth = 0;             // 0 = unbounded
    int max_leaves = 0;            // 0 = unbounded
    double feature_fraction = 1.0;
    bool sample_per_node = false;
};

struct NodeSplit {
    bool found = false;
    int feature = -1;
    int bin = -1; // last bin routed left
    double gain = 0.0;
};

double node_score(double g, double h, double alpha, double lambda) {
    const double t = soft_threshold(g, alpha);
    const double denom = h + lambda;
    return denom > 0.0 ? t * t / denom : 0.0;
}

class TreeGrower {
public:
    TreeGrower(const BinnedData& data, const GrowParams& params) : data_(data), params_(params) {
        for (std::size_t f = 0; f < data.n_features(); ++f) {
            if (data.feature(f).n_bins() >= 2) {
                usable_.push_back(static_cast<int>(f));
            }
        }
    }

    const std::vector<int>& usable_features() const { return usable_; }

    /// Grows one tree on gradients g (already weight-multiplied) and
    /// hessians h. `leaf_rows` receives the rows of every leaf, keyed by
    /// node id.
    Tree grow(std::span<const double> g, std::span<const double> h, std::vector<std::uint32_t> rows, Rng& rng,
              std::vector<std::pair<int, std::vector<std::uint32_t>>>* leaf_rows) {
        Tree tree(1);
        std::vector<int> tree_features;
        if (!params_.sample_per_node) {
            tree_features = sample_features(rng);
        }
        assign_slots(params_.sample_per_node ? usable_ : tree_features);

        std::vector<Work> frontier(1);
        frontier[0].node = 0;
        frontier[0].depth = 0;
        frontier[0].rows = std::move(rows);
        frontier[0].hist = build_histogram(frontier[0].rows, g, h);
        sum_stats(frontier[0], g, h);
        int n_leaves = 1;

        while (!frontier.empty()) {
            for (auto& w : frontier) {
                if (can_split(w)) {
                    w.split = best_split(w, params_.sample_per_node ? sample_features(rng) : tree_features);
                }
            }
            std::vector<std::size_t> order(frontier.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return frontier[a].split.gain > frontier[b].split.gain; });

            std::vector<Work> next;
            for (std::size_t i : order) {
                Work& w = frontier[i];
                const bool room = params_.max_leaves == 0 || n_leaves < params_.max_leaves;
                if (!w.split.found || !room) {
                    tree[w.node].value = leaf_value(w.g, w.h, params_.lambda_l1, params_.lambda_l2);
                    if (leaf_rows) {
                        leaf_rows->emplace_back(w.node, std::move(w.rows));
                    }
                    continue;
                }
                ++n_leaves;
                const int f = w.split.feature;
                Work left;
                Work right;
                left.depth = right.depth = w.depth + 1;
                for (auto r : w.rows) {
                    (data_.bin(r, f) <= w.split.bin ? left.rows : right.rows).push_back(r);
                }
                left.node = static_cast<int>(tree.size());
                right.node = left.node + 1;
                tree[w.node].feature = f;
                tree[w.node].threshold = data_.feature(f).thresholds[w.split.bin];
                tree[w.node].left = left.node;
                tree[w.node].right = right.node;
                tree.resize(tree.size() + 2);

                Work& small = left.rows.size() <= right.rows.size() ? left : right;
                Work& large = left.rows.size() <= right.rows.size() ? right : left;
                small.hist = build_histogram(small.rows, g, h);
                large.hist = std::move(w.hist);
                for (std::size_t b = 0; b < large.hist.size(); ++b) {
                    large.hist[b].g -= small.hist[b].g;
                    large.hist[b].h -= small.hist[b].h;
                }
                sum_stats(left, g, h);
                sum_stats(right, g, h);
                next.push_back(std::move(left));
                next.push_back(std::move(right));
            }
            frontier = std::move(next);
        }
        return tree;
    }

    NodeSplit root_split(std::span<const double> g, std::span<const double> h, std::vector<std::uint32_t> rows) {
        assign_slots(usable_);
        Work w;
        w.rows = std::move(rows);
        w.hist = build_histogram(w.rows, g, h);
        sum_stats(w, g, h);
        return best_split(w, usable_);
    }

private:
    struct Work {
        int node = 0;
        int depth = 0;
        std::vector<std::uint32_t> rows;
        Histogram hist;
        double g = 0.0;
        double h = 0.0;
        NodeSplit split;
    };

    std::vector<int> sample_features(Rng& rng) const {
        std::vector<int> features = usable_;
        if (params_.feature_fraction >= 1.0 || features.empty()) {
            return features;
        }
        const auto k = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(params_.feature_fraction * static_cast<double>(features.size()))), 1,
            features.size());
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(features[i], features[i + uniform_index(rng, features.size() - i)]);
        }
        features.resize(k);
        std::sort(features.begin(), features.end());
        return features;
    }

    // Histograms only cover the features a tree may split on; slot_of_bin_
    // maps global bin ids into that compact range.
    void assign_slots(const std::vector<int>& features) {
        std::uint32_t n = 0;
        for (int f : features) {
            n += static_cast<std::uint32_t>(data_.feature(f).n_bins());
        }
        // untracked bins land in a trailing scratch slot
        slot_of_bin_.assign(data_.total_bins(), n);
        slot_offset_.assign(data_.n_features(), 0);
        std::uint32_t next = 0;
        for (int f : features) {
            slot_offset_[f] = next;
            const auto off = data_.offset(f);
            for (int b = 0; b < data_.feature(f).n_bins(); ++b) {
                slot_of_bin_[off + b] = next++;
            }
        }
        n_slots_ = n + 1;
    }

    Histogram build_histogram(const std::vector<std::uint32_t>& rows, std::span<const double> g,
                              std::span<const double> h) const {
        Histogram hist(n_slots_);
        for (auto r : rows) {
            const double gr = g[r];
            const double hr = h[r];
            for (auto b : data_.row_bins(r)) {
                auto& cell = hist[slot_of_bin_[b]];
                cell.g += gr;
                cell.h += hr;
            }
        }
        return hist;
    }

    static void sum_stats(Work& w, std::span<const double> g, std::span<const double> h) {
        w.g = 0.0;
        w.h = 0.0;
        for (auto r : w.rows) {
            w.g += g[r];
            w.h += h[r];
        }
    }

    bool can_split(const Work& w) const {
        if (params_.max_depth > 0 && w.depth >= params_.max_depth) {
            return false;
        }
        return w.rows.size() >= 2 && w.h >= params_.min_split_weight && w.h >= 2.0 * params_.min_child_weight;
    }

    NodeSplit best_split(const Work& w, const std::vector<int>& features) const {
        const double alpha = params_.lambda_l1;
        const double lambda = params_.lambda_l2;
        const double parent = node_score(w.g, w.h, alpha, lambda);
        NodeSplit best;
        best.gain = kMinSplitGain;
        for (int f : features) {
            const auto& fb = data_.feature(f);
            const auto off = static_cast<std::size_t>(slot_offset_[f]);
            const int nb = fb.n_bins();
            GradHess rest{w.g, w.h};
            for (int b = 0; b < nb; ++b) {
                if (b != fb.default_bin) {
                    rest.g -= w.hist[off + b].g;
                    rest.h -= w.hist[off + b].h;
                }
            }
            double gl = 0.0;
            double hl = 0.0;
            for (int b = 0; b + 1 < nb; ++b) {
                if (b == fb.default_bin) {
                    gl += rest.g;
                    hl += rest.h;
                } else {
                    gl += w.hist[off + b].g;
                    hl += w.hist[off + b].h;
                }
                const double gr = w.g - gl;
                const double hr = w.h - hl;
                if (hl <= 0.0 || hr <= 0.0 || hl < params_.min_child_weight || hr < params_.min_child_weight) {
                    continue;
                }
                const double gain = node_score(gl, hl, alpha, lambda) + node_score(gr, hr, alpha, lambda) - parent;
                if (gain > best.gain) {
                    best = {true, f, b, gain};
                }
            }
        }
        return best;
    }

    const BinnedData& data_;
    GrowParams params_;
    std::vector<int> usable_;
    std::vector<std::uint32_t> slot_of_bin_;
    std::vector<std::uint32_t> slot_offset_;
    std::size_t n_slots_ = 0;
};

void check_inputs(const FeatureMatrix& X, std::span<const double> y) {
    if (X.rows() < 2) {
        throw Error(ErrorCode::EmptyData, "need at least two training rows");
    }
    if (X.rows() != y.size()) {
        throw Error(ErrorCode::InvalidArgument, "feature rows and targets differ in count");
    }
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFiniteInput, "non-finite target");
        }
    }
    for (std::size_t r = 0; r < X.rows(); ++r) {
        for (double v : X.row_values(r)) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFiniteInput, "non-finite feature in row " + std::to_string(r));
            }
        }
    }
}

double mse(std::span<const double> pred, std::span<const double> y) {
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = pred[i] - y[i];
        sum += d * d;
    }
    return y.empty() ? 0.0 : sum / static_cast<double>(y.size());
}

} // namespace

TreeEnsemble fit_boosted(const FeatureMatrix& X, std::span<const double> y, const FeatureMatrix& Xval,
                         std::span<const double> yval, const BoostParams& params, FitTrace* trace) {
    params.check();
    check_inputs(X, y);
    const bool use_val = Xval.rows() > 0;
    if (use_val && (Xval.rows() != yval.size() || Xval.cols() != X.cols())) {
        throw Error(ErrorCode::LayoutMismatch, "validation data does not match training layout");
    }

    const std::size_t n = X.rows();
    TreeEnsemble model;
    model.n_features = X.cols();
    model.shrinkage = params.learning_rate;
    model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

    const BinnedData data(X, params.max_bin);
    GrowParams gp;
    gp.lambda_l1 = params.lambda_l1;
    gp.lambda_l2 = params.lambda_l2;
    gp.min_child_weight = params.min_child_weight;
    gp.max_depth = params.max_depth;
    gp.max_leaves = params.max_leaves;
    gp.feature_fraction = params.feature_fraction;
    TreeGrower grower(data, gp);

    std::vector<double> f_train(n, model.base_score);
    std::vector<double> f_val(yval.size(), model.base_score);
    std::vector<double> grad(n);
    const std::vector<double> hess(n, 1.0);
    std::vector<std::uint32_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0U);

    FitTrace local;
    FitTrace& tr = trace ? *trace : local;
    tr = FitTrace{};
    double best_val = use_val ? mse(f_val, yval) : 0.0;
    if (use_val) {
        tr.val_loss.push_back(best_val);
    }
    std::size_t best_trees = 0;

    for (int round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = y[i] - f_train[i];
        }
        Rng rng = make_rng(params.seed, "boost-round", static_cast<std::uint64_t>(round));
        std::vector<std::pair<int, std::vector<std::uint32_t>>> leaves;
        Tree tree = grower.grow(grad, hess, all_rows, rng, &leaves);
        for (const auto& [node, rows] : leaves) {
            const double step = model.shrinkage * tree[node].value;
            for (auto r : rows) {
                f_train[r] += step;
            }
        }
        tr.train_loss.push_back(mse(f_train, y));
        if (use_val) {
            for (std::size_t i = 0; i < yval.size(); ++i) {
                f_val[i] += model.shrinkage * predict_tree_sparse(tree, Xval.row_indices(i), Xval.row_values(i));
            }
        }
        model.trees.push_back(std::move(tree));
        if (use_val) {
            const double loss = mse(f_val, yval);
            tr.val_loss.push_back(loss);
            if (loss < best_val) {
                best_val = loss;
                best_trees = model.trees.size();
            } else if (params.early_stopping_rounds > 0 &&
                       model.trees.size() - best_trees >= static_cast<std::size_t>(params.early_stopping_rounds)) {
                break;
            }
        }
    }
    if (use_val) {
        model.trees.resize(best_trees);
    }
    tr.best_n_trees = model.trees.size();
    return model;
}

TreeEnsemble fit_forest(const FeatureMatrix& X, std::span<const double> y, const ForestParams& params) {
    params.check();
    check_inputs(X, y);
    const std::size_t n = X.rows();

    TreeEnsemble model;
    model.n_features = X.cols();
    model.base_score = 0.0;
    model.shrinkage = 1.0 / params.n_estimators;

    const BinnedData data(X, 0);
    GrowParams gp;
    gp.min_child_weight = params.min_samples_leaf;
    gp.min_split_weight = params.min_samples_split;
    gp.max_depth = params.max_depth;
    gp.max_leaves = 0;
    gp.feature_fraction = params.max_features;
    gp.sample_per_node = true;
    TreeGrower grower(data, gp);

    std::vector<double> g(n);
    std::vector<double> h(n);
    for (int t = 0; t < params.n_estimators; ++t) {
        Rng rng = make_rng(params.seed, "forest-tree", static_cast<std::uint64_t>(t));
        std::vector<double> weight(n, 1.0);
        if (params.bootstrap) {
            std::fill(weight.begin(), weight.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                weight[uniform_index(rng, n)] += 1.0;
            }
        }
        std::vector<std::uint32_t> rows;
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = weight[i] * y[i];
            h[i] = weight[i];
            if (weight[i] > 0.0) {
                rows.push_back(static_cast<std::uint32_t>(i));
            }
        }
        model.trees.push_back(grower.grow(g, h, std::move(rows), rng, nullptr));
    }
    return model;
}

SplitResult find_root_split(const FeatureMatrix& X, std::span<const double> targets, const SplitParams& params) {
    check_inputs(X, targets);
    const BinnedData data(X, params.max_bin);
    GrowParams gp;
    gp.lambda_l1 = params.lambda_l1;
    gp.lambda_l2 = params.lambda_l2;
    gp.min_child_weight = params.min_child_weight;
    TreeGrower grower(data, gp);
    const std::vector<double> h(X.rows(), 1.0);
    std::vector<std::uint32_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), 0U);
    const NodeSplit s = grower.root_split(targets, h, std::move(rows));
    SplitResult result;
    if (s.found) {
        result.found = true;
        result.feature = s.feature;
        result.threshold = data.feature(s.feature).thresholds[s.bin];
        result.gain = s.gain;
    }
    return result;
}

} // namespace surrobench

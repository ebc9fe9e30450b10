#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace surrobench {

/// Row-major sparse feature matrix with implicit zeros (CSR). Dense data
/// is stored the same way; one-hot and path encodings stay compact.
class FeatureMatrix {
public:
    explicit FeatureMatrix(std::size_t n_cols = 0) : n_cols_(n_cols) {}

    static FeatureMatrix from_dense(const std::vector<std::vector<double>>& rows);

    /// `indices` must be strictly ascending and < cols().
    void add_row(std::span<const std::uint32_t> indices, std::span<const double> values);
    void add_binary_row(std::span<const std::uint32_t> indices);
    void add_dense_row(std::span<const double> row);

    std::size_t rows() const { return row_ptr_.size() - 1; }
    std::size_t cols() const { return n_cols_; }
    std::size_t nnz() const { return indices_.size(); }

    std::span<const std::uint32_t> row_indices(std::size_t r) const {
        return {indices_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }
    std::span<const double> row_values(std::size_t r) const {
        return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }
    double at(std::size_t r, std::size_t c) const;
    /// Writes row r into `out` (size cols()), zero-filled.
    void densify_row(std::size_t r, std::span<double> out) const;

    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

private:
    std::size_t n_cols_;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> indices_;
    std::vector<double> values_;
};

/// Flat binary tree; node 0 is the root. Rows with x[feature] < threshold
/// descend left.
struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

using Tree = std::vector<TreeNode>;

double predict_tree(const Tree& tree, std::span<const double> dense_row);

/// prediction = base_score + shrinkage * sum of tree outputs
struct TreeEnsemble {
    double base_score = 0.0;
    double shrinkage = 1.0;
    std::vector<Tree> trees;
    std::size_t n_features = 0;
    std::string feature_layout_version;

    double predict_dense(std::span<const double> row) const;

    bool operator==(const TreeEnsemble&) const = default;
};

/// Throws Error(LayoutMismatch) when X.cols() differs from the fitted width.
std::vector<double> predict(const TreeEnsemble& model, const FeatureMatrix& X);

struct BoostParams {
    int n_rounds = 2000;
    double learning_rate = 0.0218;
    int max_depth = 18;
    int max_leaves = 40; // 0 = unbounded
    int max_bin = 336;   // 0 = one bin per distinct value
    double feature_fraction = 0.1532;
    double min_child_weight = 0.5822;
    double lambda_l1 = 0.0115;
    double lambda_l2 = 134.5075;
    int early_stopping_rounds = 100; // 0 disables
    std::uint64_t seed = 0;

    /// LightGBM-profile defaults found by the surrogate HPO.
    static BoostParams lgb_defaults() { return {}; }
    /// XGBoost-profile defaults; per-level column sampling folds into feature_fraction.
    static BoostParams xgb_defaults();

    void check() const;
};

struct ForestParams {
    int n_estimators = 116;
    double max_features = 0.1706; // fraction of features tried per split
    int min_samples_split = 2;
    int min_samples_leaf = 2;
    bool bootstrap = false;
    int max_depth = 0; // 0 = unbounded
    std::uint64_t seed = 0;

    void check() const;
};

/// Per-round record of a boosting run.
struct FitTrace {
    std::vector<double> train_loss; // MSE after each round
    std::vector<double> val_loss;   // index 0 = base score only, index t = after round t
    std::size_t best_n_trees = 0;
};

/// Squared-error gradient boosting with histogram splits, depth-wise growth
/// bounded by max_depth and max_leaves, per-tree feature subsampling and
/// validation early stopping. Xval may be empty (no early stopping).
TreeEnsemble fit_boosted(const FeatureMatrix& X, std::span<const double> y, const FeatureMatrix& Xval,
                         std::span<const double> yval, const BoostParams& params, FitTrace* trace = nullptr);

/// Bagged variance-reduction trees, averaged (shrinkage = 1 / n_estimators).
TreeEnsemble fit_forest(const FeatureMatrix& X, std::span<const double> y, const ForestParams& params);

// ---------------------------------------------------------------------------
// Split search, exposed for verification against exhaustive search.

/// sign(G) * max(|G| - alpha, 0)
double soft_threshold(double g, double alpha);
/// Optimal leaf output for gradient sum G and hessian sum H.
double leaf_value(double g, double h, double alpha, double lambda);

struct SplitParams {
    double lambda_l1 = 0.0;
    double lambda_l2 = 0.0;
    double min_child_weight = 0.0;
    int max_bin = 0;
};

struct SplitResult {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

/// Best root split of a single tree over all features, fitting `targets`
/// with unit weights.
SplitResult find_root_split(const FeatureMatrix& X, std::span<const double> targets, const SplitParams& params);

} // namespace surrobench

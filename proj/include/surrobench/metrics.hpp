#pragma once

#include <span>
#include <vector>

namespace surrobench {

struct GaussianSummary {
    double mean = 0.0;
    double std = 0.0;
};

/// 1 - SS_res / SS_tot. Throws DegenerateTarget when y_true is constant.
double r2(std::span<const double> y_true, std::span<const double> y_pred);

/// Kendall tau-b, (C - D) / sqrt((n0 - n1)(n0 - n2)), in O(n log n).
/// Throws AllTied when either argument has no untied pair.
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Nearest multiple of 0.001, as an integer count of thousandths.
long long round_to_permille(double accuracy);

/// Kendall tau-b after rounding accuracies to 0.1% precision. With
/// round_truth = false only predictions are rounded.
double sparse_kendall_tau(std::span<const double> y_true, std::span<const double> y_pred, bool round_truth = true);

double mae(std::span<const double> y_true, std::span<const double> y_pred);

/// KL(p || q) for univariate Gaussians; p is the groundtruth, q the prediction.
double kl_gaussian(const GaussianSummary& p, const GaussianSummary& q);

/// Two-sided Wilcoxon signed-rank p-value for paired samples. Exact for up
/// to 30 nonzero differences, normal approximation beyond.
double wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
/// n - 1 denominator; 0 for fewer than two values.
double sample_std(std::span<const double> v);
double median(std::vector<double> v);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> v, double q);

} // namespace surrobench

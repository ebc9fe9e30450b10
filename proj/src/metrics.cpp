#include "surrobench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "surrobench/error.hpp"

namespace surrobench {

namespace {

void check_paired(std::span<const double> a, std::span<const double> b, std::size_t min_n) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::InvalidArgument, "paired inputs differ in length");
    }
    if (a.size() < min_n) {
        throw Error(ErrorCode::InvalidArgument, "need at least " + std::to_string(min_n) + " paired values");
    }
}

/// Pairs tied within runs of equal keys in an already sorted range.
template <class T>
std::int64_t tied_pairs(const std::vector<T>& sorted) {
    std::int64_t ties = 0;
    std::int64_t run = 1;
    for (std::size_t i = 1; i <= sorted.size(); ++i) {
        if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
            ++run;
        } else {
            ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    return ties;
}

/// Sorts `v` ascending and returns the number of inversions removed.
template <class T>
std::int64_t merge_count(std::vector<T>& v, std::vector<T>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) {
        return 0;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
    std::size_t i = lo;
    std::size_t j = mid;
    std::size_t k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += static_cast<std::int64_t>(mid - i);
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) {
        buf[k++] = v[i++];
    }
    while (j < hi) {
        buf[k++] = v[j++];
    }
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

// Knight's algorithm over any totally ordered key type.
template <class T>
double tau_b(const std::vector<T>& x, const std::vector<T>& y) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });

    std::vector<T> xs(n);
    std::vector<std::pair<T, T>> xy(n);
    std::vector<T> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x[order[i]];
        xy[i] = {x[order[i]], y[order[i]]};
        ys[i] = y[order[i]];
    }
    const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    const std::int64_t n1 = tied_pairs(xs);
    const std::int64_t n3 = tied_pairs(xy);
    std::vector<T> buf(n);
    const std::int64_t swaps = merge_count(ys, buf, 0, n);
    const std::int64_t n2 = tied_pairs(ys);

    if (n0 == n1 || n0 == n2) {
        throw Error(ErrorCode::AllTied, "every pair is tied in at least one argument");
    }
    const double numer = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
    return numer / std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

} // namespace

double r2(std::span<const double> y_true, std::span<const double> y_pred) {
    check_paired(y_true, y_pred, 2);
    const double m = mean(y_true);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
        ss_tot += (y_true[i] - m) * (y_true[i] - m);
    }
    if (ss_tot == 0.0) {
        throw Error(ErrorCode::DegenerateTarget, "targets are constant");
    }
    return 1.0 - ss_res / ss_tot;
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    check_paired(x, y, 2);
    return tau_b(std::vector<double>(x.begin(), x.end()), std::vector<double>(y.begin(), y.end()));
}

long long round_to_permille(double accuracy) { return std::llround(accuracy * 1000.0); }

double sparse_kendall_tau(std::span<const double> y_true, std::span<const double> y_pred, bool round_truth) {
    check_paired(y_true, y_pred, 2);
    if (!round_truth) {
        std::vector<double> pred(y_pred.size());
        std::transform(y_pred.begin(), y_pred.end(), pred.begin(),
                       [](double v) { return static_cast<double>(round_to_permille(v)) / 1000.0; });
        return tau_b(std::vector<double>(y_true.begin(), y_true.end()), pred);
    }
    std::vector<long long> a(y_true.size());
    std::vector<long long> b(y_pred.size());
    std::transform(y_true.begin(), y_true.end(), a.begin(), round_to_permille);
    std::transform(y_pred.begin(), y_pred.end(), b.begin(), round_to_permille);
    return tau_b(a, b);
}

double mae(std::span<const double> y_true, std::span<const double> y_pred) {
    check_paired(y_true, y_pred, 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        sum += std::abs(y_true[i] - y_pred[i]);
    }
    return sum / static_cast<double>(y_true.size());
}

double kl_gaussian(const GaussianSummary& p, const GaussianSummary& q) {
    if (!(p.std > 0.0) || !(q.std > 0.0)) {
        throw Error(ErrorCode::ZeroVariance, "Gaussian KL needs positive standard deviations");
    }
    const double dm = p.mean - q.mean;
    return std::log(q.std / p.std) + (p.std * p.std + dm * dm) / (2.0 * q.std * q.std) - 0.5;
}

double wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
    check_paired(x, y, 1);
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != y[i]) {
            d.push_back(x[i] - y[i]);
        }
    }
    const std::size_t n = d.size();
    if (n == 0) {
        return 1.0;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
    // doubled average ranks keep tied ranks integral
    std::vector<long long> rank2(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) {
            ++j;
        }
        const long long r2sum = static_cast<long long>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) {
            rank2[order[k]] = r2sum;
        }
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    long long w2 = 0;
    long long total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total2 += rank2[i];
        if (d[i] > 0) {
            w2 += rank2[i];
        }
    }

    if (n <= 30) {
        std::vector<double> ways(static_cast<std::size_t>(total2) + 1, 0.0);
        ways[0] = 1.0;
        long long reach = 0;
        for (std::size_t i = 0; i < n; ++i) {
            reach += rank2[i];
            for (long long s = reach; s >= rank2[i]; --s) {
                ways[s] += ways[s - rank2[i]];
            }
        }
        const double all = std::ldexp(1.0, static_cast<int>(n));
        double lower = 0.0;
        double upper = 0.0;
        for (long long s = 0; s <= total2; ++s) {
            if (s <= w2) {
                lower += ways[s];
            }
            if (s >= w2) {
                upper += ways[s];
            }
        }
        return std::min(1.0, 2.0 * std::min(lower, upper) / all);
    }

    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = (static_cast<double>(w2) / 2.0 - mu) / std::sqrt(var);
    return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

double mean(std::span<const double> v) {
    if (v.empty()) {
        throw Error(ErrorCode::EmptyInput, "mean of an empty sequence");
    }
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double quantile(std::vector<double> v, double q) {
    if (v.empty()) {
        throw Error(ErrorCode::EmptyInput, "quantile of an empty sequence");
    }
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(v.size() - 1, lo + 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

} // namespace surrobench

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>

#include <boost/multiprecision/cpp_int.hpp>

#include "surrobench/dataset.hpp"
#include "surrobench/encoding.hpp"
#include "surrobench/gbtree.hpp"
#include "surrobench/harness.hpp"
#include "surrobench/metrics.hpp"
#include "surrobench/optimizers.hpp"
#include "surrobench/searchspace.hpp"
#include "surrobench/surrogate.hpp"
#include "surrobench/synth.hpp"

using namespace surrobench;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    o.require(secs < budget_s, "runtime " + fmt("%.1f", secs) + " s over " + fmt("%.0f", budget_s) + " s");
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %d (%s) [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.c_str());
    std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// Independent oracles

double brute_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    long long c = 0, d = 0, tx = 0, ty = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0 && dy == 0) {
                continue;
            }
            if (dx == 0) {
                ++tx;
            } else if (dy == 0) {
                ++ty;
            } else if ((dx > 0) == (dy > 0)) {
                ++c;
            } else {
                ++d;
            }
        }
    }
    return static_cast<double>(c - d) / std::sqrt(static_cast<double>(c + d + tx) * static_cast<double>(c + d + ty));
}

double split_score(double g, double h, double alpha, double lambda) {
    const double t = g > alpha ? g - alpha : (g < -alpha ? g + alpha : 0.0);
    return t * t / (h + lambda);
}

struct BestSplit {
    double gain = -std::numeric_limits<double>::infinity();
    double runner_up = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
};

BestSplit exhaustive_split(const std::vector<std::vector<double>>& X, const std::vector<double>& y, double alpha,
                           double lambda) {
    BestSplit best;
    const double n = static_cast<double>(y.size());
    const double G = std::accumulate(y.begin(), y.end(), 0.0);
    const double parent = split_score(G, n, alpha, lambda);
    for (std::size_t f = 0; f < X[0].size(); ++f) {
        std::vector<double> vals;
        for (const auto& row : X) {
            vals.push_back(row[f]);
        }
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            const double thr = 0.5 * (vals[i] + vals[i + 1]);
            double gl = 0.0, hl = 0.0;
            for (std::size_t r = 0; r < y.size(); ++r) {
                if (X[r][f] < thr) {
                    gl += y[r];
                    hl += 1.0;
                }
            }
            const double gain = split_score(gl, hl, alpha, lambda) + split_score(G - gl, n - hl, alpha, lambda) - parent;
            if (gain > best.gain) {
                best = {gain, best.gain, static_cast<int>(f), thr};
            } else if (gain > best.runner_up) {
                best.runner_up = gain;
            }
        }
    }
    return best;
}

FeatureMatrix noisy_additive(std::size_t n, std::uint64_t seed, std::vector<double>& y) {
    Rng rng(seed);
    std::normal_distribution<double> eps(0.0, 0.3);
    std::vector<std::vector<double>> rows;
    y.clear();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(5);
        for (auto& v : row) {
            v = uniform01(rng);
        }
        y.push_back(std::sin(3 * row[0]) + 2 * row[1] * row[1] + (row[2] > 0.5 ? 1.0 : 0.0) - row[3] + eps(rng));
        rows.push_back(row);
    }
    return FeatureMatrix::from_dense(rows);
}

// Mean target of the k nearest training genotypes under Hamming distance.
std::vector<double> knn_predict(const Dataset& train, const Dataset& test, std::size_t k) {
    auto cats = [](const Dataset& d) {
        std::vector<std::vector<int>> out;
        for (const auto& r : d.records()) {
            std::vector<int> v;
            for (const auto& dim : to_categorical(r.genotype, d.space())) {
                v.push_back(dim.value);
            }
            out.push_back(std::move(v));
        }
        return out;
    };
    const auto a = cats(train);
    const auto b = cats(test);
    std::vector<double> pred;
    std::vector<std::pair<int, std::size_t>> dist(a.size());
    for (const auto& q : b) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            int h = 0;
            for (std::size_t d = 0; d < q.size(); ++d) {
                h += a[i][d] != q[d] ? 1 : 0;
            }
            dist[i] = {h, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            s += train[dist[j].second].val_acc;
        }
        pred.push_back(s / static_cast<double>(k));
    }
    return pred;
}

std::vector<double> column(const Dataset& d) {
    std::vector<double> y;
    for (const auto& r : d.records()) {
        y.push_back(r.val_acc);
    }
    return y;
}

// ---------------------------------------------------------------------------
// Shared benchmark for criteria 7 to 10

OracleConfig main_oracle_config() {
    OracleConfig c;
    c.seed = 7;
    c.noise_std = 1.7e-3;
    return c;
}

struct Shared {
    std::optional<SyntheticOracle> oracle;
    std::optional<SurrogateBenchmark> bench;
    Dataset repeats;
};

Shared shared;

// ---------------------------------------------------------------------------

void c1(Outcome& o) {
    using boost::multiprecision::cpp_int;
    const auto c = count_space(SpaceConfig{});
    cpp_int topo = 1;
    for (int k = 1; k <= 4; ++k) {
        topo *= cpp_int((k + 1) * k / 2);
    }
    cpp_int per_cell = topo;
    for (int e = 0; e < 8; ++e) {
        per_cell *= 7;
    }
    o.require(c.topologies_per_cell == 180 && topo == 180, "180 topologies per cell");
    o.require(c.genotypes_per_cell == cpp_int(1037664180) && per_cell == c.genotypes_per_cell,
              "1,037,664,180 genotypes per cell");
    o.require(c.total == per_cell * per_cell, "total equals per-cell squared");
    o.require(c.total > cpp_int("1000000000000000000"), "total above 10^18");

    const SpaceConfig n1 = reduced_space(1, 7);
    o.require(enumerate_topologies(n1).size() == 1 && count_space(n1).topologies_per_cell == 1, "n=1 has one topology");
    o.require(enumerate_cells(n1).size() == 49 && count_space(n1).genotypes_per_cell == 49, "n=1 cells by enumeration");
    const SpaceConfig n2 = reduced_space(2, 3);
    o.require(enumerate_cells(n2).size() == 3 * 81 && count_space(n2).genotypes_per_cell == 243,
              "n=2 with 3 ops has 3*81 cells");
    o.require(enumerate_genotypes(n2).size() == 59049 && count_space(n2).total == 59049, "n=2 with 3 ops total");
    o.note("total " + c.total.str());
}

void c2(Outcome& o) {
    OracleConfig oc;
    oc.seed = 11;
    oc.space = reduced_space(2, 3);
    oc.noise_std = 4.6e-3;
    SmoothingConfig sc;
    sc.K = 10;
    BoostParams p;
    p.learning_rate = 0.1;
    const auto rep = run_smoothing_experiment(SyntheticOracle(oc), sc, p, 5);
    const double tab = rep.metrics.at("mae_tabular").get<double>();
    const double sur = rep.metrics.at("mae_surrogate").get<double>();
    const double analytic = 4.6e-3 * std::sqrt(1.5) * std::sqrt(2.0 / M_PI);
    o.require(std::abs(tab / analytic - 1.0) < 0.10, "tabular MAE within 10% of analytic");
    o.require(sur <= 0.85 * tab, "surrogate MAE <= 0.85 x tabular");
    o.note("tabular " + fmt("%.4g", tab) + ", analytic " + fmt("%.4g", analytic) + ", surrogate " + fmt("%.4g", sur));
}

void c3(Outcome& o) {
    const SyntheticOracle oracle(main_oracle_config());
    const Dataset ds = generate_dataset(oracle, {{"RS", 20'000}}, 1);
    const auto rep = run_datafit_eval(ds, BoostParams::lgb_defaults(), SplitSpec{});
    const auto& test = rep.metrics.at("test");
    const double r2v = test.at("r2").get<double>();
    const double skt = test.at("skt").get<double>();
    o.require(skt >= 0.75, "test sKT >= 0.75");
    o.require(r2v >= 0.80, "test R2 >= 0.80");
    o.note("test R2 " + fmt("%.3f", r2v) + ", sKT " + fmt("%.3f", skt) + ", n " + test.at("n").dump());

    const auto parts = stratified_split(ds, SplitSpec{});
    const auto y = column(parts.test);
    const auto knn = knn_predict(parts.train, parts.test, 10);
    o.note("10-NN baseline R2 " + fmt("%.3f", r2(y, knn)) + ", sKT " + fmt("%.3f", sparse_kendall_tau(y, knn)));
}

void c4(Outcome& o) {
    Rng rng(2024);
    int tau_ok = 0, skt_ok = 0, r2_ok = 0, mae_ok = 0, kl_ok = 0, n = 0;
    for (int trial = 0; trial < 1200; ++trial) {
        const std::size_t len = 3 + uniform_index(rng, 30);
        std::vector<double> a(len), b(len);
        for (std::size_t i = 0; i < len; ++i) {
            a[i] = 0.9 + 0.02 * uniform01(rng);
            b[i] = a[i] + 0.005 * (uniform01(rng) - 0.5);
            if (trial % 4 == 0) {
                b[i] = std::round(b[i] * 200.0) / 200.0; // ties
            }
        }
        ++n;
        const double want_tau = brute_tau_b(a, b);
        tau_ok += std::isfinite(want_tau) && std::abs(kendall_tau(a, b) - want_tau) < 1e-12 ? 1 : 0;

        std::vector<double> ra, rb;
        for (std::size_t i = 0; i < len; ++i) {
            ra.push_back(std::round(a[i] * 1000.0));
            rb.push_back(std::round(b[i] * 1000.0));
        }
        const double want_skt = brute_tau_b(ra, rb);
        if (std::isfinite(want_skt)) {
            skt_ok += std::abs(sparse_kendall_tau(a, b) - want_skt) < 1e-12 ? 1 : 0;
        } else {
            ++skt_ok; // all-tied rounding is reported as an error, checked below
        }

        const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(len);
        double ss_res = 0.0, ss_tot = 0.0, abs_sum = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            ss_res += (a[i] - b[i]) * (a[i] - b[i]);
            ss_tot += (a[i] - ma) * (a[i] - ma);
            abs_sum += std::abs(a[i] - b[i]);
        }
        r2_ok += std::abs(r2(a, b) - (1.0 - ss_res / ss_tot)) < 1e-9 ? 1 : 0;
        mae_ok += std::abs(mae(a, b) - abs_sum / static_cast<double>(len)) < 1e-15 ? 1 : 0;

        const GaussianSummary p{uniform01(rng), 0.01 + uniform01(rng)};
        const GaussianSummary q{uniform01(rng), 0.01 + uniform01(rng)};
        const double closed = std::log(q.std / p.std) +
                              (p.std * p.std + (p.mean - q.mean) * (p.mean - q.mean)) / (2 * q.std * q.std) - 0.5;
        kl_ok += std::abs(kl_gaussian(p, q) - closed) <= 1e-12 * std::max(1.0, closed) ? 1 : 0;
    }
    o.require(tau_ok == n, "tau-b vs pair enumeration");
    o.require(skt_ok == n, "sparse tau vs pair enumeration");
    o.require(r2_ok == n, "R2 vs closed form");
    o.require(mae_ok == n, "MAE vs direct sum");
    o.require(kl_ok == n, "KL vs closed form");
    o.require(std::abs(kl_gaussian({0, 1}, {1, 1}) - 0.5) < 1e-12, "KL(N(0,1)||N(1,1)) = 0.5");
    o.note(std::to_string(n) + " random vectors per metric");
}

void c5(Outcome& o) {
    Rng rng(5);
    int agree = 0, compared = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 63);
        const std::size_t d = 1 + uniform_index(rng, 4);
        std::vector<std::vector<double>> X(n, std::vector<double>(d));
        std::vector<double> y(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (auto& v : X[r]) {
                v = trial % 2 == 0 ? static_cast<double>(uniform_index(rng, 5)) : uniform01(rng);
            }
            y[r] = uniform01(rng) * 2 - 1;
        }
        SplitParams sp;
        sp.lambda_l1 = trial % 3 == 0 ? 0.05 : 0.0;
        sp.lambda_l2 = trial % 4 == 0 ? 2.0 : 0.0;
        sp.max_bin = 64;
        const auto got = find_root_split(FeatureMatrix::from_dense(X), y, sp);
        const auto want = exhaustive_split(X, y, sp.lambda_l1, sp.lambda_l2);
        ++compared;
        if (!(want.gain > 1e-12)) {
            agree += got.found ? 0 : 1;
            continue;
        }
        const bool gain_ok = got.found && std::abs(got.gain - want.gain) <= 1e-9 * std::max(1.0, want.gain);
        const bool unique = want.gain - want.runner_up > 1e-9;
        const bool where_ok =
            !unique || (got.feature == want.feature && std::abs(got.threshold - want.threshold) < 1e-12);
        agree += gain_ok && where_ok ? 1 : 0;
    }
    o.require(agree == compared, "split finder equals exhaustive search (" + std::to_string(agree) + "/" +
                                     std::to_string(compared) + ")");

    std::vector<double> y, yval;
    const auto X = noisy_additive(400, 1, y);
    const auto Xval = noisy_additive(200, 2, yval);
    BoostParams p;
    p.lambda_l1 = 0.0;
    p.learning_rate = 0.3;
    p.n_rounds = 200;
    p.early_stopping_rounds = 0;
    FitTrace trace;
    fit_boosted(X, y, FeatureMatrix(5), {}, p, &trace);
    bool monotone = trace.train_loss.size() == 200;
    for (std::size_t t = 1; t < trace.train_loss.size(); ++t) {
        monotone = monotone && trace.train_loss[t] <= trace.train_loss[t - 1] + 1e-15;
    }
    o.require(monotone, "training loss monotone with alpha = 0");

    BoostParams es;
    es.learning_rate = 0.5;
    es.feature_fraction = 1.0;
    es.lambda_l2 = 0.0;
    es.max_leaves = 0;
    es.max_depth = 8;
    es.min_child_weight = 0.0;
    es.n_rounds = 500;
    es.early_stopping_rounds = 20;
    FitTrace et;
    const auto m = fit_boosted(X, y, Xval, yval, es, &et);
    const auto best = static_cast<std::size_t>(std::min_element(et.val_loss.begin(), et.val_loss.end()) -
                                               et.val_loss.begin());
    o.require(best == et.best_n_trees && m.trees.size() == best && et.val_loss.size() < 501,
              "early stopping keeps the best validation round");

    const double mu = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double max_g = 0.0;
    for (double v : y) {
        max_g += std::abs(v - mu); // bounds |G| of every node
    }
    BoostParams l1;
    l1.lambda_l1 = max_g;
    l1.n_rounds = 20;
    l1.early_stopping_rounds = 0;
    bool zero = true;
    for (const auto& t : fit_boosted(X, y, FeatureMatrix(5), {}, l1).trees) {
        for (const auto& node : t) {
            zero = zero && (!node.is_leaf() || node.value == 0.0);
        }
    }
    o.require(zero && soft_threshold(0.3, 0.3) == 0.0 && soft_threshold(-1.0, 2.0) == 0.0,
              "soft threshold zeroes leaves for alpha >= max|G|");
    o.note("best round " + std::to_string(best));
}

void c6(Outcome& o) {
    const SyntheticOracle oracle(main_oracle_config());
    const Dataset ds = generate_dataset(oracle, {{"RS", 600}, {"RE", 600}, {"DE", 600}}, 3);
    for (const std::string tag : {"RS", "RE", "DE"}) {
        const auto part = loo_partition(ds, tag);
        std::unordered_set<std::string> held;
        for (const auto& r : part.held_out.records()) {
            held.insert(genotype_key(r.genotype));
            o.require(r.optimizer == tag, "held-out rows carry the left-out tag");
        }
        std::size_t leaks = 0;
        for (const auto& r : part.train_val.records()) {
            leaks += held.count(genotype_key(r.genotype)) + (r.optimizer == tag ? 1 : 0);
        }
        o.require(leaks == 0, "no held-out genotype in training for " + tag);
        o.require(part.held_out.size() == 600, "every " + tag + " row held out");
    }
    BoostParams p;
    p.learning_rate = 0.1;
    p.n_rounds = 400;
    const auto rep = run_loo_eval(ds, p, 1);
    std::multiset<std::string> tags;
    for (const auto& row : rep.metrics.at("rows")) {
        tags.insert(row.at("left_out").get<std::string>());
    }
    o.require(tags == std::multiset<std::string>{"DE", "RE", "RS"}, "one report row per tag");
    for (const auto& row : rep.metrics.at("rows")) {
        o.note(row.at("left_out").get<std::string>() + " sKT " + fmt("%.3f", row.at("skt").get<double>()));
    }
}

void c7(Outcome& o) {
    shared.oracle.emplace(main_oracle_config());
    const SyntheticOracle& oracle = *shared.oracle;
    const Dataset background = generate_dataset(oracle, {{"RS", 20'000}}, 1);
    Rng rng(3);
    std::vector<Genotype> gs;
    std::unordered_set<std::string> seen;
    while (gs.size() < 500) {
        Genotype g = sample_uniform(rng, oracle.space());
        if (seen.insert(genotype_key(g)).second) {
            gs.push_back(std::move(g));
        }
    }
    shared.repeats = generate_repeats(oracle, gs, 5, 9);
    shared.bench.emplace(fit_for_noise_report(background, shared.repeats, BoostParams::lgb_defaults(), 10));
    const NoiseReport rep = noise_report(*shared.bench, shared.repeats);
    o.require(rep.rows.size() == 500, "500 genotypes scored");
    o.require(std::abs(rep.mean_truth_std / 1.7e-3 - 1.0) < 0.10, "groundtruth mean sigma within 10% of 1.7e-3");
    o.require(rep.mae_surrogate < rep.mae_tabular, "surrogate MAE below tabular MAE");
    o.require(rep.all_kl_finite, "KL finite for every genotype");
    o.note("truth sigma " + fmt("%.4g", rep.mean_truth_std) + ", MAE surrogate " + fmt("%.4g", rep.mae_surrogate) +
           " vs tabular " + fmt("%.4g", rep.mae_tabular) + ", mean KL " + fmt("%.3g", rep.mean_kl));
}

void c8(Outcome& o) {
    if (!shared.bench) {
        throw std::runtime_error("benchmark from criterion 7 unavailable");
    }
    const auto res = run_benchmark_suite(*shared.bench, {"RS", "RE", "BANANAS"}, 2000, 12, 42, 1);
    auto finals = [&](const std::string& tag) {
        std::vector<double> v;
        for (const auto& t : res.trajectories.at(tag)) {
            v.push_back(t.final_incumbent());
        }
        return v;
    };
    const auto rs = finals("RS");
    const auto re = finals("RE");
    const auto bo = finals("BANANAS");
    const double p_re = wilcoxon_signed_rank(re, rs);
    const double p_bo = wilcoxon_signed_rank(bo, rs);
    o.require(median(re) < median(rs), "median RE < RS");
    o.require(median(bo) < median(rs), "median BANANAS-lite < RS");
    o.require(p_re < 0.05 && p_bo < 0.05, "Wilcoxon p < 0.05");
    o.note("medians RS " + fmt("%.4f", median(rs)) + ", RE " + fmt("%.4f", median(re)) + ", BANANAS " +
           fmt("%.4f", median(bo)) + "; p " + fmt("%.3g", p_re) + " / " + fmt("%.3g", p_bo));

    // random search on the exhaustive space: hit time of the optimum
    OracleConfig small = main_oracle_config();
    small.space = reduced_space(2, 3);
    small.noise_std = 0.0;
    const SyntheticOracle quiet(small);
    const auto all = enumerate_genotypes(small.space);
    const Genotype best = *std::max_element(all.begin(), all.end(), [&](const Genotype& a, const Genotype& b) {
        return quiet.truth(a) < quiet.truth(b);
    });
    // a run stops once the optimum is evaluated; later draws cannot change its hit index
    struct OptimumFound {
        std::size_t at;
    };
    std::vector<double> hits;
    for (int run = 0; run < 401; ++run) {
        std::size_t count = 0;
        FunctionObjective obj(small.space, [&](const Genotype& g) {
            ++count;
            if (g == best) {
                throw OptimumFound{count};
            }
            return Evaluation{1.0 - quiet.truth(g), 1.0};
        });
        Rng rng = make_rng(static_cast<std::uint64_t>(run), "rs-hit");
        try {
            run_rs(obj, RsConfig{all.size(), true}, rng);
        } catch (const OptimumFound& found) {
            hits.push_back(static_cast<double>(found.at));
        }
    }
    const double half = static_cast<double>(all.size()) / 2.0;
    o.require(hits.size() == 401, "RS finds the optimum in every run");
    o.require(!hits.empty() && std::abs(median(hits) / half - 1.0) <= 0.15, "median hit within 15% of |space|/2");
    o.note("median RS hit " + fmt("%.0f", hits.empty() ? 0.0 : median(hits)) + " of " + std::to_string(all.size()));
}

void c9(Outcome& o) {
    if (!shared.bench) {
        throw std::runtime_error("benchmark from criterion 7 unavailable");
    }
    const SurrogateBenchmark& b = *shared.bench;
    const auto t0 = Clock::now();
    const auto first = run_benchmark_suite(b, {"RS", "RE", "DE", "TPE", "BANANAS", "LS"}, 150, 2, 77, 1);
    const auto second = run_benchmark_suite(b, {"RS", "RE", "DE", "TPE", "BANANAS", "LS"}, 150, 2, 77, 1);
    o.note("suites " + fmt("%.1f", std::chrono::duration<double>(Clock::now() - t0).count()) + " s");
    std::size_t traj = 0;
    for (const auto& [name, csv] : first.report.csv) {
        traj += name.rfind("traj_", 0) == 0 ? 1 : 0;
    }
    o.require(traj == 12 && first.report.csv == second.report.csv, "byte-identical trajectory CSVs on rerun");

    const auto path = std::filesystem::temp_directory_path() / "surrobench_acceptance_model.json";
    save(b, path);
    const SurrogateBenchmark back = load(path);
    std::filesystem::remove(path);
    Rng rng(99);
    std::vector<Genotype> gs;
    for (int i = 0; i < 1000; ++i) {
        gs.push_back(sample_uniform(rng, b.space));
    }
    const auto before = query_batch(b, gs);
    const auto after = query_batch(back, gs);
    std::size_t same = 0;
    for (std::size_t i = 0; i < gs.size(); ++i) {
        same += before[i].mean_acc == after[i].mean_acc && before[i].std_acc == after[i].std_acc &&
                        before[i].runtime_s == after[i].runtime_s
                    ? 1
                    : 0;
    }
    o.require(same == gs.size() && member_predictions(b, gs) == member_predictions(back, gs),
              "save/load reproduces 1000 predictions bit-exactly");
    o.note(std::to_string(traj) + " trajectories compared, " + std::to_string(same) + " predictions identical");
}

void c10(Outcome& o) {
    if (!shared.bench) {
        throw std::runtime_error("benchmark from criterion 7 unavailable");
    }
    std::vector<Genotype> gs;
    for (const auto& group : shared.repeats.groups()) {
        gs.push_back(shared.repeats[group.front()].genotype);
    }
    gs.resize(200);
    const std::vector<Op> ops = {Op::MaxPool3x3, Op::AvgPool3x3, Op::SkipConnect};
    const auto rep = run_paramfree_sweep(*shared.bench, gs, {0.0, 1.0}, ops, 1, 13);
    std::map<std::pair<std::string, std::string>, std::vector<double>> errs;
    std::istringstream in(rep.csv.at("paramfree.csv"));
    std::string line;
    std::getline(in, line); // genotype_index,ratio,op,repeat,pred_error
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        errs[{f[2], std::stod(f[1]) == 0.0 ? "0" : "1"}].push_back(std::stod(f[4]));
    }
    for (Op op : ops) {
        const std::string tag(to_string(op));
        const double at0 = median(errs.at({tag, "0"}));
        const double at1 = median(errs.at({tag, "1"}));
        o.require(at1 > at0, tag + " error rises at ratio 1");
        o.note(tag + " " + fmt("%.4f", at0) + " -> " + fmt("%.4f", at1));
    }
}

} // namespace

// With arguments, runs only the listed criteria (7 runs whenever 8, 9 or 10 is listed).
int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::atoi(argv[i]));
    }
    const bool needs_bench = only.count(8) + only.count(9) + only.count(10) > 0;
    auto wanted = [&](int id) { return only.empty() || only.count(id) > 0 || (id == 7 && needs_bench); };
    int ran = 0;
    auto run = [&](int id, const char* title, double budget_s, void (*body)(Outcome&)) {
        if (wanted(id)) {
            criterion(id, title, budget_s, body);
            ++ran;
        }
    };
    run(1, "space counting", 1.0, c1);
    run(2, "smoothing", 300.0, c2);
    run(3, "data fit", 600.0, c3);
    run(4, "metrics", 10.0, c4);
    run(5, "tree engine", 30.0, c5);
    run(6, "leave-one-optimizer-out", 60.0, c6);
    run(7, "noise modelling", 300.0, c7);
    run(8, "optimizers", 900.0, c8);
    run(9, "determinism", 60.0, c9);
    run(10, "parameter-free sweep", 120.0, c10);
    std::printf("%s: %d of %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures, ran);
    return failures == 0 ? 0 : 1;
}

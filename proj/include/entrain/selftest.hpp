#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "entrain/prng.hpp"
#include "entrain/stats.hpp"
#include "entrain/synth.hpp"

namespace entrain::selftest {

// Built-in oracle suite: each statistical kernel is re-derived by an
// independent route (enumeration, brute-force counting, closed forms) and
// compared against the implementation. The kernels are injectable so a
// perturbed implementation can be shown to trip the checks.

using MwuFn =
    std::function<stats::StatTestResult(std::span<const double>, std::span<const double>)>;
using CliffsFn =
    std::function<double(std::span<const double>, std::span<const double>)>;

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline double enumerate_mwu_p(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n1 = x.size(), n = n1 + y.size();
    std::vector<double> pooled(x);
    pooled.insert(pooled.end(), y.begin(), y.end());
    const long long n1n2 = static_cast<long long>(n1) * static_cast<long long>(y.size());
    auto u_of = [&](const std::vector<bool>& in_x) {
        long long u = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (in_x[i])
                for (std::size_t j = 0; j < n; ++j)
                    if (!in_x[j] && pooled[i] > pooled[j]) ++u;
        return u;
    };
    std::vector<bool> obs(n, false);
    for (std::size_t i = 0; i < n1; ++i) obs[i] = true;
    const long long dev_obs = std::llabs(2 * u_of(obs) - n1n2);
    std::vector<bool> mask(n, false);
    std::fill(mask.end() - static_cast<long>(n1), mask.end(), true);
    long long hits = 0, total = 0;
    do {
        ++total;
        if (std::llabs(2 * u_of(mask) - n1n2) >= dev_obs) ++hits;
    } while (std::next_permutation(mask.begin(), mask.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
}

inline double brute_cliffs(const std::vector<double>& x, const std::vector<double>& y) {
    long long gt = 0, lt = 0;
    for (double a : x)
        for (double b : y) {
            if (a > b) ++gt;
            else if (a < b) ++lt;
        }
    return static_cast<double>(gt - lt) /
           (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

} // namespace detail

/// Run the statistical oracle suite against the given kernels (defaults:
/// the shipped implementations).
inline std::vector<CheckResult> stats_oracles(MwuFn mwu = {}, CliffsFn cliffs = {}) {
    if (!mwu)
        mwu = [](std::span<const double> a, std::span<const double> b) {
            return stats::mann_whitney_u(a, b);
        };
    if (!cliffs)
        cliffs = [](std::span<const double> a, std::span<const double> b) {
            return stats::cliffs_delta(a, b);
        };
    std::vector<CheckResult> out;
    char buf[160];

    {
        CheckResult c{"mann-whitney exact p vs enumeration", true, ""};
        auto stream = rng::Xoshiro256(811);
        double worst = 0.0;
        for (int trial = 0; trial < 100 && c.pass; ++trial) {
            const std::size_t n1 = 1 + stream.bounded(7);
            const std::size_t n2 = 1 + stream.bounded(7);
            if (n1 + n2 > 10) continue;
            std::vector<double> x(n1), y(n2);
            for (auto& v : x) v = stream.uniform01();
            for (auto& v : y) v = stream.uniform01();
            const double mine = mwu(x, y).p;
            const double ref = detail::enumerate_mwu_p(x, y);
            worst = std::max(worst, std::fabs(mine - ref));
            if (std::fabs(mine - ref) > 1e-12) c.pass = false;
        }
        std::snprintf(buf, sizeof(buf), "max |p - p_enum| = %.2e", worst);
        c.detail = buf;
        out.push_back(c);
    }
    {
        CheckResult c{"mann-whitney frozen case U=0, p=1/3", true, ""};
        const std::vector<double> x{1, 2}, y{3, 4};
        const auto r = mwu(x, y);
        c.pass = r.statistic == 0.0 && std::fabs(r.p - 1.0 / 3.0) < 1e-12;
        std::snprintf(buf, sizeof(buf), "U = %.1f, p = %.6f", r.statistic, r.p);
        c.detail = buf;
        out.push_back(c);
    }
    {
        CheckResult c{"cliffs delta vs brute-force dominance count", true, ""};
        auto stream = rng::Xoshiro256(812);
        for (int trial = 0; trial < 100 && c.pass; ++trial) {
            std::vector<double> x(1 + stream.bounded(40)), y(1 + stream.bounded(40));
            for (auto& v : x) v = std::round(4.0 * stream.normal());
            for (auto& v : y) v = std::round(4.0 * stream.normal());
            if (cliffs(x, y) != detail::brute_cliffs(x, y)) c.pass = false;
        }
        c.detail = c.pass ? "exact match on 100 seeded pairs" : "mismatch";
        out.push_back(c);
    }
    {
        CheckResult c{"welch t frozen quadruples", true, ""};
        const std::vector<double> x{1, 2, 3, 4}, y{2, 3, 4, 5};
        const auto r = stats::welch_t(x, y);
        c.pass = std::fabs(r.statistic + 1.0954451150103321) < 1e-9 &&
                 std::fabs(*r.df - 6.0) < 1e-9 && std::fabs(r.p - 0.3149) < 5e-3;
        std::snprintf(buf, sizeof(buf), "t = %.6f, df = %.2f, p = %.4f", r.statistic,
                      *r.df, r.p);
        c.detail = buf;
        out.push_back(c);
    }
    {
        CheckResult c{"paired t closed form d=[1,2,3]", true, ""};
        const std::vector<double> x{1, 2, 3}, zero{0, 0, 0};
        const auto r = stats::paired_t(x, zero);
        c.pass = std::fabs(r.statistic - 2.0 * std::sqrt(3.0)) < 1e-12 &&
                 std::fabs(r.p - 0.0742) < 5e-3;
        std::snprintf(buf, sizeof(buf), "t = %.6f, p = %.4f", r.statistic, r.p);
        c.detail = buf;
        out.push_back(c);
    }
    {
        CheckResult c{"fisher z closed forms and oddness", true, ""};
        c.pass = std::fabs(stats::fisher_z(0.5) - 0.5 * std::log(3.0)) < 1e-12 &&
                 std::fabs(stats::fisher_z(1.0) - 0.5 * std::log((2.0 - 1e-6) / 1e-6)) <
                     1e-9 &&
                 stats::fisher_z(-0.73) == -stats::fisher_z(0.73);
        c.detail = "atanh identities";
        out.push_back(c);
    }
    {
        CheckResult c{"bh-fdr step-up hand case", true, ""};
        const std::vector<double> p{0.01, 0.02, 0.04};
        const auto q = stats::bh_fdr(p);
        c.pass = std::fabs(q[0] - 0.03) < 1e-15 && std::fabs(q[1] - 0.03) < 1e-15 &&
                 std::fabs(q[2] - 0.04) < 1e-15;
        std::snprintf(buf, sizeof(buf), "q = [%.3f, %.3f, %.3f]", q[0], q[1], q[2]);
        c.detail = buf;
        out.push_back(c);
    }
    {
        CheckResult c{"shapiro-wilk null p near uniform", true, ""};
        auto stream = rng::Xoshiro256(813);
        double sum = 0.0;
        const int n_seeds = 200;
        for (int s = 0; s < n_seeds; ++s) {
            std::vector<double> x(50);
            for (auto& v : x) v = stream.normal();
            sum += stats::shapiro_wilk(x).p;
        }
        const double mean_p = sum / n_seeds;
        c.pass = mean_p > 0.4 && mean_p < 0.6;
        std::snprintf(buf, sizeof(buf), "mean null p = %.3f over %d seeds", mean_p,
                      n_seeds);
        c.detail = buf;
        out.push_back(c);
    }
    {
        CheckResult c{"pca reconstructs the standardized matrix", true, ""};
        auto stream = rng::Xoshiro256(814);
        stats::Matrix data(30, 5);
        for (std::size_t i = 0; i < 30; ++i)
            for (std::size_t j = 0; j < 5; ++j) data(i, j) = stream.normal();
        const auto r = stats::pca(data, 5);
        double worst = 0.0;
        for (std::size_t i = 0; i < 30; ++i) {
            for (std::size_t j = 0; j < 5; ++j) {
                double rec = 0.0;
                for (std::size_t k = 0; k < 5; ++k)
                    rec += r.scores(i, k) * r.components(j, k);
                const double z = (data(i, j) - r.column_means[j]) / r.column_sds[j];
                worst = std::max(worst, std::fabs(rec - z));
            }
        }
        c.pass = worst < 1e-8;
        std::snprintf(buf, sizeof(buf), "max |reconstruction error| = %.2e", worst);
        c.detail = buf;
        out.push_back(c);
    }
    return out;
}

/// Print one pass/fail line per check; returns 0 on success, 1 on any
/// failure, 2 when nothing was run.
inline int run_selftest(std::ostream& os, bool with_stats = true, int synth_seeds = 60,
                        std::uint64_t seed = 20240808, MwuFn mwu = {},
                        CliffsFn cliffs = {}) {
    bool ran_anything = false;
    bool all_pass = true;
    if (with_stats) {
        ran_anything = true;
        for (const auto& c : stats_oracles(mwu, cliffs)) {
            os << (c.pass ? "[ ok ] " : "[FAIL] ") << c.name << " -- " << c.detail
               << "\n";
            all_pass = all_pass && c.pass;
        }
    }
    if (synth_seeds > 0) {
        ran_anything = true;
        const auto report = synth::oracle_report(seed, synth_seeds);
        for (const auto& c : report.checks) {
            os << (c.pass ? "[ ok ] " : "[FAIL] ") << c.name << " -- " << c.detail
               << "\n";
            all_pass = all_pass && c.pass;
        }
    }
    if (!ran_anything) {
        os << "nothing to check\n";
        return 2;
    }
    return all_pass ? 0 : 1;
}

} // namespace entrain::selftest

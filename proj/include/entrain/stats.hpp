#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entrain/error.hpp"

namespace entrain::stats {

// ---------------------------------------------------------------------------
// special functions
// ---------------------------------------------------------------------------

/// Standard normal CDF.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

/// Two-sided normal tail probability for a z statistic.
inline double normal_two_sided_p(double z) {
    return std::erfc(std::fabs(z) * 0.7071067811865475244);
}

/// Inverse standard normal CDF. Acklam's rational approximation followed
/// by one Halley refinement against erfc; absolute error below 1e-14 on
/// (1e-300, 1 - 1e-16).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorCode::OutOfRangeP, "normal_quantile requires p in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    // Halley refinement
    const double e = normal_cdf(x) - p;
    const double u = e * 2.5066282746310002 * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

namespace detail {

/// Continued fraction for the regularized incomplete beta, modified
/// Lentz. Converges to relative error ~1e-15 for the t-test arguments
/// used here.
inline double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 1e-15;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

/// Two-sided p for a Student-t statistic with df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) return 1.0;
    if (!std::isfinite(t)) return 0.0;
    return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

// ---------------------------------------------------------------------------
// sample helpers
// ---------------------------------------------------------------------------

inline double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Sample variance (n - 1 denominator); 0 for n < 2.
inline double sample_variance(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) {
        const double d = v - m;
        ss += d * d;
    }
    return ss / static_cast<double>(n - 1);
}

inline double sample_sd(std::span<const double> x) {
    return std::sqrt(sample_variance(x));
}

/// Midranks of the pooled sample, ties averaged.
inline std::vector<double> midranks(std::span<const double> pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

// ---------------------------------------------------------------------------
// test results
// ---------------------------------------------------------------------------

enum class TestKind { mann_whitney, welch_t, paired_t, shapiro_wilk };

struct GroupSummary {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};

struct StatTestResult {
    TestKind kind;
    double statistic = 0.0;             // U, t or W
    std::optional<double> z;
    std::optional<double> df;
    double p = 1.0;
    std::optional<GroupSummary> group1;
    std::optional<GroupSummary> group2;
    bool exact = false;                 // exact enumeration path (MWU only)
};

inline GroupSummary summarize_group(std::span<const double> x) {
    return GroupSummary{mean(x), sample_sd(x), x.size()};
}

// ---------------------------------------------------------------------------
// Mann-Whitney U
// ---------------------------------------------------------------------------

namespace detail {

/// Exact null distribution of U for sample sizes (n1, n2), tie-free.
/// count[u] = number of labelings with that U; classic recurrence
/// f(u; n1, n2) = f(u - n2; n1 - 1, n2) + f(u; n1, n2 - 1).
inline std::vector<double> mwu_exact_distribution(std::size_t n1, std::size_t n2) {
    // memoized over (i, j); f(i, j)[u] = #labelings of i xs and j ys with U = u.
    // Splitting on whether the largest pooled value is an x (beats all j ys,
    // contributing +j) or a y (contributes 0) gives
    //   f(i, j)[u] = f(i-1, j)[u - j] + f(i, j-1)[u].
    std::vector<std::vector<std::vector<double>>> memo(
        n1 + 1, std::vector<std::vector<double>>(n2 + 1));
    auto f = [&](auto&& self, std::size_t i, std::size_t j) -> const std::vector<double>& {
        auto& slot = memo[i][j];
        if (!slot.empty()) return slot;
        slot.assign(i * j + 1, 0.0);
        if (i == 0 || j == 0) {
            slot[0] = 1.0;
            return slot;
        }
        const auto& a = self(self, i - 1, j);
        const auto& b = self(self, i, j - 1);
        for (std::size_t u = 0; u <= i * j; ++u) {
            double v = 0.0;
            if (u >= j && u - j <= (i - 1) * j) v += a[u - j];
            if (u <= i * (j - 1)) v += b[u];
            slot[u] = v;
        }
        return slot;
    };
    return f(f, n1, n2);
}

} // namespace detail

inline constexpr std::size_t kMwuExactMax = 16;

/// Two-sample Mann-Whitney U. U is computed for x (via its rank sum);
/// exact two-sided p by full enumeration of the null distribution when
/// n1 + n2 <= 16 and the pooled sample is tie-free, otherwise the normal
/// approximation with tie-corrected variance and 0.5 continuity
/// correction. z always carries the sign of U - n1*n2/2.
inline StatTestResult mann_whitney_u(std::span<const double> x,
                                     std::span<const double> y) {
    const std::size_t n1 = x.size(), n2 = y.size();
    if (n1 == 0 || n2 == 0)
        throw Error(ErrorCode::EmptySample, "mann_whitney_u needs non-empty samples");

    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    const auto ranks = midranks(pooled);

    double r1 = 0.0;
    for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
    const double u_stat = r1 - 0.5 * static_cast<double>(n1) * (n1 + 1);

    // tie structure over the pooled sample
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    bool ties = false;
    double tie_term = 0.0;  // sum of t^3 - t over tie groups
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        if (t > 1.0) {
            ties = true;
            tie_term += t * t * t - t;
        }
        i = j + 1;
    }

    const double n = static_cast<double>(n1 + n2);
    const double mu = 0.5 * static_cast<double>(n1) * static_cast<double>(n2);
    const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                       ((n + 1.0) - tie_term / (n * (n - 1.0)));

    StatTestResult res;
    res.kind = TestKind::mann_whitney;
    res.statistic = u_stat;
    res.group1 = summarize_group(x);
    res.group2 = summarize_group(y);

    // z with continuity correction, sign of (U - mu)
    double z = 0.0;
    if (var > 0.0) {
        const double diff = u_stat - mu;
        if (diff > 0.0) z = (diff - 0.5) / std::sqrt(var);
        else if (diff < 0.0) z = (diff + 0.5) / std::sqrt(var);
    }
    res.z = z;

    if (n1 + n2 <= kMwuExactMax && !ties) {
        const auto dist = detail::mwu_exact_distribution(n1, n2);
        // U is integral here; compare twice the deviation in exact integers
        const long long u_obs = std::llround(u_stat);
        const long long n1n2 = static_cast<long long>(n1) * static_cast<long long>(n2);
        const long long dev_obs = std::llabs(2 * u_obs - n1n2);
        double count = 0.0, total = 0.0;
        for (std::size_t u = 0; u < dist.size(); ++u) {
            total += dist[u];
            const long long dev = std::llabs(2 * static_cast<long long>(u) - n1n2);
            if (dev >= dev_obs) count += dist[u];
        }
        res.p = count / total;
        res.exact = true;
    } else {
        res.p = (var > 0.0) ? normal_two_sided_p(z) : 1.0;
    }
    res.p = std::min(res.p, 1.0);
    return res;
}

// ---------------------------------------------------------------------------
// t tests
// ---------------------------------------------------------------------------

/// Welch's unequal-variance t-test with Welch-Satterthwaite df.
inline StatTestResult welch_t(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 2 || y.size() < 2)
        throw Error(ErrorCode::EmptySample, "welch_t needs n >= 2 per group");
    const double v1 = sample_variance(x), v2 = sample_variance(y);
    if (v1 <= 0.0 && v2 <= 0.0)
        throw Error(ErrorCode::ZeroVarianceBothGroups, "welch_t: both groups constant");
    const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());
    const double se2 = v1 / n1 + v2 / n2;
    const double t = (mean(x) - mean(y)) / std::sqrt(se2);
    const double df = se2 * se2 /
                      (v1 * v1 / (n1 * n1 * (n1 - 1.0)) + v2 * v2 / (n2 * n2 * (n2 - 1.0)));
    StatTestResult res;
    res.kind = TestKind::welch_t;
    res.statistic = t;
    res.df = df;
    res.p = student_t_two_sided_p(t, df);
    res.group1 = summarize_group(x);
    res.group2 = summarize_group(y);
    return res;
}

/// Paired t-test on element-wise differences x - y.
inline StatTestResult paired_t(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw Error(ErrorCode::LengthMismatch, "paired_t: unequal lengths");
    const std::size_t n = x.size();
    if (n < 2)
        throw Error(ErrorCode::EmptySample, "paired_t needs n >= 2");
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
    const double sd = sample_sd(d);
    if (sd <= 0.0)
        throw Error(ErrorCode::ZeroVarianceDifferences, "paired_t: constant differences");
    const double t = mean(d) * std::sqrt(static_cast<double>(n)) / sd;
    StatTestResult res;
    res.kind = TestKind::paired_t;
    res.statistic = t;
    res.df = static_cast<double>(n - 1);
    res.p = student_t_two_sided_p(t, res.df.value());
    res.group1 = summarize_group(x);
    res.group2 = summarize_group(y);
    return res;
}

// ---------------------------------------------------------------------------
// Shapiro-Wilk (Royston's AS R94 polynomial approximation)
// ---------------------------------------------------------------------------

/// Shapiro-Wilk normality test, 3 <= n <= 5000. W from the normalized
/// expected order statistics with Royston's end-weight polynomials; p from
/// the log-normal / normal transformations of 1 - W.
inline StatTestResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3 || n > 5000)
        throw Error(ErrorCode::SampleSizeOutOfRange, "shapiro_wilk requires 3 <= n <= 5000");
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    if (x.front() == x.back())
        throw Error(ErrorCode::ZeroVariance, "shapiro_wilk: constant sample");

    const double nd = static_cast<double>(n);
    std::vector<double> m(n);
    double ssq_m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (nd + 0.25));
        ssq_m += m[i] * m[i];
    }

    std::vector<double> a(n, 0.0);
    const double rsn = 1.0 / std::sqrt(nd);
    const double an = -2.706056 * std::pow(rsn, 5) + 4.434685 * std::pow(rsn, 4) -
                      2.071190 * std::pow(rsn, 3) - 0.147981 * rsn * rsn +
                      0.221157 * rsn + m[n - 1] / std::sqrt(ssq_m);
    if (n > 5) {
        const double an1 = -3.582633 * std::pow(rsn, 5) + 5.682633 * std::pow(rsn, 4) -
                           1.752461 * std::pow(rsn, 3) - 0.293762 * rsn * rsn +
                           0.042981 * rsn + m[n - 2] / std::sqrt(ssq_m);
        const double phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                           (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
        const double sp = std::sqrt(phi);
        for (std::size_t i = 2; i + 2 < n; ++i) a[i] = m[i] / sp;
        a[n - 1] = an;
        a[n - 2] = an1;
        a[0] = -an;
        a[1] = -an1;
    } else if (n >= 4) {
        const double phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
        const double sp = std::sqrt(phi);
        for (std::size_t i = 1; i + 1 < n; ++i) a[i] = m[i] / sp;
        a[n - 1] = an;
        a[0] = -an;
    } else {
        a[2] = std::sqrt(0.5);
        a[0] = -a[2];
    }

    const double xbar = mean(x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += a[i] * x[i];
        den += (x[i] - xbar) * (x[i] - xbar);
    }
    double w = num * num / den;
    w = std::min(w, 1.0);

    StatTestResult res;
    res.kind = TestKind::shapiro_wilk;
    res.statistic = w;

    if (n == 3) {
        const double pi6 = 6.0 / 3.14159265358979323846;
        double p = pi6 * (std::asin(std::sqrt(w)) - std::asin(std::sqrt(0.75)));
        res.p = std::clamp(p, 0.0, 1.0);
        return res;
    }
    double zval;
    if (n <= 11) {
        const double g = -2.273 + 0.459 * nd;
        const double mu = 0.5440 - 0.39978 * nd + 0.025054 * nd * nd - 0.0006714 * nd * nd * nd;
        const double sig = std::exp(1.3822 - 0.77857 * nd + 0.062767 * nd * nd -
                                    0.0020322 * nd * nd * nd);
        zval = (-std::log(g - std::log1p(-w)) - mu) / sig;
    } else {
        const double u = std::log(nd);
        const double mu = -1.5861 - 0.31082 * u - 0.083751 * u * u + 0.0038915 * u * u * u;
        const double sig = std::exp(-0.4803 - 0.082676 * u + 0.0030302 * u * u);
        zval = (std::log1p(-w) - mu) / sig;
    }
    res.z = zval;
    res.p = std::clamp(1.0 - normal_cdf(zval), 0.0, 1.0);
    return res;
}

// ---------------------------------------------------------------------------
// effect sizes, correlation
// ---------------------------------------------------------------------------

/// Cliff's delta: (#(x_i > y_j) - #(x_i < y_j)) / (n1 * n2). Computed by
/// binary search over the sorted second sample (the tests cross-check it
/// against the quadratic dominance count).
inline double cliffs_delta(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty())
        throw Error(ErrorCode::EmptySample, "cliffs_delta needs non-empty samples");
    std::vector<double> ys(y.begin(), y.end());
    std::sort(ys.begin(), ys.end());
    long long greater = 0, less = 0;
    for (double xi : x) {
        const auto lo = std::lower_bound(ys.begin(), ys.end(), xi);
        const auto hi = std::upper_bound(lo, ys.end(), xi);
        greater += lo - ys.begin();              // y strictly below xi
        less += ys.end() - hi;                   // y strictly above xi
    }
    return static_cast<double>(greater - less) /
           (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

inline double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw Error(ErrorCode::LengthMismatch, "pearson_r: unequal lengths");
    const std::size_t n = x.size();
    if (n < 2)
        throw Error(ErrorCode::EmptySample, "pearson_r needs n >= 2");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw Error(ErrorCode::ConstantInput, "pearson_r: constant input");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

inline constexpr double kFisherClamp = 1.0 - 1e-6;

/// Fisher z-transform, input clamped to +-(1 - 1e-6) so z stays finite.
inline double fisher_z(double r) {
    return std::atanh(std::clamp(r, -kFisherClamp, kFisherClamp));
}

// ---------------------------------------------------------------------------
// Benjamini-Hochberg FDR
// ---------------------------------------------------------------------------

/// Step-up BH correction: sorted ascending, q_(i) = min_{k >= i} p_(k)*m/k,
/// mapped back to input order and capped at 1.
inline std::vector<double> bh_fdr(std::span<const double> p) {
    const std::size_t m = p.size();
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0))
            throw Error(ErrorCode::OutOfRangeP, "bh_fdr: p outside [0,1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> q(m, 0.0);
    double running = 1.0;
    for (std::size_t i = m; i-- > 0;) {
        const double cand = p[order[i]] * static_cast<double>(m) / static_cast<double>(i + 1);
        running = std::min(running, std::min(cand, 1.0));
        q[order[i]] = running;
    }
    return q;
}

// ---------------------------------------------------------------------------
// PCA (correlation-matrix, Jacobi eigendecomposition)
// ---------------------------------------------------------------------------

/// Dense row-major matrix, just big enough for survey-sized problems.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

namespace detail {

/// Cyclic Jacobi for symmetric matrices. Returns eigenvalues in `eig` and
/// eigenvectors as columns of `v`. Fine for the p <= 21 matrices here.
inline void jacobi_eigen(Matrix a, std::vector<double>& eig, Matrix& v) {
    const std::size_t p = a.rows;
    v = Matrix(p, p);
    for (std::size_t i = 0; i < p; ++i) v(i, i) = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-24 * static_cast<double>(p * p)) break;
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                if (std::fabs(a(i, j)) < 1e-300) continue;
                const double theta = (a(j, j) - a(i, i)) / (2.0 * a(i, j));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < p; ++k) {
                    const double aki = a(k, i), akj = a(k, j);
                    a(k, i) = c * aki - s * akj;
                    a(k, j) = s * aki + c * akj;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double aik = a(i, k), ajk = a(j, k);
                    a(i, k) = c * aik - s * ajk;
                    a(j, k) = s * aik + c * ajk;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double vki = v(k, i), vkj = v(k, j);
                    v(k, i) = c * vki - s * vkj;
                    v(k, j) = s * vki + c * vkj;
                }
            }
        }
    }
    eig.resize(p);
    for (std::size_t i = 0; i < p; ++i) eig[i] = a(i, i);
}

} // namespace detail

struct PcaResult {
    std::size_t n_components = 0;
    std::vector<double> explained_variance;  // eigenvalues, descending
    Matrix components;   // cols x k, unit eigenvectors (columns)
    Matrix loadings;     // cols x k, eigenvector * sqrt(eigenvalue):
                         // correlation between variable and component
    Matrix scores;       // rows x k, standardized data projected
    std::vector<double> column_means;
    std::vector<double> column_sds;  // sample sd (n-1)
};

/// Correlation-matrix PCA: columns standardized, eigendecomposition of the
/// correlation matrix, components sign-fixed so each one's largest-magnitude
/// loading is positive. Throws DegenerateMatrix on a constant column.
inline PcaResult pca(const Matrix& data, std::size_t n_components) {
    const std::size_t n = data.rows, p = data.cols;
    if (n < 2)
        throw Error(ErrorCode::EmptySample, "pca needs at least 2 rows");
    if (n_components == 0 || n_components > p)
        throw Error(ErrorCode::InvalidConfig, "pca: n_components out of range");

    PcaResult out;
    out.column_means.resize(p);
    out.column_sds.resize(p);
    Matrix z(n, p);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data(i, j);
        const double mu = s / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = data(i, j) - mu;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (sd < 1e-12)
            throw Error(ErrorCode::DegenerateMatrix,
                        "pca: constant column " + std::to_string(j));
        out.column_means[j] = mu;
        out.column_sds[j] = sd;
        for (std::size_t i = 0; i < n; ++i) z(i, j) = (data(i, j) - mu) / sd;
    }

    Matrix corr(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += z(i, a) * z(i, b);
            const double r = s / static_cast<double>(n - 1);
            corr(a, b) = r;
            corr(b, a) = r;
        }
    }

    std::vector<double> eig;
    Matrix vecs;
    detail::jacobi_eigen(corr, eig, vecs);

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return eig[a] > eig[b]; });

    const std::size_t k = n_components;
    out.n_components = k;
    out.explained_variance.resize(k);
    out.components = Matrix(p, k);
    out.loadings = Matrix(p, k);
    out.scores = Matrix(n, k);
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t src = order[c];
        const double lambda = std::max(eig[src], 0.0);
        out.explained_variance[c] = lambda;
        // sign convention: largest-magnitude loading positive
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (std::fabs(vecs(j, src)) > best) {
                best = std::fabs(vecs(j, src));
                arg = j;
            }
        }
        const double sign = vecs(arg, src) < 0.0 ? -1.0 : 1.0;
        const double sq = std::sqrt(lambda);
        for (std::size_t j = 0; j < p; ++j) {
            const double vj = sign * vecs(j, src);
            out.components(j, c) = vj;
            out.loadings(j, c) = vj * sq;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < p; ++j) s += z(i, j) * out.components(j, c);
            out.scores(i, c) = s;
        }
    }
    return out;
}

} // namespace entrain::stats

#include "headlead/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "headlead/error.hpp"

namespace headlead {

namespace {

struct RankedSample {
    std::vector<double> ranks; // average ranks of |d|, nonzero diffs only
    std::vector<bool> positive;
    double w_plus = 0.0;
    double tie_cubic = 0.0;    // sum over tie groups of t^3 - t
};

RankedSample rank_nonzero(std::span<const double> diffs) {
    std::vector<double> abs_vals;
    std::vector<bool> signs;
    for (double d : diffs) {
        if (!std::isfinite(d)) {
            throw Error(ErrorKind::invalid_argument,
                        "wilcoxon: differences must be finite");
        }
        if (d == 0.0) {
            continue;
        }
        abs_vals.push_back(std::abs(d));
        signs.push_back(d > 0.0);
    }
    if (abs_vals.empty()) {
        throw Error(ErrorKind::degenerate_sample,
                    "wilcoxon: all differences are zero");
    }

    const size_t n = abs_vals.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return abs_vals[a] < abs_vals[b];
    });

    RankedSample out;
    out.ranks.resize(n);
    out.positive = signs;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && abs_vals[order[j + 1]] == abs_vals[order[i]]) {
            ++j;
        }
        const double avg_rank =
            0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (size_t k = i; k <= j; ++k) {
            out.ranks[order[k]] = avg_rank;
        }
        const auto t = static_cast<double>(j - i + 1);
        out.tie_cubic += t * t * t - t;
        i = j + 1;
    }
    for (size_t k = 0; k < n; ++k) {
        if (out.positive[k]) {
            out.w_plus += out.ranks[k];
        }
    }
    return out;
}

/// Exact tail probability by counting sign assignments with a subset-sum
/// table over doubled ranks (average ranks are half-integers, so doubling
/// makes them exact integers).
double exact_tail(const RankedSample& rs, Alternative alternative) {
    const size_t n = rs.ranks.size();
    long total2 = 0;
    std::vector<long> r2(n);
    for (size_t i = 0; i < n; ++i) {
        r2[i] = std::lround(2.0 * rs.ranks[i]);
        total2 += r2[i];
    }

    std::vector<uint64_t> dp(static_cast<size_t>(total2) + 1, 0);
    dp[0] = 1;
    for (size_t i = 0; i < n; ++i) {
        for (long s = total2; s >= r2[i]; --s) {
            dp[static_cast<size_t>(s)] +=
                dp[static_cast<size_t>(s - r2[i])];
        }
    }

    const long w2 = std::lround(2.0 * rs.w_plus);
    uint64_t count = 0;
    if (alternative == Alternative::greater) {
        for (long s = w2; s <= total2; ++s) {
            count += dp[static_cast<size_t>(s)];
        }
    } else {
        for (long s = 0; s <= w2; ++s) {
            count += dp[static_cast<size_t>(s)];
        }
    }
    return static_cast<double>(count) /
           std::ldexp(1.0, static_cast<int>(n));
}

/// Normal approximation with tie-corrected variance and 0.5 continuity
/// correction.
double approx_tail(const RankedSample& rs, Alternative alternative) {
    const auto n = static_cast<double>(rs.ranks.size());
    const double mean = n * (n + 1.0) / 4.0;
    const double var =
        n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - rs.tie_cubic / 48.0;
    const double sd = std::sqrt(var);
    if (alternative == Alternative::greater) {
        const double z = (rs.w_plus - 0.5 - mean) / sd;
        return 0.5 * std::erfc(z / std::sqrt(2.0));
    }
    const double z = (rs.w_plus + 0.5 - mean) / sd;
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

constexpr size_t kExactThreshold = 20;

} // namespace

WilcoxonResult wilcoxon_one_tailed(std::span<const double> diffs,
                                   Alternative alternative,
                                   MethodPolicy policy) {
    const RankedSample rs = rank_nonzero(diffs);
    const size_t n = rs.ranks.size();

    bool exact = n <= kExactThreshold;
    if (policy == MethodPolicy::force_exact) {
        if (n > 62) {
            throw Error(ErrorKind::invalid_argument,
                        "wilcoxon: exact enumeration refused for n > 62");
        }
        exact = true;
    } else if (policy == MethodPolicy::force_approx) {
        exact = false;
    }

    WilcoxonResult res;
    res.statistic = rs.w_plus;
    res.n_effective = n;
    res.method = exact ? WilcoxonMethod::exact : WilcoxonMethod::normal_approx;
    res.p_one_tailed =
        exact ? exact_tail(rs, alternative) : approx_tail(rs, alternative);
    return res;
}

double exact_wilcoxon_oracle(std::span<const double> diffs,
                             Alternative alternative) {
    const RankedSample rs = rank_nonzero(diffs);
    const size_t n = rs.ranks.size();
    if (n > 20) {
        throw Error(ErrorKind::invalid_argument,
                    "exact oracle refused for n > 20");
    }

    // Rank sums are multiples of 0.5 and exactly representable, so the
    // comparisons below are exact.
    uint64_t count = 0;
    const uint64_t masks = uint64_t{1} << n;
    for (uint64_t mask = 0; mask < masks; ++mask) {
        double w = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (mask & (uint64_t{1} << i)) {
                w += rs.ranks[i];
            }
        }
        const bool in_tail = alternative == Alternative::greater
                                 ? w >= rs.w_plus
                                 : w <= rs.w_plus;
        if (in_tail) {
            ++count;
        }
    }
    return static_cast<double>(count) / static_cast<double>(masks);
}

} // namespace headlead

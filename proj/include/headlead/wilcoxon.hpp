#pragma once

#include <cstddef>
#include <span>

namespace headlead {

enum class Alternative { less, greater };

enum class WilcoxonMethod { exact, normal_approx };

enum class MethodPolicy { automatic, force_exact, force_approx };

struct WilcoxonResult {
    double statistic = 0.0;    // W+, sum of positive-difference ranks
    double p_one_tailed = 1.0;
    size_t n_effective = 0;    // sample size after zero-difference removal
    WilcoxonMethod method = WilcoxonMethod::exact;
};

/// One-tailed Wilcoxon signed-rank test on paired differences. Zero
/// differences are discarded; ties over |d| get average ranks. The exact
/// branch (n_effective <= 20 under the automatic policy) counts sign
/// assignments with a subset-sum table; larger samples use the normal
/// approximation with tie-corrected variance and a 0.5 continuity
/// correction. Throws degenerate_sample when every difference is zero.
WilcoxonResult wilcoxon_one_tailed(std::span<const double> diffs,
                                   Alternative alternative,
                                   MethodPolicy policy = MethodPolicy::automatic);

/// Brute-force tail probability over all 2^n sign assignments. Independent
/// of the production path; kept for validating both branches. Refuses
/// n_effective > 20.
double exact_wilcoxon_oracle(std::span<const double> diffs,
                             Alternative alternative);

} // namespace headlead

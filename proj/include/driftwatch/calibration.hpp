#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "driftwatch/kernels.hpp"
#include "driftwatch/limitsim.hpp"
#include "driftwatch/seriesgen.hpp"
#include "driftwatch/variance.hpp"

namespace driftwatch {

/// Null replicates of the finite-sample rule: random walks of horizon N,
/// smoothed with bandwidth h and scaled by h N^{-3/2}. Replicate r draws its
/// innovations from substream_seed(seed, r). With `variance` set, the
/// statistic is standardized prequentially, optionally after a prerun walk
/// of `prerun` steps drawn from substream_seed(substream_seed(seed, r), 1).
struct FiniteSampleVariant {
    long N = 100;
    double h = 10.0;
    InnovationSpec innovations;
    std::optional<VarianceMethod> variance;
    long prerun = 0;
};

/// Stopping times of the limit process M_zeta.
struct LimitVariant {
    LimitConfig config;
};

using ArlVariant = std::variant<FiniteSampleVariant, LimitVariant>;

struct CalibrationMeta {
    std::string variant;  // "finite-sample" or "limit"
    double zeta = 0.0;
    long N = 0;
    double h = 0.0;
    std::string kernel;
    long reps = 0;
    std::uint64_t seed = 0;
    double start_fraction = 0.0;
};

/// Normed ARL a0(c) = E0(S_N) / N on a sorted threshold axis.
struct CalibrationTable {
    Eigen::VectorXd c;
    Eigen::VectorXd normed_arl;
    CalibrationMeta meta;
};

/// Normed stopping times of every null replicate for every threshold, with
/// each replicate path shared across thresholds. Row r is replicate r.
Eigen::MatrixXd normed_stopping_times(const ArlVariant& variant, const KernelSpec& kernel,
                                      std::span<const double> c_grid, double a, long reps,
                                      std::uint64_t seed, unsigned jobs = 1);

/// Column means of normed_stopping_times.
CalibrationTable arl_curve(const ArlVariant& variant, const KernelSpec& kernel,
                           std::span<const double> c_grid, long reps, std::uint64_t seed,
                           double a = 0.0, unsigned jobs = 1);

/// Threshold whose normed ARL equals the target, by piecewise-linear inverse
/// interpolation. A target equal to a flat stretch of the curve returns the
/// largest threshold of that stretch.
double critical_value_for_arl(const CalibrationTable& table, double target_normed_arl);

/// Fraction of null replicates whose confidence interval at n = N covers
/// zero. `variance` selects the estimator of sigma (from the observed walk,
/// pooled with an optional prerun of `prerun` steps); nullopt uses the true
/// sigma = 1.
double coverage_sim(long N, double h, const KernelSpec& kernel, double alpha, long reps,
                    std::uint64_t seed,
                    std::optional<VarianceMethod> variance = VarianceMethod::naive,
                    long prerun = 0, unsigned jobs = 1);

struct CurveComparison {
    Eigen::VectorXd c;
    Eigen::VectorXd first;
    Eigen::VectorXd second;
    Eigen::VectorXd difference;  // first - second
    double fraction_nonnegative = 0.0;
    double mean_abs_gap = 0.0;
};

CurveComparison compare_curves(const CalibrationTable& first, const CalibrationTable& second);

/// Finite-sample (first) against limit (second) normed ARL curves for
/// zeta = N / h. Both variants are driven by the same Brownian paths: the
/// limit grid M is a multiple of N and the finite walk is the standard
/// normal walk Y_n = sqrt(N) B(n / N) embedded in the path. With
/// `variance` set the finite statistic is standardized by that estimator.
CurveComparison conservativeness_check(long N, double h, const KernelSpec& kernel,
                                       std::span<const double> c_grid, long reps,
                                       std::uint64_t seed,
                                       std::optional<VarianceMethod> variance = std::nullopt,
                                       unsigned jobs = 1);

struct KernelComparison {
    std::vector<std::string> names;
    Eigen::VectorXd s;                  // evaluation grid of the curves
    std::vector<Eigen::VectorXd> curves;  // drift_term(s) per kernel
    std::vector<double> crossings;      // asymptotic normed delay per kernel
    std::size_t best = 0;               // index of the smallest crossing
};

/// Drift-term curves y_l(s) of each candidate and their first c-crossing.
KernelComparison kernel_comparison_curves(const std::vector<KernelSpec>& candidates,
                                          const GenericAlternative& m0, double zeta, double c,
                                          long points = 200);

void write_calibration_csv(std::ostream& out, const CalibrationTable& table);

}  // namespace driftwatch

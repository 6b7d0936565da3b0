#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "driftwatch/kernels.hpp"
#include "driftwatch/seriesgen.hpp"

namespace driftwatch {

/// Normalizer c(h, N) applied to the smoother.
enum class Scaling {
    raw,               // 1
    null_scale,        // h N^{-3/2}, random-walk null
    slow_alt_scale,    // h^{1/2} N^{-3/2}, slowly vanishing alternatives
    stationary_scale,  // h N^{-1/2}, stationary AR(1) data
};

Scaling scaling_from_name(std::string_view name);
std::string scaling_name(Scaling s);

struct SmootherConfig {
    KernelSpec kernel = KernelSpec::gaussian();
    double h = 1.0;
    Scaling scaling = Scaling::null_scale;
    /// When set, kernel weights use design times instead of the series
    /// times: n F^{-1}(i/n) for CP1-rolling and N F^{-1}(i/N) for CP2-fixed.
    std::optional<TimeDesign> design;

    void validate() const;
};

/// Times entering the weights of observations 1..n at current index n;
/// `times` are the recorded observation times and N the horizon.
std::vector<double> smoothing_times(const SmootherConfig& cfg, std::span<const double> times,
                                    long n, long N);

/// Sequential Nadaraya-Watson estimate from Y_1..Y_n with weights
/// K_h(t_i - t_n). Throws DegenerateError when the weights sum to zero.
double nw_estimate(const TimeSeries& series, const SmootherConfig& cfg, long n);

/// nw_estimate for n = 1..N, i.e. the process on the grid {n/N}.
Eigen::VectorXd nw_process(const TimeSeries& series, const SmootherConfig& cfg);

/// Lower-triangular N x N matrix whose row n holds the normalized weights of
/// Y_1..Y_n at index n for observation times 1..N (or the configured
/// design), so that W * Y is the whole smoother trajectory. Many replicates
/// are smoothed at once by multiplying against a matrix of paths.
Eigen::MatrixXd smoother_matrix(const SmootherConfig& cfg, long N);

double scaling_factor(Scaling scaling, double h, long N);

double scaled_statistic(double value, const SmootherConfig& cfg, long N);

}  // namespace driftwatch

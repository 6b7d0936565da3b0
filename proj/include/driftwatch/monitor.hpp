#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "driftwatch/estimator.hpp"
#include "driftwatch/seriesgen.hpp"
#include "driftwatch/variance.hpp"

namespace driftwatch {

struct MonitorConfig {
    SmootherConfig smoother;
    double threshold = 0.0;
    /// a in [0, 1); monitoring starts at max(1, floor(N a)).
    double start_fraction = 0.0;
    /// When set, the scaled statistic is divided by the square root of the
    /// prequential variance estimate (data up to the current index).
    std::optional<VarianceMethod> variance_method;
    long N = 100;
    /// Optional prerun observations that seed the variance estimator.
    Eigen::VectorXd prerun;

    void validate() const;
    long first_index() const;
};

/// `trajectory` holds the statistic for n = 1..N (NaN where the variance
/// estimator is not yet defined). Without an exceedance alarm_index = N.
struct StoppingResult {
    long alarm_index = 0;
    bool alarmed = false;
    Eigen::VectorXd trajectory;
    double normed_time = 1.0;
};

/// 1-based index of the first entry n >= first with trajectory[n] > c (NaN
/// entries are skipped), or nullopt.
std::optional<long> first_exceedance(const Eigen::Ref<const Eigen::VectorXd>& trajectory,
                                     double c, long first);

/// Stopping-rule monitor fed one observation at a time.
class OnlineMonitor {
public:
    explicit OnlineMonitor(MonitorConfig cfg);

    /// Adds observation n = count() + 1 and returns its statistic (NaN when
    /// the variance estimator is not yet defined). Throws DegenerateError for
    /// vanishing weights, or for a zero variance estimate at an eligible n.
    double push(double t, double y);

    long count() const { return static_cast<long>(values_.size()); }
    const std::optional<long>& alarm_index() const { return alarm_; }
    const MonitorConfig& config() const { return cfg_; }

    /// Result as of now; alarm_index falls back to N without an alarm.
    StoppingResult result() const;

private:
    MonitorConfig cfg_;
    double scale_;
    std::vector<double> times_;
    std::vector<double> values_;
    std::vector<double> trajectory_;
    std::optional<VarianceAccumulator> variance_;
    std::optional<long> alarm_;
};

/// Batch stopping rule over the first N rows of `series`.
StoppingResult run_monitor(const TimeSeries& series, const MonitorConfig& cfg);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// m_hat +/- z_{1-alpha/2} sigma_k sigma_hat N^{3/2} / h.
Interval confidence_interval(double m_hat, double sigma_k, double sigma_hat, double h, long N,
                             double alpha);

/// Monte Carlo estimate of P(statistic at index n > c) under a standard
/// normal random-walk null. Replicate r uses substream_seed(seed, r).
double false_alarm_rate(const MonitorConfig& cfg, long n, long reps, std::uint64_t seed,
                        unsigned jobs = 1);

}  // namespace driftwatch

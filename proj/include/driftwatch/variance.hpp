#pragma once

#include <span>
#include <string>
#include <string_view>

#include "driftwatch/seriesgen.hpp"

namespace driftwatch {

enum class VarianceMethod { naive, gasser, rice };

VarianceMethod variance_method_from_name(std::string_view name);
std::string variance_method_name(VarianceMethod m);

/// `n_used` is the number of summed terms (squared differences, squared
/// pseudo-residuals or squared second differences).
struct VarianceEstimate {
    VarianceMethod method = VarianceMethod::naive;
    double value = 0.0;
    long n_used = 0;
};

/// Smallest number of observations the method needs.
long minimum_observations(VarianceMethod m);

/// sum_{i=2..n} (Y_i - Y_{i-1})^2 / (n - 1).
double naive_var(const TimeSeries& series, long n);

/// Pseudo-residuals e_i = (dY_{i-1} + dY_{i+1}) / 2 - dY_i for i = 3..n-1,
/// combined as 2 / (3 (n - 3)) sum e_i^2. Needs n >= 4.
double gasser_var(const TimeSeries& series, long n);

/// sum_{i=2..n-1} (dY_{i+1} - dY_i)^2 / (2 (n - 2)). Needs n >= 3.
double rice_var(const TimeSeries& series, long n);

VarianceEstimate estimate_variance(VarianceMethod m, const TimeSeries& series, long n);

/// statistic / sqrt(estimate); throws DegenerateError for a zero estimate.
double nuisance_free(double statistic, const VarianceEstimate& est);

/// Incremental difference-based estimator for streamed observations.
///
/// A prerun segment, if given, is a separate stream: its terms are pooled
/// with those of the monitored data but the two are never differenced
/// across the junction.
class VarianceAccumulator {
public:
    explicit VarianceAccumulator(VarianceMethod method) : method_(method) {}

    void add_prerun(std::span<const double> values);
    void push(double y);

    /// True once at least one term has been accumulated.
    bool ready() const { return terms() > 0; }
    long terms() const { return prerun_.count + live_.count; }

    VarianceEstimate estimate() const;

private:
    struct Stream {
        long observations = 0;
        double last = 0.0;
        double d1 = 0.0;  // most recent difference
        double d2 = 0.0;  // the one before
        double sum = 0.0;
        long count = 0;
    };

    void feed(Stream& s, double y) const;

    VarianceMethod method_;
    Stream prerun_;
    Stream live_;
};

}  // namespace driftwatch

#include "driftwatch/variance.hpp"

#include <cmath>

#include "driftwatch/errors.hpp"

namespace driftwatch {
namespace {

void check_range(const TimeSeries& series, long n, long minimum, const char* who) {
    if (n < minimum) {
        throw DomainError(std::string(who) + ": needs at least " + std::to_string(minimum) +
                          " observations");
    }
    if (n > series.size()) throw DomainError(std::string(who) + ": n exceeds the series length");
}

double scale_sum(VarianceMethod m, double sum, long count) {
    switch (m) {
        case VarianceMethod::naive: return sum / static_cast<double>(count);
        case VarianceMethod::gasser: return 2.0 * sum / (3.0 * static_cast<double>(count));
        case VarianceMethod::rice: return sum / (2.0 * static_cast<double>(count));
    }
    return 0.0;
}

}  // namespace

VarianceMethod variance_method_from_name(std::string_view name) {
    if (name == "naive") return VarianceMethod::naive;
    if (name == "gasser") return VarianceMethod::gasser;
    if (name == "rice") return VarianceMethod::rice;
    throw DomainError("unknown variance method '" + std::string(name) + "'");
}

std::string variance_method_name(VarianceMethod m) {
    switch (m) {
        case VarianceMethod::naive: return "naive";
        case VarianceMethod::gasser: return "gasser";
        case VarianceMethod::rice: return "rice";
    }
    return "unknown";
}

long minimum_observations(VarianceMethod m) {
    switch (m) {
        case VarianceMethod::naive: return 2;
        case VarianceMethod::gasser: return 4;
        case VarianceMethod::rice: return 3;
    }
    return 2;
}

double naive_var(const TimeSeries& series, long n) {
    check_range(series, n, 2, "naive_var");
    const auto& y = series.values;
    double sum = 0.0;
    for (long i = 1; i < n; ++i) sum += (y[i] - y[i - 1]) * (y[i] - y[i - 1]);
    return sum / static_cast<double>(n - 1);
}

double gasser_var(const TimeSeries& series, long n) {
    check_range(series, n, 4, "gasser_var");
    const auto& y = series.values;
    double sum = 0.0;
    // 0-based: differences d_j = y[j] - y[j-1] for j >= 1, residual at j uses j-1, j, j+1
    for (long j = 2; j + 1 < n; ++j) {
        const double e = 0.5 * (y[j - 1] - y[j - 2]) + 0.5 * (y[j + 1] - y[j]) - (y[j] - y[j - 1]);
        sum += e * e;
    }
    return 2.0 * sum / (3.0 * static_cast<double>(n - 3));
}

double rice_var(const TimeSeries& series, long n) {
    check_range(series, n, 3, "rice_var");
    const auto& y = series.values;
    double sum = 0.0;
    for (long j = 1; j + 1 < n; ++j) {
        const double dd = (y[j + 1] - y[j]) - (y[j] - y[j - 1]);
        sum += dd * dd;
    }
    return sum / (2.0 * static_cast<double>(n - 2));
}

VarianceEstimate estimate_variance(VarianceMethod m, const TimeSeries& series, long n) {
    switch (m) {
        case VarianceMethod::naive: return {m, naive_var(series, n), n - 1};
        case VarianceMethod::gasser: return {m, gasser_var(series, n), n - 3};
        case VarianceMethod::rice: return {m, rice_var(series, n), n - 2};
    }
    throw DomainError("unknown variance method");
}

double nuisance_free(double statistic, const VarianceEstimate& est) {
    if (!(est.value > 0.0)) {
        throw DegenerateError("variance estimate is zero; the statistic cannot be standardized");
    }
    return statistic / std::sqrt(est.value);
}

void VarianceAccumulator::feed(Stream& s, double y) const {
    ++s.observations;
    if (s.observations >= 2) {
        const double d = y - s.last;
        switch (method_) {
            case VarianceMethod::naive:
                s.sum += d * d;
                ++s.count;
                break;
            case VarianceMethod::rice:
                if (s.observations >= 3) {
                    s.sum += (d - s.d1) * (d - s.d1);
                    ++s.count;
                }
                break;
            case VarianceMethod::gasser:
                if (s.observations >= 4) {
                    const double e = 0.5 * s.d2 + 0.5 * d - s.d1;
                    s.sum += e * e;
                    ++s.count;
                }
                break;
        }
        s.d2 = s.d1;
        s.d1 = d;
    }
    s.last = y;
}

void VarianceAccumulator::add_prerun(std::span<const double> values) {
    for (double y : values) feed(prerun_, y);
}

void VarianceAccumulator::push(double y) { feed(live_, y); }

VarianceEstimate VarianceAccumulator::estimate() const {
    const long count = terms();
    if (count == 0) throw DomainError("variance estimate requested before enough observations");
    return {method_, scale_sum(method_, prerun_.sum + live_.sum, count), count};
}

}  // namespace driftwatch

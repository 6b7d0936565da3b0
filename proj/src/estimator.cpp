#include "driftwatch/estimator.hpp"

#include <cmath>

#include "driftwatch/errors.hpp"

namespace driftwatch {
namespace {

bool equally_spaced(std::span<const double> t) {
    if (t.size() < 3) return true;
    const double d = t[1] - t[0];
    for (std::size_t i = 2; i < t.size(); ++i) {
        if (std::abs((t[i] - t[i - 1]) - d) > 1e-12 * std::max(1.0, std::abs(t[i]))) return false;
    }
    return true;
}

// Weight of lag k on a grid of spacing d; lags beyond the kernel support
// give exactly zero.
Eigen::VectorXd lag_weights(const SmootherConfig& cfg, long count, double spacing) {
    Eigen::VectorXd w(count);
    for (long k = 0; k < count; ++k) w[k] = cfg.kernel(-k * spacing / cfg.h);
    return w;
}

std::string degenerate_message(long n) {
    return "kernel weights vanish at index " + std::to_string(n);
}

}  // namespace

Scaling scaling_from_name(std::string_view name) {
    if (name == "raw") return Scaling::raw;
    if (name == "null" || name == "null_scale") return Scaling::null_scale;
    if (name == "slow_alt" || name == "slow_alt_scale") return Scaling::slow_alt_scale;
    if (name == "stationary" || name == "stationary_scale") return Scaling::stationary_scale;
    throw DomainError("unknown scaling '" + std::string(name) + "'");
}

std::string scaling_name(Scaling s) {
    switch (s) {
        case Scaling::raw: return "raw";
        case Scaling::null_scale: return "null_scale";
        case Scaling::slow_alt_scale: return "slow_alt_scale";
        case Scaling::stationary_scale: return "stationary_scale";
    }
    return "unknown";
}

void SmootherConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("bandwidth h must be positive");
}

std::vector<double> smoothing_times(const SmootherConfig& cfg, std::span<const double> times,
                                    long n, long N) {
    if (n < 1 || n > static_cast<long>(times.size())) {
        throw DomainError("index n out of range for the series");
    }
    if (cfg.design) return design_times(*cfg.design, n, std::max(N, n));
    return {times.begin(), times.begin() + n};
}

double nw_estimate(const TimeSeries& series, const SmootherConfig& cfg, long n) {
    cfg.validate();
    const std::span<const double> all(series.times.data(), series.times.size());
    const auto t = smoothing_times(cfg, all, n, series.size());
    const double t_now = t.back();
    double num = 0.0;
    double den = 0.0;
    for (long i = 0; i < n; ++i) {
        const double w = cfg.kernel((t[i] - t_now) / cfg.h);
        num += w * series.values[i];
        den += w;
    }
    if (!(den > 0.0)) throw DegenerateError(degenerate_message(n), n);
    return num / den;
}

Eigen::VectorXd nw_process(const TimeSeries& series, const SmootherConfig& cfg) {
    cfg.validate();
    const long N = series.size();
    const std::span<const double> all(series.times.data(), series.times.size());
    Eigen::VectorXd out(N);
    if (!cfg.design && equally_spaced(all) && N > 0) {
        // Toeplitz weights: one kernel evaluation per lag
        const double spacing = N > 1 ? all[1] - all[0] : 1.0;
        const Eigen::VectorXd w = lag_weights(cfg, N, spacing);
        long reach = N;
        while (reach > 1 && w[reach - 1] == 0.0) --reach;
        for (long n = 0; n < N; ++n) {
            const long lags = std::min(n + 1, reach);
            double num = 0.0;
            double den = 0.0;
            for (long k = 0; k < lags; ++k) {
                num += w[k] * series.values[n - k];
                den += w[k];
            }
            if (!(den > 0.0)) throw DegenerateError(degenerate_message(n + 1), n + 1);
            out[n] = num / den;
        }
        return out;
    }
    for (long n = 1; n <= N; ++n) out[n - 1] = nw_estimate(series, cfg, n);
    return out;
}

Eigen::MatrixXd smoother_matrix(const SmootherConfig& cfg, long N) {
    cfg.validate();
    if (N < 1) throw DomainError("smoother_matrix: N must be at least 1");
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(N, N);
    if (!cfg.design) {
        const Eigen::VectorXd w = lag_weights(cfg, N, 1.0);
        for (long n = 0; n < N; ++n) {
            const double den = w.head(n + 1).sum();
            if (!(den > 0.0)) throw DegenerateError(degenerate_message(n + 1), n + 1);
            for (long k = 0; k <= n; ++k) W(n, n - k) = w[k] / den;
        }
        return W;
    }
    for (long n = 1; n <= N; ++n) {
        const auto t = design_times(*cfg.design, n, N);
        double den = 0.0;
        for (long i = 0; i < n; ++i) {
            W(n - 1, i) = cfg.kernel((t[i] - t.back()) / cfg.h);
            den += W(n - 1, i);
        }
        if (!(den > 0.0)) throw DegenerateError(degenerate_message(n), n);
        W.row(n - 1) /= den;
    }
    return W;
}

double scaling_factor(Scaling scaling, double h, long N) {
    if (N < 1) throw DomainError("scaling: horizon N must be at least 1");
    const double n = static_cast<double>(N);
    switch (scaling) {
        case Scaling::raw: return 1.0;
        case Scaling::null_scale: return h / (n * std::sqrt(n));
        case Scaling::slow_alt_scale: return std::sqrt(h) / (n * std::sqrt(n));
        case Scaling::stationary_scale: return h / std::sqrt(n);
    }
    return 1.0;
}

double scaled_statistic(double value, const SmootherConfig& cfg, long N) {
    return value * scaling_factor(cfg.scaling, cfg.h, N);
}

}  // namespace driftwatch

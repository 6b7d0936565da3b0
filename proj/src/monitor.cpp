#include "driftwatch/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftwatch/errors.hpp"
#include "driftwatch/normal.hpp"
#include "driftwatch/parallel.hpp"
#include "driftwatch/random.hpp"

namespace driftwatch {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Kernel-weighted mean of values[0..n) at the last of `times`, restricted to
// the kernel support window.
double windowed_estimate(const SmootherConfig& cfg, std::span<const double> times,
                         std::span<const double> values, long n) {
    const double t_now = times.back();
    const double lo = t_now + cfg.h * cfg.kernel.support_lower();
    const auto first = std::lower_bound(times.begin(), times.end(), lo);
    double num = 0.0;
    double den = 0.0;
    for (auto it = first; it != times.end(); ++it) {
        const auto i = static_cast<std::size_t>(it - times.begin());
        const double w = cfg.kernel((*it - t_now) / cfg.h);
        num += w * values[i];
        den += w;
    }
    if (!(den > 0.0)) {
        throw DegenerateError("kernel weights vanish at index " + std::to_string(n), n);
    }
    return num / den;
}

}  // namespace

void MonitorConfig::validate() const {
    smoother.validate();
    if (!(start_fraction >= 0.0 && start_fraction < 1.0)) {
        throw DomainError("start fraction a must lie in [0, 1)");
    }
    if (N < 1) throw DomainError("horizon N must be at least 1");
    if (std::isnan(threshold)) throw DomainError("threshold must not be NaN");
}

long MonitorConfig::first_index() const {
    return std::max(1L, static_cast<long>(std::floor(static_cast<double>(N) * start_fraction)));
}

std::optional<long> first_exceedance(const Eigen::Ref<const Eigen::VectorXd>& trajectory,
                                     double c, long first) {
    for (Eigen::Index i = std::max(0L, first - 1); i < trajectory.size(); ++i) {
        if (trajectory[i] > c) return static_cast<long>(i + 1);
    }
    return std::nullopt;
}

OnlineMonitor::OnlineMonitor(MonitorConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    scale_ = scaling_factor(cfg_.smoother.scaling, cfg_.smoother.h, cfg_.N);
    if (cfg_.variance_method) {
        variance_.emplace(*cfg_.variance_method);
        variance_->add_prerun(std::span<const double>(cfg_.prerun.data(), cfg_.prerun.size()));
    }
    times_.reserve(static_cast<std::size_t>(cfg_.N));
    values_.reserve(static_cast<std::size_t>(cfg_.N));
}

double OnlineMonitor::push(double t, double y) {
    if (count() >= cfg_.N) throw DomainError("monitor horizon N already reached");
    if (!std::isfinite(t) || !std::isfinite(y)) throw DomainError("observation must be finite");
    if (!times_.empty() && !(t > times_.back())) {
        throw DomainError("observation times must be strictly increasing");
    }
    times_.push_back(t);
    values_.push_back(y);
    const long n = count();

    double m_hat;
    if (cfg_.smoother.design) {
        const auto t_design = smoothing_times(cfg_.smoother, times_, n, cfg_.N);
        m_hat = windowed_estimate(cfg_.smoother, t_design, values_, n);
    } else {
        m_hat = windowed_estimate(cfg_.smoother, times_, values_, n);
    }
    double stat = m_hat * scale_;
    const bool eligible = n >= cfg_.first_index();
    if (variance_) {
        variance_->push(y);
        if (!variance_->ready()) {
            stat = kNaN;
        } else {
            const VarianceEstimate est = variance_->estimate();
            if (est.value > 0.0) {
                stat = nuisance_free(stat, est);
            } else if (eligible) {
                throw DegenerateError("variance estimate is zero at index " + std::to_string(n), n);
            } else {
                stat = kNaN;
            }
        }
    }
    trajectory_.push_back(stat);
    if (!alarm_ && eligible && stat > cfg_.threshold) alarm_ = n;
    return stat;
}

StoppingResult OnlineMonitor::result() const {
    StoppingResult r;
    r.trajectory = Eigen::Map<const Eigen::VectorXd>(trajectory_.data(),
                                                     static_cast<Eigen::Index>(trajectory_.size()));
    r.alarmed = alarm_.has_value();
    r.alarm_index = alarm_.value_or(cfg_.N);
    r.normed_time = static_cast<double>(r.alarm_index) / static_cast<double>(cfg_.N);
    return r;
}

StoppingResult run_monitor(const TimeSeries& series, const MonitorConfig& cfg) {
    cfg.validate();
    if (series.size() < cfg.N) {
        throw DomainError("series has " + std::to_string(series.size()) +
                          " observations, the horizon needs " + std::to_string(cfg.N));
    }
    TimeSeries head{series.times.head(cfg.N), series.values.head(cfg.N), series.meta};
    Eigen::VectorXd traj = nw_process(head, cfg.smoother) *
                           scaling_factor(cfg.smoother.scaling, cfg.smoother.h, cfg.N);
    const long first = cfg.first_index();
    if (cfg.variance_method) {
        VarianceAccumulator acc(*cfg.variance_method);
        acc.add_prerun(std::span<const double>(cfg.prerun.data(), cfg.prerun.size()));
        for (long n = 1; n <= cfg.N; ++n) {
            acc.push(head.values[n - 1]);
            if (!acc.ready()) {
                traj[n - 1] = kNaN;
                continue;
            }
            const VarianceEstimate est = acc.estimate();
            if (est.value > 0.0) {
                traj[n - 1] = nuisance_free(traj[n - 1], est);
            } else if (n >= first) {
                throw DegenerateError("variance estimate is zero at index " + std::to_string(n), n);
            } else {
                traj[n - 1] = kNaN;
            }
        }
    }
    StoppingResult r;
    const auto hit = first_exceedance(traj, cfg.threshold, first);
    r.alarmed = hit.has_value();
    r.alarm_index = hit.value_or(cfg.N);
    r.normed_time = static_cast<double>(r.alarm_index) / static_cast<double>(cfg.N);
    r.trajectory = std::move(traj);
    return r;
}

Interval confidence_interval(double m_hat, double sigma_k, double sigma_hat, double h, long N,
                             double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(sigma_k > 0.0) || !(sigma_hat > 0.0) || !(h > 0.0) || N < 1) {
        throw DomainError("confidence_interval: sigma_k, sigma_hat, h and N must be positive");
    }
    const double z = normal_quantile(1.0 - 0.5 * alpha);
    const double n = static_cast<double>(N);
    const double half = z * sigma_k * sigma_hat * n * std::sqrt(n) / h;
    return {m_hat - half, m_hat + half};
}

double false_alarm_rate(const MonitorConfig& cfg, long n, long reps, std::uint64_t seed,
                        unsigned jobs) {
    cfg.validate();
    if (reps < 1) throw DomainError("false_alarm_rate: reps must be at least 1");
    if (n < 1 || n > cfg.N) throw DomainError("false_alarm_rate: need 1 <= n <= N");
    std::vector<char> exceeded(static_cast<std::size_t>(reps), 0);
    const InnovationSpec innovations = InnovationSpec::iid(1.0);
    parallel_for(reps, jobs, [&](long r) {
        const Eigen::VectorXd u = innovation_stream(innovations, n, substream_seed(seed, r));
        OnlineMonitor monitor(cfg);
        double y = 0.0;
        double stat = 0.0;
        for (long i = 1; i <= n; ++i) {
            y += u[i - 1];
            stat = monitor.push(static_cast<double>(i), y);
        }
        exceeded[static_cast<std::size_t>(r)] = stat > cfg.threshold;
    });
    long hits = 0;
    for (char e : exceeded) hits += e;
    return static_cast<double>(hits) / static_cast<double>(reps);
}

}  // namespace driftwatch

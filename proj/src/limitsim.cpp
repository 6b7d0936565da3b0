#include "driftwatch/limitsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftwatch/errors.hpp"
#include "driftwatch/parallel.hpp"
#include "driftwatch/quadrature.hpp"
#include "driftwatch/random.hpp"

namespace driftwatch {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr long kBatchColumns = 256;

bool uniform_design(const LimitConfig& cfg) { return !cfg.design || cfg.design->is_uniform(); }

// Weight of time r in the limit smoother at s, i.e. K(zeta (r - s)) or its
// design counterpart.
double limit_weight(const LimitConfig& cfg, double r, double s) {
    if (uniform_design(cfg)) return cfg.kernel(cfg.zeta * (r - s));
    const TimeDesign& td = *cfg.design;
    if (td.mode() == DesignMode::cp1_rolling) {
        return cfg.kernel(cfg.zeta * s * (td.inverse(r / s) - 1.0));
    }
    return cfg.kernel(cfg.zeta * (td.inverse(r) - td.inverse(s)));
}

// Points in (lo, hi) where the integrand in r has kinks: kernel breakpoints
// mapped back from z = zeta (r - s), plus `extra`.
std::vector<double> weight_breaks(const LimitConfig& cfg, double s, double lo, double hi,
                                  std::span<const double> extra = {}) {
    std::vector<double> out;
    if (uniform_design(cfg)) {
        for (double b : cfg.kernel.breakpoints()) {
            const double r = s + b / cfg.zeta;
            if (r > lo && r < hi) out.push_back(r);
        }
    }
    for (double r : extra) {
        if (r > lo && r < hi) out.push_back(r);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// int_0^s weight(r; s) dr, without the zeta factor.
double weight_mass(const LimitConfig& cfg, double s) {
    if (uniform_design(cfg)) return kernel_mass(cfg.kernel, -cfg.zeta * s, 0.0) / cfg.zeta;
    return integrate([&](double r) { return limit_weight(cfg, r, s); }, 0.0, s);
}

// int_r^s weight(u; s) du.
double weight_tail(const LimitConfig& cfg, double r, double s) {
    if (uniform_design(cfg)) {
        return kernel_mass(cfg.kernel, cfg.zeta * (r - s), 0.0) / cfg.zeta;
    }
    return integrate([&](double u) { return limit_weight(cfg, u, s); }, r, s);
}

// int_0^{zeta r} m0 with the change-point offset, i.e. the integrated drift
// seen by the limit smoother at time r.
double integrated_drift(const LimitConfig& cfg, double r) {
    const LimitDrift& d = *cfg.drift;
    const double x = cfg.zeta * r;
    if (!d.cp2) return d.m0.cumulative(x);
    if (uniform_design(cfg)) return d.m0.cumulative(x - cfg.zeta * d.theta);
    const TimeDesign& td = *cfg.design;
    const double onset = td.inverse(d.theta);
    if (!(x > 0.0)) return 0.0;
    return integrate(
        [&](double t) { return d.m0(cfg.zeta * (td.inverse(t / cfg.zeta) - onset)); }, 0.0, x);
}

std::vector<double> drift_breaks(const LimitConfig& cfg) {
    std::vector<double> out;
    if (!cfg.drift || !uniform_design(cfg)) return out;
    const double offset = cfg.drift->cp2 ? cfg.drift->theta : 0.0;
    for (double t : cfg.drift->m0.breakpoints()) out.push_back(offset + t / cfg.zeta);
    return out;
}

long first_grid_index(double a, long M) {
    const double scaled = a * static_cast<double>(M);
    long j = static_cast<long>(std::ceil(scaled - 1e-9));
    return std::max(1L, j);
}

}  // namespace

void LimitConfig::validate() const {
    if (!(zeta >= 1.0) || !std::isfinite(zeta)) throw DomainError("zeta must be at least 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be nonnegative");
    if (grid_M < 64) throw DomainError("grid_M must be at least 64");
    if (drift && drift->cp2 && !(drift->theta > 0.0 && drift->theta <= 1.0)) {
        throw DomainError("CP2 fraction theta must lie in (0, 1]");
    }
}

Eigen::VectorXd sample_bm(long grid_M, std::uint64_t seed) {
    if (grid_M < 1) throw DomainError("sample_bm: grid_M must be at least 1");
    Rng rng(seed);
    const double step = 1.0 / std::sqrt(static_cast<double>(grid_M));
    Eigen::VectorXd b(grid_M + 1);
    b[0] = 0.0;
    for (long j = 1; j <= grid_M; ++j) b[j] = b[j - 1] + step * rng.normal();
    return b;
}

LimitPathSampler::LimitPathSampler(const LimitConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const long M = cfg_.grid_M;
    const double dM = static_cast<double>(M);
    weights_ = Eigen::MatrixXd::Zero(M, M + 1);
    Eigen::VectorXd lag;
    if (uniform_design(cfg_)) {
        lag.resize(M + 1);
        for (long l = 0; l <= M; ++l) lag[l] = cfg_.kernel(-cfg_.zeta * static_cast<double>(l) / dM);
    }
    for (long j = 1; j <= M; ++j) {
        const double s = static_cast<double>(j) / dM;
        auto row = weights_.row(j - 1);
        for (long i = 0; i <= j; ++i) {
            const double w = uniform_design(cfg_) ? lag[j - i]
                                                  : limit_weight(cfg_, static_cast<double>(i) / dM, s);
            row[i] = (i == 0 || i == j) ? 0.5 * w : w;
        }
        const double mass = row.sum();
        if (mass > 0.0) {
            row /= cfg_.zeta * mass;
        } else if (s < cfg_.s_min()) {
            undefined_.push_back(j - 1);
        } else {
            throw DegenerateError("limit weights vanish at s = " + std::to_string(s), j);
        }
    }
    drift_ = Eigen::VectorXd::Zero(M);
    if (cfg_.drift) {
        for (long j = 1; j <= M; ++j) drift_[j - 1] = drift_term(cfg_, static_cast<double>(j) / dM);
    }
}

Eigen::MatrixXd LimitPathSampler::null_paths(const Eigen::Ref<const Eigen::MatrixXd>& bm) const {
    if (bm.rows() != cfg_.grid_M + 1) throw DomainError("Brownian paths do not match grid_M");
    Eigen::MatrixXd out = cfg_.sigma * (weights_ * bm);
    for (long row : undefined_) out.row(row).setConstant(kNaN);
    return out;
}

Eigen::MatrixXd LimitPathSampler::sample(long first, long count, std::uint64_t seed,
                                         bool with_drift) const {
    Eigen::MatrixXd bm(cfg_.grid_M + 1, count);
    for (long c = 0; c < count; ++c) {
        bm.col(c) = sample_bm(cfg_.grid_M, substream_seed(seed, static_cast<std::uint64_t>(first + c)));
    }
    Eigen::MatrixXd out = null_paths(bm);
    if (with_drift) out.colwise() += drift_;
    return out;
}

Eigen::VectorXd limit_process_from_path(const LimitConfig& cfg,
                                        const Eigen::Ref<const Eigen::VectorXd>& bm) {
    cfg.validate();
    const long steps = static_cast<long>(bm.size()) - 1;
    if (steps < cfg.grid_M || steps % cfg.grid_M != 0) {
        throw DomainError("path length must be a multiple of grid_M plus one");
    }
    const long stride = steps / cfg.grid_M;
    Eigen::VectorXd coarse(cfg.grid_M + 1);
    for (long j = 0; j <= cfg.grid_M; ++j) coarse[j] = bm[j * stride];
    return LimitPathSampler(cfg).null_paths(coarse);
}

Eigen::VectorXd null_limit_process(const LimitConfig& cfg, std::uint64_t seed) {
    return limit_process_from_path(cfg, sample_bm(cfg.grid_M, seed));
}

Eigen::VectorXd alt_limit_process(const LimitConfig& cfg, std::uint64_t seed) {
    if (!cfg.drift) throw DomainError("alt_limit_process needs a drift");
    const LimitPathSampler sampler(cfg);
    const Eigen::VectorXd bm = sample_bm(cfg.grid_M, seed);
    return sampler.null_paths(bm) + sampler.drift();
}

double sigma_k_sq(const LimitConfig& cfg, double s) {
    cfg.validate();
    if (!(s > cfg.s_min()) || s > 1.0) throw DomainError("sigma_k_sq: s must lie in (s_min, 1]");
    // With min(u, v) = int_0^s 1(r < u) 1(r < v) dr, the double integral
    // collapses to int_0^s (int_r^s w)^2 dr.
    const auto breaks = weight_breaks(cfg, s, 0.0, s);
    const double numerator = integrate(
        [&](double r) {
            const double tail = weight_tail(cfg, r, s);
            return tail * tail;
        },
        0.0, s, breaks, {1e-14, 1e-10});
    const double denominator = cfg.zeta * weight_mass(cfg, s);
    if (!(denominator > 0.0)) throw DegenerateError("limit weights vanish");
    return numerator / (denominator * denominator);
}

double drift_term(const LimitConfig& cfg, double s) {
    cfg.validate();
    if (!cfg.drift) throw DomainError("drift_term needs a drift");
    if (!(s > 0.0) || s > 1.0) throw DomainError("drift_term: s must lie in (0, 1]");
    const auto extra = drift_breaks(cfg);
    const auto breaks = weight_breaks(cfg, s, 0.0, s, extra);
    const double numerator = integrate(
        [&](double r) { return limit_weight(cfg, r, s) * integrated_drift(cfg, r); }, 0.0, s,
        breaks, {1e-13, 1e-10});
    const double mass = weight_mass(cfg, s);
    if (!(mass > 0.0)) throw DegenerateError("limit weights vanish");
    return numerator / (std::pow(cfg.zeta, 1.5) * mass);
}

double first_crossing(const Eigen::Ref<const Eigen::VectorXd>& path, double c, double a) {
    const long M = static_cast<long>(path.size());
    for (long j = first_grid_index(a, M); j <= M; ++j) {
        if (path[j - 1] > c) return static_cast<double>(j) / static_cast<double>(M);
    }
    return 1.0;
}

double limit_stop_sample(const LimitConfig& cfg, double c, double a, std::uint64_t seed) {
    if (!(a >= 0.0 && a < 1.0)) throw DomainError("start fraction a must lie in [0, 1)");
    const Eigen::VectorXd path =
        cfg.drift ? alt_limit_process(cfg, seed) : null_limit_process(cfg, seed);
    return first_crossing(path, c, a);
}

Eigen::MatrixXd limit_stop_samples(const LimitConfig& cfg, std::span<const double> c_grid,
                                   double a, long reps, std::uint64_t seed, bool with_drift,
                                   unsigned jobs) {
    if (!(a >= 0.0 && a < 1.0)) throw DomainError("start fraction a must lie in [0, 1)");
    if (reps < 1) throw DomainError("reps must be at least 1");
    if (with_drift && !cfg.drift) throw DomainError("with_drift requested without a drift");
    const LimitPathSampler sampler(cfg);
    const long M = cfg.grid_M;
    const long j0 = first_grid_index(a, M);
    const auto nc = static_cast<Eigen::Index>(c_grid.size());
    Eigen::MatrixXd out(reps, nc);
    const long batches = (reps + kBatchColumns - 1) / kBatchColumns;
    parallel_for(batches, jobs, [&](long b) {
        const long first = b * kBatchColumns;
        const long count = std::min(kBatchColumns, reps - first);
        const Eigen::MatrixXd paths = sampler.sample(first, count, seed, with_drift);
        std::vector<double> running(static_cast<std::size_t>(M - j0 + 1));
        for (long col = 0; col < count; ++col) {
            double top = -std::numeric_limits<double>::infinity();
            for (long j = j0; j <= M; ++j) {
                const double v = paths(j - 1, col);
                if (v > top) top = v;
                running[static_cast<std::size_t>(j - j0)] = top;
            }
            for (Eigen::Index k = 0; k < nc; ++k) {
                const auto it = std::upper_bound(running.begin(), running.end(), c_grid[k]);
                out(first + col, k) =
                    it == running.end()
                        ? 1.0
                        : static_cast<double>(j0 + (it - running.begin())) / static_cast<double>(M);
            }
        }
    });
    return out;
}

double asymptotic_normed_delay(const LimitConfig& cfg, double c, double a, long resolution) {
    if (!cfg.drift) throw DomainError("asymptotic_normed_delay needs a drift");
    if (!(a >= 0.0 && a < 1.0)) throw DomainError("start fraction a must lie in [0, 1)");
    const long res = resolution > 0 ? resolution : cfg.grid_M;
    auto mu = [&](double s) { return s > 0.0 ? drift_term(cfg, s) : 0.0; };
    if (mu(a) > c) return a;
    double previous = a;
    for (long k = 1; k <= res; ++k) {
        const double s = static_cast<double>(k) / static_cast<double>(res);
        if (!(s > a)) continue;
        if (mu(s) > c) {
            double lo = previous;
            double hi = s;
            while (hi - lo > 1e-12) {
                const double mid = 0.5 * (lo + hi);
                (mu(mid) > c ? hi : lo) = mid;
            }
            return hi;
        }
        previous = s;
    }
    return 1.0;
}

double km_integral(const KernelSpec& kernel, const GenericAlternative& m0, double x) {
    if (!(x > 0.0)) return 0.0;
    std::vector<double> breaks;
    for (double b : kernel.breakpoints()) {
        if (x + b > 0.0 && x + b < x) breaks.push_back(x + b);
    }
    for (double t : m0.breakpoints()) {
        if (t > 0.0 && t < x) breaks.push_back(t);
    }
    std::sort(breaks.begin(), breaks.end());
    return integrate([&](double s) { return kernel(s - x) * m0.cumulative(s); }, 0.0, x, breaks);
}

bool check_km_condition(const KernelSpec& kernel, const GenericAlternative& m0, double c,
                        double zeta) {
    constexpr long kPoints = 200;
    constexpr double kOverflowGuard = 1e300;
    bool exceeded = false;
    for (long i = 0; i <= kPoints; ++i) {
        const double x = 2.0 * zeta * static_cast<double>(i) / static_cast<double>(kPoints);
        double value;
        try {
            value = km_integral(kernel, m0, x);
        } catch (const std::exception&) {
            return false;
        }
        if (!std::isfinite(value) || std::abs(value) > kOverflowGuard) return false;
        if (value > c) exceeded = true;
    }
    return exceeded;
}

}  // namespace driftwatch

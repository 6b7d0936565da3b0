#include "driftwatch/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "driftwatch/csv.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/estimator.hpp"
#include "driftwatch/normal.hpp"
#include "driftwatch/parallel.hpp"
#include "driftwatch/random.hpp"

namespace driftwatch {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr long kBatchColumns = 256;

void check_grid(std::span<const double> c_grid) {
    if (c_grid.empty()) throw DomainError("threshold grid is empty");
    for (std::size_t k = 0; k < c_grid.size(); ++k) {
        if (!std::isfinite(c_grid[k])) throw DomainError("thresholds must be finite");
        if (k > 0 && c_grid[k] < c_grid[k - 1]) throw DomainError("threshold grid must be sorted");
    }
}

// Writes the normed stopping time of one trajectory for every threshold into
// `row`. `length` is the horizon (N or M); entries before j0 and NaN entries
// are not eligible.
template <class Row>
void stops_for_thresholds(const Eigen::Ref<const Eigen::VectorXd>& trajectory, long j0,
                          std::span<const double> c_grid, std::vector<double>& running,
                          Row&& row) {
    const long length = static_cast<long>(trajectory.size());
    running.resize(static_cast<std::size_t>(std::max(0L, length - j0 + 1)));
    double top = -std::numeric_limits<double>::infinity();
    for (long j = j0; j <= length; ++j) {
        const double v = trajectory[j - 1];
        if (v > top) top = v;
        running[static_cast<std::size_t>(j - j0)] = top;
    }
    for (std::size_t k = 0; k < c_grid.size(); ++k) {
        const auto it = std::upper_bound(running.begin(), running.end(), c_grid[k]);
        const long index = it == running.end() ? length : j0 + static_cast<long>(it - running.begin());
        row(static_cast<Eigen::Index>(k)) = static_cast<double>(index) / static_cast<double>(length);
    }
}

// Divides the scaled trajectory by the prequential variance estimate.
void standardize(Eigen::Ref<Eigen::VectorXd> trajectory, const Eigen::Ref<const Eigen::VectorXd>& y,
                 VarianceMethod method, std::span<const double> prerun, long first) {
    VarianceAccumulator acc(method);
    acc.add_prerun(prerun);
    for (Eigen::Index n = 0; n < y.size(); ++n) {
        acc.push(y[n]);
        if (!acc.ready()) {
            trajectory[n] = kNaN;
            continue;
        }
        const double v = acc.estimate().value;
        if (v > 0.0) {
            trajectory[n] /= std::sqrt(v);
        } else if (n + 1 >= first) {
            throw DegenerateError("variance estimate is zero", static_cast<long>(n + 1));
        } else {
            trajectory[n] = kNaN;
        }
    }
}

Eigen::VectorXd walk(const InnovationSpec& innovations, long n, std::uint64_t seed) {
    SeriesSpec spec;
    spec.N = n;
    spec.innovations = innovations;
    return generate(spec, seed).values;
}

long finite_first_index(long N, double a) {
    return std::max(1L, static_cast<long>(std::floor(static_cast<double>(N) * a)));
}

Eigen::MatrixXd finite_stops(const FiniteSampleVariant& v, const KernelSpec& kernel,
                             std::span<const double> c_grid, double a, long reps,
                             std::uint64_t seed, unsigned jobs) {
    if (v.N < 2) throw DomainError("finite-sample variant needs N >= 2");
    if (v.prerun < 0) throw DomainError("prerun length must be nonnegative");
    SmootherConfig smoother{kernel, v.h, Scaling::null_scale, std::nullopt};
    const Eigen::MatrixXd W =
        smoother_matrix(smoother, v.N) * scaling_factor(Scaling::null_scale, v.h, v.N);
    const long j0 = finite_first_index(v.N, a);
    Eigen::MatrixXd out(reps, static_cast<Eigen::Index>(c_grid.size()));
    const long batches = (reps + kBatchColumns - 1) / kBatchColumns;
    parallel_for(batches, jobs, [&](long b) {
        const long first = b * kBatchColumns;
        const long count = std::min(kBatchColumns, reps - first);
        Eigen::MatrixXd Y(v.N, count);
        for (long col = 0; col < count; ++col) {
            Y.col(col) = walk(v.innovations, v.N, substream_seed(seed, first + col));
        }
        Eigen::MatrixXd T = W * Y;
        std::vector<double> running;
        for (long col = 0; col < count; ++col) {
            if (v.variance) {
                Eigen::VectorXd pre;
                if (v.prerun >= 2) {
                    pre = walk(v.innovations, v.prerun,
                               substream_seed(substream_seed(seed, first + col), 1));
                }
                standardize(T.col(col), Y.col(col), *v.variance,
                            std::span<const double>(pre.data(), pre.size()), j0);
            }
            stops_for_thresholds(T.col(col), j0, c_grid, running, out.row(first + col));
        }
    });
    return out;
}

}  // namespace

Eigen::MatrixXd normed_stopping_times(const ArlVariant& variant, const KernelSpec& kernel,
                                      std::span<const double> c_grid, double a, long reps,
                                      std::uint64_t seed, unsigned jobs) {
    check_grid(c_grid);
    if (reps < 1) throw DomainError("reps must be at least 1");
    if (!(a >= 0.0 && a < 1.0)) throw DomainError("start fraction a must lie in [0, 1)");
    if (const auto* finite = std::get_if<FiniteSampleVariant>(&variant)) {
        return finite_stops(*finite, kernel, c_grid, a, reps, seed, jobs);
    }
    LimitConfig cfg = std::get<LimitVariant>(variant).config;
    cfg.kernel = kernel;
    cfg.drift.reset();
    return limit_stop_samples(cfg, c_grid, a, reps, seed, false, jobs);
}

CalibrationTable arl_curve(const ArlVariant& variant, const KernelSpec& kernel,
                           std::span<const double> c_grid, long reps, std::uint64_t seed,
                           double a, unsigned jobs) {
    const Eigen::MatrixXd stops = normed_stopping_times(variant, kernel, c_grid, a, reps, seed, jobs);
    CalibrationTable table;
    table.c = Eigen::Map<const Eigen::VectorXd>(c_grid.data(), static_cast<Eigen::Index>(c_grid.size()));
    table.normed_arl = stops.colwise().mean().transpose();
    table.meta.kernel = kernel.name();
    table.meta.reps = reps;
    table.meta.seed = seed;
    table.meta.start_fraction = a;
    if (const auto* finite = std::get_if<FiniteSampleVariant>(&variant)) {
        table.meta.variant = "finite-sample";
        table.meta.N = finite->N;
        table.meta.h = finite->h;
        table.meta.zeta = static_cast<double>(finite->N) / finite->h;
    } else {
        table.meta.variant = "limit";
        table.meta.zeta = std::get<LimitVariant>(variant).config.zeta;
    }
    return table;
}

double critical_value_for_arl(const CalibrationTable& table, double target) {
    const auto& c = table.c;
    const auto& arl = table.normed_arl;
    const Eigen::Index n = arl.size();
    if (n == 0 || c.size() != n) throw DomainError("calibration table is empty or inconsistent");
    if (!(target >= arl[0] && target <= arl[n - 1])) {
        throw DomainError("target normed ARL outside the tabulated range [" +
                          format_report(arl[0]) + ", " + format_report(arl[n - 1]) + "]");
    }
    Eigen::Index k = 0;
    while (arl[k] < target) ++k;
    if (arl[k] == target) {
        while (k + 1 < n && arl[k + 1] == target) ++k;
        return c[k];
    }
    const double w = (target - arl[k - 1]) / (arl[k] - arl[k - 1]);
    return c[k - 1] + w * (c[k] - c[k - 1]);
}

double coverage_sim(long N, double h, const KernelSpec& kernel, double alpha, long reps,
                    std::uint64_t seed, std::optional<VarianceMethod> variance, long prerun,
                    unsigned jobs) {
    if (N < 2 || !(h > 0.0)) throw DomainError("coverage_sim: need N >= 2 and h > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (reps < 1) throw DomainError("reps must be at least 1");
    if (prerun < 0) throw DomainError("prerun length must be nonnegative");
    LimitConfig limit;
    limit.zeta = static_cast<double>(N) / h;
    limit.kernel = kernel;
    const double sigma_k = std::sqrt(sigma_k_sq(limit, 1.0));
    const double z = normal_quantile(1.0 - 0.5 * alpha);
    const double n = static_cast<double>(N);
    const double half_unit = z * sigma_k * n * std::sqrt(n) / h;

    Eigen::VectorXd w(N);
    for (long k = 0; k < N; ++k) w[k] = kernel(-static_cast<double>(k) / h);
    const double mass = w.sum();
    if (!(mass > 0.0)) throw DegenerateError("kernel weights vanish at index N", N);

    const InnovationSpec innovations = InnovationSpec::iid(1.0);
    std::vector<char> covered(static_cast<std::size_t>(reps), 0);
    parallel_for(reps, jobs, [&](long r) {
        const std::uint64_t s = substream_seed(seed, r);
        const Eigen::VectorXd y = walk(innovations, N, s);
        const double m_hat = w.dot(y.reverse()) / mass;
        double sigma_hat = 1.0;
        if (variance) {
            VarianceAccumulator acc(*variance);
            if (prerun >= 2) {
                const Eigen::VectorXd pre = walk(innovations, prerun, substream_seed(s, 1));
                acc.add_prerun(std::span<const double>(pre.data(), pre.size()));
            }
            for (long i = 0; i < N; ++i) acc.push(y[i]);
            sigma_hat = acc.ready() ? std::sqrt(acc.estimate().value) : 0.0;
        }
        covered[static_cast<std::size_t>(r)] = std::abs(m_hat) <= half_unit * sigma_hat;
    });
    long hits = 0;
    for (char c : covered) hits += c;
    return static_cast<double>(hits) / static_cast<double>(reps);
}

CurveComparison compare_curves(const CalibrationTable& first, const CalibrationTable& second) {
    if (first.c.size() != second.c.size() || first.c != second.c) {
        throw DomainError("curves must share the same threshold axis");
    }
    CurveComparison out;
    out.c = first.c;
    out.first = first.normed_arl;
    out.second = second.normed_arl;
    out.difference = out.first - out.second;
    const auto count = static_cast<double>(out.c.size());
    out.fraction_nonnegative = (out.difference.array() >= 0.0).cast<double>().sum() / count;
    out.mean_abs_gap = out.difference.cwiseAbs().mean();
    return out;
}

CurveComparison conservativeness_check(long N, double h, const KernelSpec& kernel,
                                       std::span<const double> c_grid, long reps,
                                       std::uint64_t seed, std::optional<VarianceMethod> variance,
                                       unsigned jobs) {
    check_grid(c_grid);
    if (N < 2 || !(h > 0.0)) throw DomainError("conservativeness_check: need N >= 2 and h > 0");
    if (reps < 1) throw DomainError("reps must be at least 1");
    LimitConfig cfg;
    cfg.zeta = static_cast<double>(N) / h;
    cfg.kernel = kernel;
    const long per_step = (2048 + N - 1) / N;
    cfg.grid_M = std::max(64L, per_step * N);
    const LimitPathSampler sampler(cfg);
    const long stride = cfg.grid_M / N;

    SmootherConfig smoother{kernel, h, Scaling::null_scale, std::nullopt};
    const Eigen::MatrixXd W = smoother_matrix(smoother, N) * scaling_factor(Scaling::null_scale, h, N);
    const auto nc = static_cast<Eigen::Index>(c_grid.size());
    Eigen::MatrixXd finite(reps, nc);
    Eigen::MatrixXd limit(reps, nc);
    const long batches = (reps + kBatchColumns - 1) / kBatchColumns;
    const double root_n = std::sqrt(static_cast<double>(N));
    parallel_for(batches, jobs, [&](long b) {
        const long first = b * kBatchColumns;
        const long count = std::min(kBatchColumns, reps - first);
        Eigen::MatrixXd bm(cfg.grid_M + 1, count);
        for (long col = 0; col < count; ++col) {
            bm.col(col) = sample_bm(cfg.grid_M, substream_seed(seed, first + col));
        }
        const Eigen::MatrixXd paths = sampler.null_paths(bm);
        Eigen::MatrixXd Y(N, count);
        for (long n = 1; n <= N; ++n) Y.row(n - 1) = root_n * bm.row(n * stride);
        Eigen::MatrixXd T = W * Y;
        std::vector<double> running;
        for (long col = 0; col < count; ++col) {
            if (variance) standardize(T.col(col), Y.col(col), *variance, {}, 1);
            stops_for_thresholds(T.col(col), 1, c_grid, running, finite.row(first + col));
            stops_for_thresholds(paths.col(col), 1, c_grid, running, limit.row(first + col));
        }
    });
    CalibrationTable f, l;
    f.c = l.c = Eigen::Map<const Eigen::VectorXd>(c_grid.data(), nc);
    f.normed_arl = finite.colwise().mean().transpose();
    l.normed_arl = limit.colwise().mean().transpose();
    return compare_curves(f, l);
}

KernelComparison kernel_comparison_curves(const std::vector<KernelSpec>& candidates,
                                          const GenericAlternative& m0, double zeta, double c,
                                          long points) {
    if (candidates.empty()) throw DomainError("kernel comparison needs at least one candidate");
    if (points < 2) throw DomainError("kernel comparison needs at least two curve points");
    KernelComparison out;
    out.s = Eigen::VectorXd::LinSpaced(points, 1.0 / static_cast<double>(points), 1.0);
    for (const auto& kernel : candidates) {
        LimitConfig cfg;
        cfg.zeta = zeta;
        cfg.kernel = kernel;
        cfg.drift = LimitDrift{m0, false, 0.5};
        Eigen::VectorXd curve(points);
        for (long i = 0; i < points; ++i) curve[i] = drift_term(cfg, out.s[i]);
        out.names.push_back(kernel.name());
        out.curves.push_back(std::move(curve));
        out.crossings.push_back(asymptotic_normed_delay(cfg, c, 0.0));
    }
    out.best = static_cast<std::size_t>(
        std::min_element(out.crossings.begin(), out.crossings.end()) - out.crossings.begin());
    return out;
}

void write_calibration_csv(std::ostream& out, const CalibrationTable& table) {
    if (table.c.size() != table.normed_arl.size()) throw DomainError("table columns differ in length");
    out << "c,normed_arl\n";
    for (long j = 0; j < table.c.size(); ++j) {
        out << format_report(table.c[j]) << ',' << format_report(table.normed_arl[j]) << '\n';
    }
}

}  // namespace driftwatch

#include "driftwatch/seriesgen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "driftwatch/csv.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/random.hpp"

namespace driftwatch {

// ---------------------------------------------------------------------------
// GenericAlternative

GenericAlternative GenericAlternative::zero() { return GenericAlternative{}; }

GenericAlternative GenericAlternative::step() {
    GenericAlternative m;
    m.shape_ = AlternativeShape::step;
    return m;
}

GenericAlternative GenericAlternative::ramp() {
    GenericAlternative m;
    m.shape_ = AlternativeShape::ramp;
    return m;
}

GenericAlternative GenericAlternative::tabulated(Eigen::VectorXd t, Eigen::VectorXd m) {
    if (t.size() < 1 || t.size() != m.size()) {
        throw DomainError("tabulated alternative needs matching (t, m0) knots");
    }
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(m[i])) {
            throw DomainError("tabulated alternative knots must be finite");
        }
        if (m[i] < 0.0) throw DomainError("generic alternative must be nonnegative");
        if (i == 0 && t[i] < 0.0) throw DomainError("tabulated alternative starts before t = 0");
        if (i > 0 && t[i] < t[i - 1]) {
            throw DomainError("tabulated alternative knots must be nondecreasing in t");
        }
        if (i > 1 && t[i] == t[i - 1] && t[i - 1] == t[i - 2]) {
            throw DomainError("a jump knot may be repeated only once");
        }
    }
    GenericAlternative alt;
    alt.shape_ = AlternativeShape::tabulated;
    alt.cum_.resize(t.size());
    alt.cum_[0] = m[0] * t[0];
    for (Eigen::Index i = 1; i < t.size(); ++i) {
        alt.cum_[i] = alt.cum_[i - 1] + 0.5 * (m[i] + m[i - 1]) * (t[i] - t[i - 1]);
    }
    alt.t_ = std::move(t);
    alt.m_ = std::move(m);
    return alt;
}

GenericAlternative GenericAlternative::from_name(std::string_view name) {
    if (name == "zero") return zero();
    if (name == "step") return step();
    if (name == "ramp") return ramp();
    throw DomainError("unknown generic alternative '" + std::string(name) + "'");
}

std::string GenericAlternative::name() const {
    switch (shape_) {
        case AlternativeShape::zero: return "zero";
        case AlternativeShape::step: return "step";
        case AlternativeShape::ramp: return "ramp";
        case AlternativeShape::tabulated: return "tabulated";
    }
    return "unknown";
}

double GenericAlternative::operator()(double t) const {
    if (!(t > 0.0)) return 0.0;
    switch (shape_) {
        case AlternativeShape::zero: return 0.0;
        case AlternativeShape::step: return 1.0;
        case AlternativeShape::ramp: return t;
        case AlternativeShape::tabulated: {
            const double* begin = t_.data();
            const double* end = begin + t_.size();
            const auto it = std::upper_bound(begin, end, t);
            if (it == begin) return m_[0];
            if (it == end) return m_[m_.size() - 1];
            const auto hi = static_cast<Eigen::Index>(it - begin);
            const auto lo = hi - 1;
            const double w = (t - t_[lo]) / (t_[hi] - t_[lo]);
            return (1.0 - w) * m_[lo] + w * m_[hi];
        }
    }
    return 0.0;
}

double GenericAlternative::cumulative(double t) const {
    if (!(t > 0.0)) return 0.0;
    switch (shape_) {
        case AlternativeShape::zero: return 0.0;
        case AlternativeShape::step: return t;
        case AlternativeShape::ramp: return 0.5 * t * t;
        case AlternativeShape::tabulated: {
            const double* begin = t_.data();
            const double* end = begin + t_.size();
            const auto it = std::upper_bound(begin, end, t);
            if (it == begin) return m_[0] * t;
            const auto lo = static_cast<Eigen::Index>(it - begin) - 1;
            // (*this)(t) is linear on [t_lo, t] so the trapezoid is exact
            return cum_[lo] + 0.5 * (m_[lo] + (*this)(t)) * (t - t_[lo]);
        }
    }
    return 0.0;
}

std::vector<double> GenericAlternative::breakpoints() const {
    std::vector<double> points{0.0};
    if (shape_ == AlternativeShape::tabulated) {
        points.insert(points.end(), t_.data(), t_.data() + t_.size());
    }
    return points;
}

GenericAlternative read_alternative_csv(std::istream& in) {
    auto [t, m] = read_two_column_csv(in, "t", "m0");
    return GenericAlternative::tabulated(std::move(t), std::move(m));
}

// ---------------------------------------------------------------------------
// Drift

void DriftSpec::validate() const {
    if (!(beta > -1.0 && beta <= 0.0)) throw DomainError("drift rate beta must lie in (-1, 0]");
    if (!(h_link > 0.0)) throw DomainError("drift bandwidth h_N must be positive");
    if (const auto* cp1 = std::get_if<ChangePointFixed>(&change_point)) {
        if (cp1->q < 0) throw DomainError("CP1 change point q must be nonnegative");
    } else {
        const double theta = std::get<ChangePointFraction>(change_point).theta;
        if (!(theta > 0.0 && theta < 1.0)) throw DomainError("CP2 fraction must lie in (0, 1)");
    }
}

double change_point_index(const DriftSpec& d, long N) {
    if (N < 1) throw DomainError("horizon N must be at least 1");
    if (const auto* cp1 = std::get_if<ChangePointFixed>(&d.change_point)) {
        return static_cast<double>(cp1->q);
    }
    return std::floor(static_cast<double>(N) * std::get<ChangePointFraction>(d.change_point).theta);
}

double drift_at(const DriftSpec& d, double t, double t_q) {
    const double shape = d.m0((t - t_q) / d.h_link);
    if (shape == 0.0) return 0.0;
    return shape * std::pow(d.h_link, d.beta);
}

double drift_value(const DriftSpec& d, double t, long N) {
    d.validate();
    return drift_at(d, t, change_point_index(d, N));
}

// ---------------------------------------------------------------------------
// Innovations

InnovationSpec InnovationSpec::iid(double sigma) {
    InnovationSpec s;
    s.sigma = sigma;
    return s;
}

InnovationSpec InnovationSpec::ar1(double a, double sigma) {
    InnovationSpec s;
    s.family = InnovationFamily::ar1;
    s.ar_a = a;
    s.sigma = sigma;
    return s;
}

InnovationSpec InnovationSpec::garch11(double alpha0, double alpha1, double beta1, double sigma) {
    InnovationSpec s;
    s.family = InnovationFamily::garch11;
    s.garch_alpha0 = alpha0;
    s.garch_alpha1 = alpha1;
    s.garch_beta1 = beta1;
    s.sigma = sigma;
    return s;
}

void InnovationSpec::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError("innovation scale sigma must be positive");
    }
    if (family == InnovationFamily::ar1 && !(std::abs(ar_a) < 1.0)) {
        throw DomainError("AR coefficient must satisfy |a| < 1");
    }
    if (family == InnovationFamily::garch11) {
        if (!(garch_alpha0 > 0.0) || garch_alpha1 < 0.0 || garch_beta1 < 0.0 ||
            !(garch_alpha1 + garch_beta1 < 1.0)) {
            throw DomainError("GARCH(1,1) needs alpha0 > 0, alpha1, beta1 >= 0, alpha1 + beta1 < 1");
        }
    }
}

double InnovationSpec::long_run_variance() const {
    if (family == InnovationFamily::garch11) {
        return sigma * sigma * garch_alpha0 / (1.0 - garch_alpha1 - garch_beta1);
    }
    return sigma * sigma;
}

Eigen::VectorXd innovation_stream(const InnovationSpec& spec, long n, std::uint64_t seed) {
    spec.validate();
    if (n < 0) throw DomainError("innovation_stream: negative length");
    Rng rng(seed);
    Eigen::VectorXd u(n);
    if (spec.family != InnovationFamily::garch11) {
        for (long i = 0; i < n; ++i) u[i] = spec.sigma * rng.normal();
        return u;
    }
    const double a0 = spec.garch_alpha0;
    const double a1 = spec.garch_alpha1;
    const double b1 = spec.garch_beta1;
    double variance = a0 / (1.0 - a1 - b1);
    double previous = std::sqrt(variance) * rng.normal();
    for (int i = 0; i < kGarchBurnIn; ++i) {
        variance = a0 + a1 * previous * previous + b1 * variance;
        previous = std::sqrt(variance) * rng.normal();
    }
    for (long i = 0; i < n; ++i) {
        variance = a0 + a1 * previous * previous + b1 * variance;
        previous = std::sqrt(variance) * rng.normal();
        u[i] = spec.sigma * previous;
    }
    return u;
}

// ---------------------------------------------------------------------------
// Time designs

TimeDesign TimeDesign::power(double gamma, DesignMode mode) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw DomainError("power design needs gamma > 0");
    }
    TimeDesign td;
    td.mode_ = mode;
    td.gamma_ = gamma;
    return td;
}

TimeDesign TimeDesign::tabulated(Eigen::VectorXd u, Eigen::VectorXd x, DesignMode mode) {
    if (u.size() < 2 || u.size() != x.size()) {
        throw DomainError("tabulated design needs at least two matching (u, x) knots");
    }
    if (u[0] != 0.0 || u[u.size() - 1] != 1.0 || x[0] != 0.0 || x[x.size() - 1] != 1.0) {
        throw DomainError("tabulated design must map 0 -> 0 and 1 -> 1");
    }
    for (Eigen::Index i = 1; i < u.size(); ++i) {
        if (!(u[i] > u[i - 1]) || x[i] < x[i - 1]) {
            throw DomainError("tabulated design must be increasing in u and nondecreasing in x");
        }
    }
    TimeDesign td;
    td.mode_ = mode;
    td.tabulated_ = true;
    td.u_ = std::move(u);
    td.x_ = std::move(x);
    return td;
}

TimeDesign& TimeDesign::with_snap_grid(double spacing) {
    if (!(spacing > 0.0)) throw DomainError("snap grid spacing must be positive");
    snap_ = spacing;
    return *this;
}

double TimeDesign::inverse(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    if (!tabulated_) return gamma_ == 1.0 ? u : std::pow(u, 1.0 / gamma_);
    const double* begin = u_.data();
    const double* end = begin + u_.size();
    const auto it = std::upper_bound(begin, end, u);
    if (it == end) return x_[x_.size() - 1];
    const auto hi = static_cast<Eigen::Index>(it - begin);
    const auto lo = hi - 1;
    const double w = (u - u_[lo]) / (u_[hi] - u_[lo]);
    return (1.0 - w) * x_[lo] + w * x_[hi];
}

double TimeDesign::forward(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    if (!tabulated_) return gamma_ == 1.0 ? x : std::pow(x, gamma_);
    const double* begin = x_.data();
    const double* end = begin + x_.size();
    const auto it = std::lower_bound(begin, end, x);
    if (it == begin) return 0.0;
    if (it == end) return 1.0;
    const auto hi = static_cast<Eigen::Index>(it - begin);
    const auto lo = hi - 1;
    const double w = (x - x_[lo]) / (x_[hi] - x_[lo]);
    return (1.0 - w) * u_[lo] + w * u_[hi];
}

bool TimeDesign::is_uniform() const { return !tabulated_ && gamma_ == 1.0; }

double snap_to_grid(double x, double spacing) {
    const double lower = std::floor(x / spacing) * spacing;
    const double upper = lower + spacing;
    return (x - lower <= upper - x) ? lower : upper;
}

std::vector<double> design_times(const TimeDesign& td, long n, long N) {
    if (n < 1 || n > N) throw DomainError("design_times: need 1 <= n <= N");
    const double scale = td.mode() == DesignMode::cp1_rolling ? static_cast<double>(n)
                                                              : static_cast<double>(N);
    std::vector<double> times(static_cast<std::size_t>(n));
    for (long i = 1; i <= n; ++i) {
        double t = i == static_cast<long>(scale) ? scale : scale * td.inverse(i / scale);
        if (td.snap_grid()) t = snap_to_grid(t, *td.snap_grid());
        times[static_cast<std::size_t>(i - 1)] = t;
    }
    return times;
}

// ---------------------------------------------------------------------------
// Series

void TimeSeries::validate() const {
    if (times.size() != values.size()) throw DomainError("series times and values differ in length");
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (!std::isfinite(times[i]) || !std::isfinite(values[i])) {
            throw DomainError("series contains a non-finite entry at row " + std::to_string(i + 1));
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw DomainError("series times must be strictly increasing (row " +
                              std::to_string(i + 1) + ")");
        }
    }
}

TimeSeries TimeSeries::equidistant(Eigen::VectorXd values) {
    TimeSeries s;
    s.times = Eigen::VectorXd::LinSpaced(values.size(), 1.0, static_cast<double>(values.size()));
    s.values = std::move(values);
    return s;
}

TimeSeries generate(const SeriesSpec& spec, std::uint64_t seed) {
    if (spec.N < 2) throw DomainError("generate: horizon N must be at least 2");
    spec.innovations.validate();
    spec.drift.validate();
    const long N = spec.N;

    TimeSeries series;
    series.times.resize(N);
    const bool fixed_design = spec.design && spec.design->mode() == DesignMode::cp2_fixed;
    if (fixed_design) {
        const auto t = design_times(*spec.design, N, N);
        series.times = Eigen::Map<const Eigen::VectorXd>(t.data(), N);
    } else {
        series.times = Eigen::VectorXd::LinSpaced(N, 1.0, static_cast<double>(N));
    }

    double t_q = change_point_index(spec.drift, N);
    if (fixed_design && t_q >= 1.0) {
        t_q = static_cast<double>(N) * spec.design->inverse(t_q / static_cast<double>(N));
        if (spec.design->snap_grid()) t_q = snap_to_grid(t_q, *spec.design->snap_grid());
    }

    const Eigen::VectorXd u = innovation_stream(spec.innovations, N, seed);
    const bool ar = spec.innovations.family == InnovationFamily::ar1;
    const double a = ar ? spec.innovations.ar_a : 1.0;
    double level = 0.0;
    if (ar) {
        Rng start(substream_seed(seed, 0));
        level = spec.innovations.sigma / std::sqrt(1.0 - a * a) * start.normal();
    }
    series.values.resize(N);
    for (long n = 0; n < N; ++n) {
        level = a * level + drift_at(spec.drift, series.times[n], t_q) + u[n];
        series.values[n] = level;
    }
    series.meta.seed = seed;
    series.meta.description = "N=" + std::to_string(N);
    series.validate();
    return series;
}

TimeSeries read_series_csv(std::istream& in) {
    auto [t, y] = read_two_column_csv(in, "t", "y");
    TimeSeries s{std::move(t), std::move(y), {}};
    s.validate();
    return s;
}

void write_series_csv(std::ostream& out, const TimeSeries& series) {
    write_two_column_csv(out, "t", "y",
                         std::span<const double>(series.times.data(), series.times.size()),
                         std::span<const double>(series.values.data(), series.values.size()));
}

}  // namespace driftwatch

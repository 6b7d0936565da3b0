#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace driftwatch {

// ---------------------------------------------------------------------------
// Generic alternatives m0

enum class AlternativeShape { zero, step, ramp, tabulated };

/// Shape m0 of the drift after the change. m0(t) = 0 for t <= 0 and m0 >= 0.
///
/// Besides point evaluation, the cumulative integral int_0^t m0 is available
/// in closed form, because every drift functional downstream integrates it.
/// Tabulated shapes interpolate linearly between knots (a repeated t value
/// encodes a jump), hold the last value beyond the final knot and are zero
/// for t <= 0.
class GenericAlternative {
public:
    static GenericAlternative zero();
    static GenericAlternative step();
    static GenericAlternative ramp();
    static GenericAlternative tabulated(Eigen::VectorXd t, Eigen::VectorXd m);
    static GenericAlternative from_name(std::string_view name);

    AlternativeShape shape() const { return shape_; }
    std::string name() const;

    double operator()(double t) const;

    /// int_0^t m0(u) du (0 for t <= 0).
    double cumulative(double t) const;

    /// Points where m0 is not smooth.
    std::vector<double> breakpoints() const;

private:
    GenericAlternative() = default;

    AlternativeShape shape_ = AlternativeShape::zero;
    Eigen::VectorXd t_;
    Eigen::VectorXd m_;
    Eigen::VectorXd cum_;  // int_0^{t_i} m0
};

GenericAlternative read_alternative_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Change-point models and drift

/// CP1: the change occurs at the fixed integer time q.
struct ChangePointFixed {
    long q = 0;
};

/// CP2: the change occurs at t_q = floor(N theta).
struct ChangePointFraction {
    double theta = 0.5;
};

using ChangePoint = std::variant<ChangePointFixed, ChangePointFraction>;

struct DriftSpec {
    GenericAlternative m0 = GenericAlternative::zero();
    double beta = 0.0;  // in (-1, 0]
    ChangePoint change_point = ChangePointFixed{0};
    double h_link = 1.0;  // h_N in m0((t - t_q) / h_N) h_N^beta

    void validate() const;
};

/// CP1 -> q; CP2 -> floor(N theta).
double change_point_index(const DriftSpec& d, long N);

/// m0((t - t_q) / h_N) h_N^beta for an explicit change-point time t_q.
double drift_at(const DriftSpec& d, double t, double t_q);

/// drift_at with t_q resolved from the horizon N.
double drift_value(const DriftSpec& d, double t, long N);

// ---------------------------------------------------------------------------
// Innovations

enum class InnovationFamily { iid_normal, ar1, garch11 };

/// `ar1` switches generation to the stationary AR(1) model
/// Y_n = a Y_{n-1} + m_n + u_n with i.i.d. normal u; `garch11` feeds
/// GARCH(1,1) innovations u_n = sigma * sqrt(v_n) e_n into the random walk.
struct InnovationSpec {
    InnovationFamily family = InnovationFamily::iid_normal;
    double sigma = 1.0;
    double ar_a = 0.0;
    double garch_alpha0 = 0.1;
    double garch_alpha1 = 0.1;
    double garch_beta1 = 0.8;

    static InnovationSpec iid(double sigma = 1.0);
    static InnovationSpec ar1(double a, double sigma = 1.0);
    static InnovationSpec garch11(double alpha0, double alpha1, double beta1, double sigma = 1.0);

    void validate() const;

    /// Long-run variance of the innovation sequence u_n.
    double long_run_variance() const;
};

/// Number of GARCH steps discarded before the first returned innovation.
inline constexpr int kGarchBurnIn = 500;

/// u_1..u_n for the given family, drawn from Rng(seed).
Eigen::VectorXd innovation_stream(const InnovationSpec& spec, long n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Time designs

enum class DesignMode { cp1_rolling, cp2_fixed };

/// Time design F_T^{-1}: [0,1] -> [0,1], nondecreasing with fixed endpoints.
///
/// CP1-rolling designs place the past observations of current time n at
/// n F^{-1}(i/n); CP2-fixed designs use N F^{-1}(i/N) once for the whole
/// horizon. With `snap_grid` set, design times snap to the nearest multiple
/// of the grid spacing, ties going to the smaller point.
class TimeDesign {
public:
    /// F^{-1}(u) = u^{1/gamma}.
    static TimeDesign power(double gamma, DesignMode mode);
    /// Monotone table of (u, F^{-1}(u)) knots spanning [0, 1].
    static TimeDesign tabulated(Eigen::VectorXd u, Eigen::VectorXd x, DesignMode mode);

    DesignMode mode() const { return mode_; }
    std::optional<double> snap_grid() const { return snap_; }
    TimeDesign& with_snap_grid(double spacing);

    /// F^{-1}(u); u is clamped to [0, 1].
    double inverse(double u) const;
    /// F(x), the generalized inverse of `inverse`; x is clamped to [0, 1].
    double forward(double x) const;

    bool is_uniform() const;

private:
    TimeDesign() = default;

    DesignMode mode_ = DesignMode::cp1_rolling;
    double gamma_ = 1.0;
    bool tabulated_ = false;
    Eigen::VectorXd u_;
    Eigen::VectorXd x_;
    std::optional<double> snap_;
};

double snap_to_grid(double x, double spacing);

/// CP1-rolling: {n F^{-1}(i/n)}_{i=1..n}; CP2-fixed: first n of {N F^{-1}(i/N)}.
std::vector<double> design_times(const TimeDesign& td, long n, long N);

// ---------------------------------------------------------------------------
// Series

struct SeriesMeta {
    std::optional<std::uint64_t> seed;
    std::string description;
};

/// Observations Y_1..Y_N at strictly increasing times.
struct TimeSeries {
    Eigen::VectorXd times;
    Eigen::VectorXd values;
    SeriesMeta meta;

    long size() const { return static_cast<long>(values.size()); }
    void validate() const;

    /// Equidistant series at times 1..n.
    static TimeSeries equidistant(Eigen::VectorXd values);
};

struct SeriesSpec {
    long N = 100;
    InnovationSpec innovations;
    DriftSpec drift;
    std::optional<TimeDesign> design;
};

/// Simulates Y_1..Y_N with Y_0 = 0 and Y_n = Y_{n-1} + m_{N,n} + u_n (AR
/// mode: Y_n = a Y_{n-1} + m_{N,n} + u_n with Y_0 from the stationary law).
/// u_n is `innovation_stream(spec.innovations, N, seed)`.
TimeSeries generate(const SeriesSpec& spec, std::uint64_t seed);

TimeSeries read_series_csv(std::istream& in);
void write_series_csv(std::ostream& out, const TimeSeries& series);

}  // namespace driftwatch

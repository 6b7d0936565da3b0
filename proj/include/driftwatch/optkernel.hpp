#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "driftwatch/kernels.hpp"
#include "driftwatch/seriesgen.hpp"

namespace driftwatch {

/// Optimal kernel K* tabulated on z in [-zeta s*, zeta s*]; K* is not
/// defined outside that interval.
struct OptimalSolution {
    double s_star = 1.0;
    double zeta = 1.0;
    double t_max = 1.0;
    double normalizer = 0.0;  // 2 int_0^{t_max} int_0^r m0
    Eigen::VectorXd z;
    Eigen::VectorXd k;
};

/// Number of points of the K* table.
inline constexpr long kOptimalKernelPoints = 1001;

/// R(s) = int_0^s G^2 / int_0^s G with G(r) = int_0^r m0 (R = 0 where G
/// vanishes identically on [0, s]).
double delay_ratio(const GenericAlternative& m0, double s);

/// inf{s in [0, 1] : R(s) > c}, 1 without a crossing; bracketed by a scan
/// at step 1e-3 and refined by bisection. Throws DomainError when m0
/// vanishes on [0, 1].
double optimal_delay(const GenericAlternative& m0, double c);

/// K*(z) = int_0^{z / zeta + s*} m0 / (2 int_0^{t_max} int_0^r m0), with m0
/// truncated to [0, t_max]. A nonpositive t_max selects t_max = zeta.
OptimalSolution optimal_kernel(const GenericAlternative& m0, double zeta, double c,
                               double t_max = 0.0);

/// Symmetric completion K~(z) = K*(-|z|), rescaled to unit mass, usable as
/// an ordinary tabulated kernel.
KernelSpec complete_kernel(const OptimalSolution& solution);

/// Mean of a tabulated kernel (zero for a symmetric completion).
double kernel_mean(const KernelSpec& kernel);

/// tau(K) = int_0^s K(zeta (r - s)) G(r) dr / int_0^s K(zeta (r - s)) dr.
double tau(const KernelSpec& kernel, const GenericAlternative& m0, double zeta, double s);

/// Cauchy-Schwarz bound on tau(K):
/// sqrt(int K(zeta(r-s))^2) sqrt(int G^2) / int K(zeta(r-s)) over [0, s].
double tau_bound(const KernelSpec& kernel, const GenericAlternative& m0, double zeta, double s);

struct OptimalityReport {
    double s_star = 1.0;
    double optimal_kernel_delay = 1.0;
    double completed_mean = 0.0;
    std::vector<std::string> names;
    std::vector<double> delays;
    double tolerance = 0.0;
    bool optimal = false;
    double tau_star = 0.0;       // tau of the completed K* at s*
    double tau_closed_form = 0.0;  // R(s*)
};

/// Asymptotic normed delay of the completed K* and of every candidate, all
/// under a CP1 drift m0; K* counts as optimal when its delay is at most
/// every candidate delay plus 2 / grid.
OptimalityReport verify_optimality(const GenericAlternative& m0, double zeta, double c,
                                   const std::vector<KernelSpec>& candidates, double t_max = 0.0,
                                   long grid = 10000);

void write_optimal_kernel_csv(std::ostream& out, const OptimalSolution& solution);

}  // namespace driftwatch

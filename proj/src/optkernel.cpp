#include "driftwatch/optkernel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "driftwatch/errors.hpp"
#include "driftwatch/limitsim.hpp"
#include "driftwatch/quadrature.hpp"

namespace driftwatch {
namespace {

constexpr double kScanStep = 1e-3;

std::vector<double> inner_breaks(const GenericAlternative& m0, double lo, double hi) {
    std::vector<double> out;
    for (double t : m0.breakpoints()) {
        if (t > lo && t < hi) out.push_back(t);
    }
    return out;
}

double integrated(const GenericAlternative& m0, double s, int power) {
    if (!(s > 0.0)) return 0.0;
    return integrate(
        [&](double r) {
            const double g = m0.cumulative(r);
            return power == 1 ? g : g * g;
        },
        0.0, s, inner_breaks(m0, 0.0, s), {1e-15, 1e-11});
}

// Kernel breakpoints mapped to r through z = zeta (r - s), inside (0, s).
std::vector<double> kernel_breaks(const KernelSpec& kernel, double zeta, double s,
                                  const GenericAlternative* m0 = nullptr) {
    std::vector<double> out;
    for (double b : kernel.breakpoints()) {
        const double r = s + b / zeta;
        if (r > 0.0 && r < s) out.push_back(r);
    }
    if (m0) {
        for (double t : inner_breaks(*m0, 0.0, s)) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

double delay_ratio(const GenericAlternative& m0, double s) {
    const double b = integrated(m0, s, 1);
    if (!(b > 0.0)) return 0.0;
    return integrated(m0, s, 2) / b;
}

double optimal_delay(const GenericAlternative& m0, double c) {
    if (!(integrated(m0, 1.0, 2) > 0.0)) {
        throw DomainError("optimal_delay: m0 vanishes on [0, 1], so int_0^s G^2 is not positive");
    }
    const long steps = static_cast<long>(std::lround(1.0 / kScanStep));
    double previous = 0.0;
    for (long k = 1; k <= steps; ++k) {
        const double s = static_cast<double>(k) * kScanStep;
        if (delay_ratio(m0, s) > c) {
            double lo = previous;
            double hi = s;
            while (hi - lo > 1e-12) {
                const double mid = 0.5 * (lo + hi);
                (delay_ratio(m0, mid) > c ? hi : lo) = mid;
            }
            return hi;
        }
        previous = s;
    }
    return 1.0;
}

OptimalSolution optimal_kernel(const GenericAlternative& m0, double zeta, double c,
                               double t_max) {
    if (!(zeta > 0.0)) throw DomainError("optimal_kernel: zeta must be positive");
    if (!(t_max > 0.0)) t_max = zeta;
    OptimalSolution sol;
    sol.zeta = zeta;
    sol.t_max = t_max;
    sol.s_star = optimal_delay(m0, c);
    sol.normalizer = 2.0 * integrated(m0, t_max, 1);
    if (!std::isfinite(sol.normalizer) || !(sol.normalizer > 0.0)) {
        throw DomainError("optimal_kernel: normalizer is not finite and positive");
    }
    const double half_width = zeta * sol.s_star;
    sol.z = Eigen::VectorXd::LinSpaced(kOptimalKernelPoints, -half_width, half_width);
    sol.k.resize(kOptimalKernelPoints);
    for (long i = 0; i < kOptimalKernelPoints; ++i) {
        const double upper = std::min(sol.z[i] / zeta + sol.s_star, t_max);
        sol.k[i] = m0.cumulative(upper) / sol.normalizer;
    }
    // the grid end points are exact
    sol.k[0] = 0.0;
    return sol;
}

KernelSpec complete_kernel(const OptimalSolution& solution) {
    const long half = (kOptimalKernelPoints - 1) / 2;  // index of z = 0
    const long points = 2 * half + 1;
    Eigen::VectorXd z(points);
    Eigen::VectorXd k(points);
    for (long i = 0; i <= half; ++i) {
        z[i] = solution.z[i];
        k[i] = solution.k[i];
        z[points - 1 - i] = -solution.z[i];
        k[points - 1 - i] = solution.k[i];
    }
    z[half] = 0.0;
    return KernelSpec::tabulated(std::move(z), std::move(k));
}

double kernel_mean(const KernelSpec& kernel) {
    return integrate([&](double z) { return z * kernel(z); }, kernel.support_lower(),
                     kernel.support_upper(), kernel.breakpoints());
}

double tau(const KernelSpec& kernel, const GenericAlternative& m0, double zeta, double s) {
    if (!(s > 0.0)) throw DomainError("tau: s must be positive");
    const auto breaks = kernel_breaks(kernel, zeta, s, &m0);
    const double num = integrate(
        [&](double r) { return kernel(zeta * (r - s)) * m0.cumulative(r); }, 0.0, s, breaks);
    const double den = integrate([&](double r) { return kernel(zeta * (r - s)); }, 0.0, s, breaks);
    if (!(den > 0.0)) throw DegenerateError("tau: kernel has no mass on [0, s]");
    return num / den;
}

double tau_bound(const KernelSpec& kernel, const GenericAlternative& m0, double zeta, double s) {
    if (!(s > 0.0)) throw DomainError("tau_bound: s must be positive");
    const auto breaks = kernel_breaks(kernel, zeta, s);
    const double k2 = integrate(
        [&](double r) {
            const double v = kernel(zeta * (r - s));
            return v * v;
        },
        0.0, s, breaks);
    const double k1 = integrate([&](double r) { return kernel(zeta * (r - s)); }, 0.0, s, breaks);
    if (!(k1 > 0.0)) throw DegenerateError("tau_bound: kernel has no mass on [0, s]");
    return std::sqrt(k2) * std::sqrt(integrated(m0, s, 2)) / k1;
}

OptimalityReport verify_optimality(const GenericAlternative& m0, double zeta, double c,
                                   const std::vector<KernelSpec>& candidates, double t_max,
                                   long grid) {
    if (grid < 2) throw DomainError("verify_optimality: grid must be at least 2");
    const OptimalSolution sol = optimal_kernel(m0, zeta, c, t_max);
    const KernelSpec completed = complete_kernel(sol);
    auto delay_of = [&](const KernelSpec& kernel) {
        LimitConfig cfg;
        cfg.zeta = zeta;
        cfg.kernel = kernel;
        cfg.drift = LimitDrift{m0, false, 0.5};
        return asymptotic_normed_delay(cfg, c, 0.0, grid);
    };
    OptimalityReport report;
    report.s_star = sol.s_star;
    report.optimal_kernel_delay = delay_of(completed);
    report.completed_mean = kernel_mean(completed);
    report.tolerance = 2.0 / static_cast<double>(grid);
    report.optimal = true;
    for (const auto& kernel : candidates) {
        report.names.push_back(kernel.name());
        report.delays.push_back(delay_of(kernel));
        if (report.optimal_kernel_delay > report.delays.back() + report.tolerance) {
            report.optimal = false;
        }
    }
    report.tau_star = tau(completed, m0, zeta, sol.s_star);
    report.tau_closed_form = delay_ratio(m0, sol.s_star);
    return report;
}

void write_optimal_kernel_csv(std::ostream& out, const OptimalSolution& solution) {
    write_kernel_csv(out, std::span<const double>(solution.z.data(), solution.z.size()),
                     std::span<const double>(solution.k.data(), solution.k.size()));
}

}  // namespace driftwatch

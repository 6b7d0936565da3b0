#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace driftwatch {

enum class KernelFamily { gaussian, epanechnikov, laplace, tabulated };

/// A smoothing kernel K: a Lipschitz continuous probability density.
///
/// Unbounded families are truncated at a finite radius (Gaussian 8,
/// Laplace 24), chosen so the discarded mass is below 1e-14; evaluation,
/// quadrature and weight sums all see the same truncated function.
/// Tabulated kernels interpolate linearly between knots, vanish outside the
/// knot range and are rescaled to unit mass on construction.
class KernelSpec {
public:
    static KernelSpec gaussian();
    static KernelSpec epanechnikov();
    static KernelSpec laplace();
    static KernelSpec tabulated(Eigen::VectorXd z, Eigen::VectorXd k);

    /// "gaussian", "epanechnikov", "laplace" (also "epan", "lap").
    static KernelSpec from_name(std::string_view name);

    KernelFamily family() const { return family_; }
    std::string name() const;

    double operator()(double z) const;

    double support_lower() const { return lower_; }
    double support_upper() const { return upper_; }
    double lipschitz() const { return lipschitz_; }

    /// Points where K is not smooth (support edges, kinks, knots).
    std::span<const double> breakpoints() const { return breaks_; }

    const Eigen::VectorXd& knots() const { return knots_z_; }
    const Eigen::VectorXd& knot_values() const { return knots_k_; }

private:
    KernelSpec() = default;

    KernelFamily family_ = KernelFamily::gaussian;
    double lower_ = 0.0;
    double upper_ = 0.0;
    double lipschitz_ = 0.0;
    std::vector<double> breaks_;
    Eigen::VectorXd knots_z_;
    Eigen::VectorXd knots_k_;
};

double eval_kernel(const KernelSpec& k, double z);

/// K_h(z) = K(z / h) / h.
double eval_rescaled(const KernelSpec& k, double h, double z);

/// Sum of K_h(t_i - t_now) over all times.
double weight_sum(const KernelSpec& k, double h, std::span<const double> times, double t_now);

/// zeta * int_0^s K(zeta (r - s)) dr, the limit of the weight sums.
double limit_weight_integral(const KernelSpec& k, double zeta, double s);

/// integral of K over [lo, hi] by adaptive quadrature.
double kernel_mass(const KernelSpec& k, double lo, double hi);

KernelSpec read_kernel_csv(std::istream& in);
KernelSpec load_kernel_csv(const std::string& path);
void write_kernel_csv(std::ostream& out, std::span<const double> z, std::span<const double> k);

}  // namespace driftwatch

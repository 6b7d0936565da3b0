#include "driftwatch/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "driftwatch/csv.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/quadrature.hpp"

namespace driftwatch {
namespace {

constexpr double kGaussianRadius = 8.0;
constexpr double kLaplaceRadius = 24.0;

}  // namespace

KernelSpec KernelSpec::gaussian() {
    KernelSpec k;
    k.family_ = KernelFamily::gaussian;
    k.lower_ = -kGaussianRadius;
    k.upper_ = kGaussianRadius;
    // max |phi'| is attained at |z| = 1
    k.lipschitz_ = std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
    k.breaks_ = {-kGaussianRadius, kGaussianRadius};
    return k;
}

KernelSpec KernelSpec::epanechnikov() {
    KernelSpec k;
    k.family_ = KernelFamily::epanechnikov;
    k.lower_ = -1.0;
    k.upper_ = 1.0;
    k.lipschitz_ = 1.5;
    k.breaks_ = {-1.0, 1.0};
    return k;
}

KernelSpec KernelSpec::laplace() {
    KernelSpec k;
    k.family_ = KernelFamily::laplace;
    k.lower_ = -kLaplaceRadius;
    k.upper_ = kLaplaceRadius;
    k.lipschitz_ = 1.0;
    k.breaks_ = {-kLaplaceRadius, 0.0, kLaplaceRadius};
    return k;
}

KernelSpec KernelSpec::tabulated(Eigen::VectorXd z, Eigen::VectorXd values) {
    if (z.size() < 2 || z.size() != values.size()) {
        throw DomainError("tabulated kernel needs at least two (z, k) knots of equal count");
    }
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (!std::isfinite(z[i]) || !std::isfinite(values[i]) || values[i] < 0.0) {
            throw DomainError("tabulated kernel knots must be finite with k >= 0");
        }
        if (i > 0 && !(z[i] > z[i - 1])) {
            throw DomainError("tabulated kernel knots must be strictly increasing in z");
        }
    }
    const Eigen::VectorXd dz = z.tail(z.size() - 1) - z.head(z.size() - 1);
    const double mass =
        (0.5 * (values.tail(z.size() - 1) + values.head(z.size() - 1)).array() * dz.array()).sum();
    if (!(mass > 0.0)) throw DomainError("tabulated kernel has zero mass");
    values /= mass;

    KernelSpec k;
    k.family_ = KernelFamily::tabulated;
    k.lower_ = z[0];
    k.upper_ = z[z.size() - 1];
    double slope = 0.0;
    for (Eigen::Index i = 0; i + 1 < z.size(); ++i) {
        slope = std::max(slope, std::abs(values[i + 1] - values[i]) / dz[i]);
    }
    k.lipschitz_ = slope;
    k.breaks_.assign(z.data(), z.data() + z.size());
    k.knots_z_ = std::move(z);
    k.knots_k_ = std::move(values);
    return k;
}

KernelSpec KernelSpec::from_name(std::string_view name) {
    if (name == "gaussian" || name == "gauss") return gaussian();
    if (name == "epanechnikov" || name == "epan") return epanechnikov();
    if (name == "laplace" || name == "lap") return laplace();
    throw DomainError("unknown kernel '" + std::string(name) + "'");
}

std::string KernelSpec::name() const {
    switch (family_) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::epanechnikov: return "epanechnikov";
        case KernelFamily::laplace: return "laplace";
        case KernelFamily::tabulated: return "tabulated";
    }
    return "unknown";
}

double KernelSpec::operator()(double z) const {
    if (z < lower_ || z > upper_) return 0.0;
    switch (family_) {
        case KernelFamily::gaussian:
            return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
        case KernelFamily::epanechnikov:
            return 0.75 * (1.0 - z * z);
        case KernelFamily::laplace:
            return std::exp(-std::numbers::sqrt2 * std::abs(z)) / std::numbers::sqrt2;
        case KernelFamily::tabulated: {
            const double* begin = knots_z_.data();
            const double* end = begin + knots_z_.size();
            const auto it = std::upper_bound(begin, end, z);
            if (it == end) return knots_k_[knots_k_.size() - 1];
            const auto hi = static_cast<Eigen::Index>(it - begin);
            const auto lo = hi - 1;
            const double w = (z - knots_z_[lo]) / (knots_z_[hi] - knots_z_[lo]);
            return (1.0 - w) * knots_k_[lo] + w * knots_k_[hi];
        }
    }
    return 0.0;
}

double eval_kernel(const KernelSpec& k, double z) {
    if (!std::isfinite(z)) throw DomainError("eval_kernel: argument must be finite");
    return k(z);
}

double eval_rescaled(const KernelSpec& k, double h, double z) {
    if (!(h > 0.0)) throw DomainError("eval_rescaled: bandwidth must be positive");
    return eval_kernel(k, z / h) / h;
}

double weight_sum(const KernelSpec& k, double h, std::span<const double> times, double t_now) {
    if (times.empty()) throw DomainError("weight_sum: no time points");
    if (!(h > 0.0)) throw DomainError("weight_sum: bandwidth must be positive");
    double total = 0.0;
    for (double t : times) total += k((t - t_now) / h);
    return total / h;
}

double kernel_mass(const KernelSpec& k, double lo, double hi) {
    lo = std::max(lo, k.support_lower());
    hi = std::min(hi, k.support_upper());
    if (!(hi > lo)) return 0.0;
    return integrate([&k](double z) { return k(z); }, lo, hi, k.breakpoints());
}

double limit_weight_integral(const KernelSpec& k, double zeta, double s) {
    if (!(s > 0.0) || s > 1.0) throw DomainError("limit_weight_integral: s must lie in (0, 1]");
    if (!(zeta > 0.0)) throw DomainError("limit_weight_integral: zeta must be positive");
    // substitute u = zeta (r - s)
    return kernel_mass(k, -zeta * s, 0.0);
}

KernelSpec read_kernel_csv(std::istream& in) {
    const auto table = read_two_column_csv(in, "z", "k");
    return KernelSpec::tabulated(table.first, table.second);
}

KernelSpec load_kernel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open kernel file '" + path + "'");
    return read_kernel_csv(in);
}

void write_kernel_csv(std::ostream& out, std::span<const double> z, std::span<const double> k) {
    write_two_column_csv(out, "z", "k", z, k);
}

}  // namespace driftwatch

#include "driftwatch/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "driftwatch/errors.hpp"

namespace driftwatch {
namespace {

constexpr int kMaxDepth = 48;

struct Simpson {
    const std::function<double(double)>& f;
    double tolerance;

    double refine(double a, double b, double fa, double fm, double fb, double whole,
                  double eps, int depth) const {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (depth >= kMaxDepth || std::abs(delta) <= 15.0 * eps) {
            return left + right + delta / 15.0;
        }
        return refine(a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) +
               refine(m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
    }
};

// Composite Simpson on 16 subintervals; sets the scale for the relative
// tolerance and seeds the recursion with panels small enough not to miss
// narrow peaks.
double panel(const std::function<double(double)>& f, double a, double b,
             QuadratureTolerance tol) {
    constexpr int kPieces = 8;
    const double width = (b - a) / kPieces;
    std::vector<double> x(2 * kPieces + 1), fx(2 * kPieces + 1);
    for (int i = 0; i <= 2 * kPieces; ++i) {
        x[i] = a + 0.5 * width * i;
        fx[i] = f(x[i]);
    }
    x.back() = b;
    double rough = 0.0;
    std::vector<double> piece(kPieces);
    for (int i = 0; i < kPieces; ++i) {
        piece[i] = width / 6.0 * (fx[2 * i] + 4.0 * fx[2 * i + 1] + fx[2 * i + 2]);
        rough += piece[i];
    }
    const double eps = std::max(tol.absolute, tol.relative * std::abs(rough)) / kPieces;
    Simpson s{f, eps};
    double total = 0.0;
    for (int i = 0; i < kPieces; ++i) {
        total += s.refine(x[2 * i], x[2 * i + 2], fx[2 * i], fx[2 * i + 1], fx[2 * i + 2],
                          piece[i], eps, 0);
    }
    return total;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breakpoints, QuadratureTolerance tol) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("integrate: bounds must be finite");
    }
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, breakpoints, tol);

    std::vector<double> cuts{a};
    for (double p : breakpoints) {
        if (p > a && p < b) cuts.push_back(p);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += panel(f, cuts[i], cuts[i + 1], tol);
    }
    return total;
}

}  // namespace driftwatch

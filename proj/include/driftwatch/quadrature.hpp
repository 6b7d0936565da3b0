#pragma once

#include <functional>
#include <span>

namespace driftwatch {

struct QuadratureTolerance {
    double absolute = 1e-10;
    double relative = 1e-8;
};

/// Adaptive Simpson quadrature of f over [a, b].
///
/// `breakpoints` inside (a, b) become panel boundaries, which is where kinks
/// and support edges of compact kernels should go. Each panel is refined
/// until the Richardson error estimate is below
/// max(absolute, relative * |panel estimate|).
double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breakpoints = {},
                 QuadratureTolerance tol = {});

}  // namespace driftwatch

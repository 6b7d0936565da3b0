#pragma once

namespace driftwatch {

double normal_pdf(double x);
double normal_cdf(double x);

/// Standard normal quantile; throws DomainError outside (0, 1).
double normal_quantile(double p);

}  // namespace driftwatch

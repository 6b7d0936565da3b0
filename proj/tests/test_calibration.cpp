#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "driftwatch/calibration.hpp"
#include "driftwatch/errors.hpp"
#include "oracles.hpp"

using namespace driftwatch;

namespace {

LimitVariant limit_variant(double zeta, long M) {
    LimitConfig cfg;
    cfg.zeta = zeta;
    cfg.grid_M = M;
    return LimitVariant{cfg};
}

FiniteSampleVariant finite_variant(long N, double h) {
    FiniteSampleVariant v;
    v.N = N;
    v.h = h;
    return v;
}

CalibrationTable table_of(std::vector<double> c, std::vector<double> arl) {
    CalibrationTable t;
    t.c = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<long>(c.size()));
    t.normed_arl = Eigen::Map<Eigen::VectorXd>(arl.data(), static_cast<long>(arl.size()));
    return t;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
    return v;
}

/// CP1 step drift zeta^{-3/2} int_0^s K(zeta(r-s)) zeta r dr / int_0^s K(zeta(r-s)) dr.
double step_drift(const std::function<double(double)>& k, double zeta, double s) {
    const double num = oracle::midpoint([&](double r) { return k(zeta * (r - s)) * zeta * r; }, 0.0, s, 4000);
    const double den = oracle::midpoint([&](double r) { return k(zeta * (r - s)); }, 0.0, s, 4000);
    return num / (std::pow(zeta, 1.5) * den);
}

}  // namespace

TEST_CASE("extreme thresholds give truncation or immediate alarms") {
    const std::vector<double> c{-1e9, 1e9};
    const auto finite = arl_curve(finite_variant(100, 20.0), KernelSpec::gaussian(), c, 200, 1);
    CHECK(finite.normed_arl[0] == doctest::Approx(1.0 / 100.0));
    CHECK(finite.normed_arl[1] == 1.0);
    const auto limit = arl_curve(limit_variant(3.0, 256), KernelSpec::gaussian(), c, 200, 1);
    CHECK(limit.normed_arl[0] == doctest::Approx(1.0 / 256.0));
    CHECK(limit.normed_arl[1] == 1.0);
    CHECK(finite.meta.variant == "finite-sample");
    CHECK(limit.meta.variant == "limit");
    CHECK(finite.meta.reps == 200);
}

TEST_CASE("stopping times are nondecreasing in the threshold per replicate") {
    const auto grid = linspace(-0.2, 1.0, 25);
    for (const ArlVariant& v : {ArlVariant{finite_variant(200, 40.0)}, ArlVariant{limit_variant(5.0, 256)}}) {
        const Eigen::MatrixXd st = normed_stopping_times(v, KernelSpec::epanechnikov(), grid, 0.0, 300, 5);
        for (long r = 0; r < st.rows(); ++r)
            for (long j = 1; j < st.cols(); ++j) CHECK(st(r, j) >= st(r, j - 1));
        CHECK(st.minCoeff() > 0.0);
        CHECK(st.maxCoeff() <= 1.0);
    }
    FiniteSampleVariant standardized = finite_variant(200, 40.0);
    standardized.variance = VarianceMethod::naive;
    standardized.prerun = 40;
    const Eigen::MatrixXd st = normed_stopping_times(standardized, KernelSpec::gaussian(), grid, 0.1, 300, 5);
    for (long r = 0; r < st.rows(); ++r) {
        CHECK(st(r, 0) >= 0.1);
        for (long j = 1; j < st.cols(); ++j) CHECK(st(r, j) >= st(r, j - 1));
    }
}

TEST_CASE("results do not depend on the worker count") {
    const auto grid = linspace(0.0, 0.6, 7);
    for (const ArlVariant& v : {ArlVariant{finite_variant(150, 30.0)}, ArlVariant{limit_variant(5.0, 256)}}) {
        const auto a = arl_curve(v, KernelSpec::gaussian(), grid, 400, 77, 0.0, 1);
        const auto b = arl_curve(v, KernelSpec::gaussian(), grid, 400, 77, 0.0, 3);
        CHECK(a.normed_arl == b.normed_arl);
    }
    CHECK(coverage_sim(100, 50.0, KernelSpec::gaussian(), 0.05, 300, 4, VarianceMethod::naive, 0, 1) ==
          coverage_sim(100, 50.0, KernelSpec::gaussian(), 0.05, 300, 4, VarianceMethod::naive, 0, 4));
}

TEST_CASE("limit curve is reproducible across seeds") {
    LimitConfig cfg;
    cfg.zeta = 3.0;
    const double sk = std::sqrt(sigma_k_sq(cfg, 1.0));
    std::vector<double> grid;
    for (double f : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}) grid.push_back(f * sk);
    const auto a = arl_curve(limit_variant(3.0, 512), KernelSpec::gaussian(), grid, 10000, 1);
    const auto b = arl_curve(limit_variant(3.0, 512), KernelSpec::gaussian(), grid, 10000, 2);
    CHECK((a.normed_arl - b.normed_arl).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("critical value lookup") {
    const auto t = table_of({0.0, 1.0, 2.0, 3.0, 4.0}, {0.2, 0.5, 0.9, 1.0, 1.0});
    CHECK(critical_value_for_arl(t, 1.0) == 4.0);
    CHECK(critical_value_for_arl(t, 0.5) == 1.0);
    CHECK(critical_value_for_arl(t, 0.35) == doctest::Approx(0.5));
    CHECK(critical_value_for_arl(t, 0.95) == doctest::Approx(2.5));
    CHECK_THROWS_AS(critical_value_for_arl(t, 0.1), DomainError);
    CHECK_THROWS_AS(critical_value_for_arl(t, 1.5), DomainError);
}

TEST_CASE("critical values round-trip tabulated points and refine with the grid") {
    const auto coarse_grid = linspace(0.0, 0.8, 5);
    const auto fine_grid = linspace(0.0, 0.8, 81);
    const auto variant = finite_variant(200, 40.0);
    const auto coarse = arl_curve(variant, KernelSpec::gaussian(), coarse_grid, 2000, 31);
    const auto fine = arl_curve(variant, KernelSpec::gaussian(), fine_grid, 2000, 31);
    for (long j = 0; j < coarse.c.size(); ++j) {
        CHECK(coarse.normed_arl[j] == fine.normed_arl[20 * j]);
        if (j + 1 < coarse.c.size() && coarse.normed_arl[j + 1] > coarse.normed_arl[j])
            CHECK(critical_value_for_arl(coarse, coarse.normed_arl[j]) == coarse.c[j]);
    }
    const double target = 0.5 * (coarse.normed_arl[1] + coarse.normed_arl[2]);
    const double from_coarse = critical_value_for_arl(coarse, target);
    const double from_fine = critical_value_for_arl(fine, target);
    CHECK(from_coarse > coarse.c[1]);
    CHECK(from_coarse < coarse.c[2]);
    CHECK(std::abs(from_coarse - from_fine) < 0.5 * (coarse.c[1] - coarse.c[0]));
}

TEST_CASE("coverage of the confidence interval") {
    CHECK(coverage_sim(100, 50.0, KernelSpec::gaussian(), 0.999, 1000, 3) < 0.01);
    const double known = coverage_sim(500, 250.0, KernelSpec::gaussian(), 0.05, 2000, 17, std::nullopt);
    CHECK(std::abs(known - 0.95) < 3.0 * std::sqrt(0.95 * 0.05 / 2000.0));
    CHECK(coverage_sim(500, 250.0, KernelSpec::gaussian(), 0.05, 2000, 42) == doctest::Approx(0.9518).epsilon(0.02 / 0.9518));
    CHECK(coverage_sim(10, 10.0, KernelSpec::gaussian(), 0.05, 2000, 42) == doctest::Approx(0.9301).epsilon(0.02 / 0.9301));
}

TEST_CASE("curve comparison") {
    const auto t = table_of({0.0, 1.0, 2.0}, {0.3, 0.6, 1.0});
    const CurveComparison self = compare_curves(t, t);
    CHECK(self.difference.cwiseAbs().maxCoeff() == 0.0);
    CHECK(self.fraction_nonnegative == 1.0);
    CHECK(self.mean_abs_gap == 0.0);
    const CurveComparison shifted = compare_curves(t, table_of({0.0, 1.0, 2.0}, {0.4, 0.5, 1.0}));
    CHECK(shifted.difference[0] == doctest::Approx(-0.1));
    CHECK(shifted.fraction_nonnegative == doctest::Approx(2.0 / 3.0));
    CHECK(shifted.mean_abs_gap == doctest::Approx(0.2 / 3.0));
    CHECK_THROWS_AS(compare_curves(t, table_of({0.0, 1.0}, {0.3, 0.6})), DomainError);
}

TEST_CASE("coupled finite and limit curves") {
    const auto grid = linspace(0.0, 0.3, 6);
    const CurveComparison r = conservativeness_check(100, 10.0, KernelSpec::gaussian(), grid, 300, 8);
    REQUIRE(r.first.size() == 6);
    for (long j = 1; j < 6; ++j) {
        CHECK(r.first[j] >= r.first[j - 1]);
        CHECK(r.second[j] >= r.second[j - 1]);
    }
    CHECK((r.difference - (r.first - r.second)).cwiseAbs().maxCoeff() == 0.0);
    const CurveComparison again = conservativeness_check(100, 10.0, KernelSpec::gaussian(), grid, 300, 8, std::nullopt, 3);
    CHECK(again.first == r.first);
    CHECK(again.second == r.second);
}

TEST_CASE("kernel comparison curves") {
    const auto single = kernel_comparison_curves({KernelSpec::laplace()}, GenericAlternative::step(), 2.0, 0.1);
    CHECK(single.best == 0);
    CHECK(single.names[0] == "laplace");

    const auto twins = kernel_comparison_curves({KernelSpec::gaussian(), KernelSpec::gaussian()},
                                                GenericAlternative::step(), 2.0, 0.1);
    CHECK(twins.crossings[0] == twins.crossings[1]);

    const std::vector<std::function<double(double)>> kernels{oracle::gaussian_pdf, oracle::epanechnikov, oracle::laplace};
    const double c = 0.5 * step_drift(oracle::gaussian_pdf, 2.0, 1.0);
    std::vector<double> scan(3, 1.0);
    for (std::size_t l = 0; l < 3; ++l) {
        for (int i = 1; i <= 1000; ++i) {
            if (step_drift(kernels[l], 2.0, i / 1000.0) > c) {
                scan[l] = i / 1000.0;
                break;
            }
        }
    }
    const auto cmp = kernel_comparison_curves({KernelSpec::gaussian(), KernelSpec::epanechnikov(), KernelSpec::laplace()},
                                              GenericAlternative::step(), 2.0, c);
    for (std::size_t l = 0; l < 3; ++l) CHECK(std::abs(cmp.crossings[l] - scan[l]) <= 1e-3);
    const auto best = static_cast<std::size_t>(std::min_element(scan.begin(), scan.end()) - scan.begin());
    CHECK(cmp.best == best);
    CHECK(cmp.curves[0][cmp.s.size() - 1] == doctest::Approx(step_drift(oracle::gaussian_pdf, 2.0, 1.0)).epsilon(1e-6));
    CHECK_THROWS_AS(kernel_comparison_curves({}, GenericAlternative::step(), 2.0, c), DomainError);
}

TEST_CASE("calibration table csv") {
    std::ostringstream out;
    write_calibration_csv(out, table_of({0.0, 0.5}, {0.25, 1.0}));
    CHECK(out.str() == "c,normed_arl\n0,0.25\n0.5,1\n");
}

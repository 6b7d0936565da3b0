#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "driftwatch/errors.hpp"
#include "driftwatch/limitsim.hpp"
#include "driftwatch/random.hpp"
#include "oracles.hpp"

using namespace driftwatch;

namespace {

LimitConfig config(double zeta, KernelSpec k = KernelSpec::gaussian(), long M = 2048) {
    LimitConfig cfg;
    cfg.zeta = zeta;
    cfg.kernel = std::move(k);
    cfg.grid_M = M;
    return cfg;
}

LimitConfig step_config(double zeta, long M = 2048) {
    LimitConfig cfg = config(zeta, KernelSpec::gaussian(), M);
    cfg.drift = LimitDrift{GenericAlternative::step(), false, 0.5};
    return cfg;
}

/// Var of zeta^{-1} int_0^1 K(zeta(r-1)) B(r) dr / int_0^1 K(zeta(r-1)) dr by
/// a midpoint double sum over the covariance min(u, v).
double variance_double_sum(const std::function<double(double)>& kernel, double zeta, long n) {
    std::vector<double> w(static_cast<std::size_t>(n)), r(static_cast<std::size_t>(n));
    double mass = 0.0;
    for (long i = 0; i < n; ++i) {
        r[static_cast<std::size_t>(i)] = (i + 0.5) / n;
        w[static_cast<std::size_t>(i)] = kernel(zeta * (r[static_cast<std::size_t>(i)] - 1.0)) / n;
        mass += w[static_cast<std::size_t>(i)];
    }
    double num = 0.0;
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
            num += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] *
                   std::min(r[static_cast<std::size_t>(i)], r[static_cast<std::size_t>(j)]);
    return num / (zeta * zeta * mass * mass);
}

}  // namespace

TEST_CASE("brownian paths start at zero with min covariance") {
    const long reps = 5000;
    std::vector<double> b1, bh;
    for (long r = 0; r < reps; ++r) {
        const Eigen::VectorXd b = sample_bm(256, substream_seed(21, static_cast<std::uint64_t>(r)));
        REQUIRE(b.size() == 257);
        CHECK(b[0] == 0.0);
        b1.push_back(b[256]);
        bh.push_back(b[128]);
    }
    CHECK(oracle::sample_variance(b1) == doctest::Approx(1.0).epsilon(0.05));
    double cov = 0.0;
    for (long r = 0; r < reps; ++r) cov += b1[static_cast<std::size_t>(r)] * bh[static_cast<std::size_t>(r)];
    CHECK(cov / reps == doctest::Approx(0.5).epsilon(0.07));
    CHECK(sample_bm(256, 3) == sample_bm(256, 3));
}

TEST_CASE("limit variance reproduces tabulated values") {
    CHECK(sigma_k_sq(config(1.0), 1.0) == doctest::Approx(0.3775).epsilon(0.0005 / 0.3775));
    CHECK(sigma_k_sq(config(2.0, KernelSpec::epanechnikov()), 1.0) == doctest::Approx(0.1857).epsilon(0.0005 / 0.1857));
    CHECK(std::abs(sigma_k_sq(config(10.0, KernelSpec::laplace()), 1.0) - 0.0089) < 0.0003);
}

TEST_CASE("limit variance agrees with the covariance double sum") {
    CHECK(sigma_k_sq(config(2.0, KernelSpec::epanechnikov()), 1.0) ==
          doctest::Approx(variance_double_sum(oracle::epanechnikov, 2.0, 1500)).epsilon(1e-5));
    CHECK(sigma_k_sq(config(1.0), 1.0) ==
          doctest::Approx(variance_double_sum(oracle::gaussian_pdf, 1.0, 1500)).epsilon(1e-5));
    CHECK(sigma_k_sq(config(5.0, KernelSpec::laplace()), 1.0) ==
          doctest::Approx(variance_double_sum(oracle::laplace, 5.0, 1500)).epsilon(1e-4));
}

TEST_CASE("limit variance decreases in zeta") {
    for (const auto& k : {KernelSpec::gaussian(), KernelSpec::epanechnikov(), KernelSpec::laplace()}) {
        double previous = 1e9;
        for (double zeta : {1.0, 1.2, 1.5, 2.0, 4.0, 5.0, 10.0}) {
            const double v = sigma_k_sq(config(zeta, k), 1.0);
            CHECK(v < previous);
            previous = v;
        }
    }
    CHECK_THROWS_AS(sigma_k_sq(config(2.0), 0.0), DomainError);
}

TEST_CASE("null limit process scales with sigma") {
    LimitConfig cfg = config(2.0, KernelSpec::gaussian(), 256);
    const Eigen::VectorXd unit = null_limit_process(cfg, 5);
    cfg.sigma = 0.0;
    const Eigen::VectorXd zero = null_limit_process(cfg, 5);
    for (long j = 0; j < 256; ++j)
        if (!std::isnan(zero[j])) CHECK(zero[j] == 0.0);
    cfg.sigma = 3.0;
    const Eigen::VectorXd triple = null_limit_process(cfg, 5);
    CHECK(triple[255] == doctest::Approx(3.0 * unit[255]).epsilon(1e-12));
}

TEST_CASE("sampled limit variance matches the quadrature value") {
    const long reps = 4000;
    for (const auto& k : {KernelSpec::gaussian(), KernelSpec::epanechnikov(), KernelSpec::laplace()}) {
        for (double zeta : {1.0, 2.0, 10.0}) {
            INFO(k.name() << " zeta=" << zeta);
            const LimitConfig cfg = config(zeta, k, 512);
            const LimitPathSampler sampler(cfg);
            const Eigen::MatrixXd paths = sampler.sample(0, reps, 1000 + static_cast<std::uint64_t>(zeta), false);
            std::vector<double> end;
            for (long r = 0; r < reps; ++r) end.push_back(paths(511, r));
            const double var = oracle::sample_variance(end);
            const double target = sigma_k_sq(cfg, 1.0);
            const double se = target * std::sqrt(2.0 / (reps - 1.0));
            CHECK(std::abs(var - target) < 3.0 * se);
            CHECK(std::abs(oracle::sample_mean(end)) < 3.0 * std::sqrt(target / reps));
        }
    }
}

TEST_CASE("drift term") {
    LimitConfig zero_cfg = step_config(1.0);
    zero_cfg.drift->m0 = GenericAlternative::zero();
    for (double s : {0.1, 0.5, 1.0}) CHECK(drift_term(zero_cfg, s) == 0.0);

    const double closed = oracle::step_drift_gaussian(1.0);
    const double quad = oracle::midpoint([](double r) { return oracle::gaussian_pdf(r - 1.0) * r; }, 0.0, 1.0, 100000) /
                        oracle::midpoint([](double r) { return oracle::gaussian_pdf(r - 1.0); }, 0.0, 1.0, 100000);
    CHECK(closed == doctest::Approx(quad).epsilon(1e-8));
    CHECK(drift_term(step_config(1.0), 1.0) == doctest::Approx(closed).epsilon(1e-9));
    for (double s : {0.05, 0.3, 0.77})
        CHECK(drift_term(step_config(1.0), s) == doctest::Approx(oracle::step_drift_gaussian(s)).epsilon(1e-8));

    LimitConfig late = step_config(2.0);
    late.drift->cp2 = true;
    late.drift->theta = 1.0;
    for (double s : {0.2, 0.6, 1.0}) CHECK(drift_term(late, s) == doctest::Approx(0.0).epsilon(1e-14));

    LimitConfig early = late, later = late;
    early.drift->theta = 0.3;
    later.drift->theta = 0.6;
    for (double s = 0.05; s <= 1.0; s += 0.05) CHECK(drift_term(later, s) <= drift_term(early, s) + 1e-12);
    CHECK(drift_term(early, 1.0) > 0.0);
}

TEST_CASE("alternative limit process") {
    LimitConfig null_drift = step_config(2.0, 256);
    null_drift.drift->m0 = GenericAlternative::zero();
    const Eigen::VectorXd alt = alt_limit_process(null_drift, 8);
    const Eigen::VectorXd null = null_limit_process(config(2.0, KernelSpec::gaussian(), 256), 8);
    for (long j = 0; j < 256; ++j) {
        if (std::isnan(null[j])) CHECK(std::isnan(alt[j]));
        else CHECK(alt[j] == null[j]);
    }

    LimitConfig quiet = step_config(2.0, 256);
    quiet.sigma = 0.0;
    const Eigen::VectorXd deterministic = alt_limit_process(quiet, 8);
    const LimitPathSampler sampler(quiet);
    for (long j = 10; j < 256; ++j) CHECK(deterministic[j] == doctest::Approx(sampler.drift()[j]).epsilon(1e-12));
    CHECK(deterministic[255] == doctest::Approx(drift_term(quiet, 1.0)).epsilon(1e-9));

    const long reps = 10000;
    const LimitConfig cfg = step_config(2.0, 512);
    const Eigen::MatrixXd paths = LimitPathSampler(cfg).sample(0, reps, 4, true);
    std::vector<double> end;
    for (long r = 0; r < reps; ++r) end.push_back(paths(511, r));
    const double se = std::sqrt(oracle::sample_variance(end) / reps);
    CHECK(std::abs(oracle::sample_mean(end) - drift_term(cfg, 1.0)) < 3.0 * se);
}

TEST_CASE("limit stopping samples") {
    const LimitConfig cfg = config(2.0, KernelSpec::gaussian(), 512);
    CHECK(limit_stop_sample(cfg, 1e6, 0.0, 3) == 1.0);
    const double early = limit_stop_sample(cfg, -1e6, 0.5, 3);
    CHECK(early >= 0.5);
    CHECK(early <= 0.5 + 1.0 / 512.0);

    const std::vector<double> grid{-0.2, 0.0, 0.1, 0.3, 0.5, 0.8};
    const Eigen::MatrixXd stops = limit_stop_samples(cfg, grid, 0.0, 500, 9, false);
    for (long r = 0; r < 500; ++r)
        for (long j = 1; j < 6; ++j) CHECK(stops(r, j) >= stops(r, j - 1));
    CHECK(stops == limit_stop_samples(cfg, grid, 0.0, 500, 9, false, 3));
    CHECK(stops(7, 2) == limit_stop_sample(cfg, 0.1, 0.0, substream_seed(9, 7)));
    CHECK_THROWS_AS(limit_stop_sample(cfg, 0.0, 1.0, 3), DomainError);
}

TEST_CASE("stopping-time distribution is stable under grid refinement") {
    const long reps = 2000;
    const LimitConfig fine = config(2.0, KernelSpec::gaussian(), 2048);
    const LimitConfig coarse = config(2.0, KernelSpec::gaussian(), 1024);
    Eigen::MatrixXd bm(2049, reps);
    for (long r = 0; r < reps; ++r) bm.col(r) = sample_bm(2048, substream_seed(2718, static_cast<std::uint64_t>(r)));
    Eigen::MatrixXd bm_coarse(1025, reps);
    for (long j = 0; j <= 1024; ++j) bm_coarse.row(j) = bm.row(2 * j);
    const Eigen::MatrixXd pf = LimitPathSampler(fine).null_paths(bm);
    const Eigen::MatrixXd pc = LimitPathSampler(coarse).null_paths(bm_coarse);
    std::vector<double> a, b;
    for (long r = 0; r < reps; ++r) {
        a.push_back(first_crossing(pf.col(r), 0.5, 0.0));
        b.push_back(first_crossing(pc.col(r), 0.5, 0.0));
    }
    const Eigen::VectorXd single = limit_process_from_path(coarse, bm.col(5));
    for (long j = 0; j < 1024; ++j) {
        if (std::isnan(single[j])) CHECK(std::isnan(pc(j, 5)));
        else CHECK(pc(j, 5) == doctest::Approx(single[j]).epsilon(1e-12));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double sup = 0.0;
    for (double x = 0.0; x <= 1.0; x += 1.0 / 2048.0) {
        const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) / reps;
        const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) / reps;
        sup = std::max(sup, std::abs(fa - fb));
    }
    CHECK(sup <= 0.01);
}

TEST_CASE("asymptotic normed delay") {
    const LimitConfig cfg = step_config(1.0);
    CHECK(asymptotic_normed_delay(cfg, -0.1, 0.2) == 0.2);
    LimitConfig none = cfg;
    none.drift->m0 = GenericAlternative::zero();
    CHECK(asymptotic_normed_delay(none, 0.1, 0.0) == 1.0);

    const double c = 0.5 * oracle::step_drift_gaussian(1.0);
    double scan = 1.0;
    for (long k = 1; k <= 10000; ++k) {
        if (oracle::step_drift_gaussian(k / 1e4) > c) {
            scan = k / 1e4;
            break;
        }
    }
    CHECK(std::abs(asymptotic_normed_delay(cfg, c, 0.0) - scan) <= 1e-4);
}

TEST_CASE("kernel-drift integrability condition") {
    CHECK_FALSE(check_km_condition(KernelSpec::gaussian(), GenericAlternative::zero(), 0.1));
    CHECK(check_km_condition(KernelSpec::gaussian(), GenericAlternative::step(), 0.0));

    // I(x) = int_0^x K(s - x) s^2 / 2 ds for the ramp, maximized on [0, 2]
    double best = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double x = 2.0 * i / 200.0;
        const double v = oracle::midpoint([&](double s) { return oracle::gaussian_pdf(s - x) * s * s / 2.0; }, 0.0, x, 4000);
        best = std::max(best, v);
        CHECK(km_integral(KernelSpec::gaussian(), GenericAlternative::ramp(), x) == doctest::Approx(v).epsilon(1e-6));
    }
    CHECK(check_km_condition(KernelSpec::gaussian(), GenericAlternative::ramp(), 0.1) == (best > 0.1));
    CHECK(check_km_condition(KernelSpec::gaussian(), GenericAlternative::ramp(), 0.99 * best));
    CHECK_FALSE(check_km_condition(KernelSpec::gaussian(), GenericAlternative::ramp(), 1.01 * best));
}

TEST_CASE("uniform design reproduces the equidistant limit") {
    LimitConfig plain = step_config(2.0, 256);
    LimitConfig designed = plain;
    designed.design = TimeDesign::power(1.0, DesignMode::cp1_rolling);
    CHECK(sigma_k_sq(designed, 1.0) == doctest::Approx(sigma_k_sq(plain, 1.0)).epsilon(1e-7));
    CHECK(drift_term(designed, 0.6) == doctest::Approx(drift_term(plain, 0.6)).epsilon(1e-7));
    CHECK((LimitPathSampler(designed).weights() - LimitPathSampler(plain).weights()).cwiseAbs().maxCoeff() < 1e-10);

    LimitConfig fixed = plain;
    fixed.drift->cp2 = true;
    fixed.drift->theta = 0.25;
    LimitConfig fixed_designed = fixed;
    fixed_designed.design = TimeDesign::power(1.0, DesignMode::cp2_fixed);
    CHECK(drift_term(fixed_designed, 0.8) == doctest::Approx(drift_term(fixed, 0.8)).epsilon(1e-6));

    LimitConfig skewed = plain;
    skewed.design = TimeDesign::power(2.0, DesignMode::cp1_rolling);
    CHECK(sigma_k_sq(skewed, 1.0) != doctest::Approx(sigma_k_sq(plain, 1.0)));
}

TEST_CASE("limit configuration is validated") {
    LimitConfig cfg = config(0.5);
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = config(2.0, KernelSpec::gaussian(), 32);
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = config(2.0);
    cfg.sigma = -1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    CHECK(config(2.0).s_min() == doctest::Approx(4.0 / 2048.0));
}

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "driftwatch/kernels.hpp"
#include "driftwatch/seriesgen.hpp"

namespace driftwatch {

/// Drift of the alternative limit: generic alternative and change-point
/// model. Under CP2 the onset sits at the fraction theta in (0, 1]; CP1
/// limits do not depend on the change point.
struct LimitDrift {
    GenericAlternative m0 = GenericAlternative::step();
    bool cp2 = false;
    double theta = 0.5;
};

struct LimitConfig {
    double zeta = 1.0;
    KernelSpec kernel = KernelSpec::gaussian();
    double sigma = 1.0;
    long grid_M = 2048;
    std::optional<LimitDrift> drift;
    std::optional<TimeDesign> design;

    void validate() const;
    /// Smallest s where the discretized process is treated as defined.
    double s_min() const { return 4.0 / static_cast<double>(grid_M); }
};

/// Standard Brownian motion on {j / grid_M}, j = 0..grid_M, from Rng(seed).
Eigen::VectorXd sample_bm(long grid_M, std::uint64_t seed);

/// Discretized limit processes on the grid s_j = j / M, j = 1..M.
///
/// The kernel Brownian integral is a trapezoid sum over the path nodes, so
/// the whole process is W * B for a fixed M x (M+1) weight matrix W; batches
/// of paths are processed as one matrix product.
class LimitPathSampler {
public:
    explicit LimitPathSampler(const LimitConfig& cfg);

    const LimitConfig& config() const { return cfg_; }
    long grid() const { return cfg_.grid_M; }

    const Eigen::MatrixXd& weights() const { return weights_; }

    /// drift_term on the grid (zero when no drift is configured).
    const Eigen::VectorXd& drift() const { return drift_; }

    /// Null processes for Brownian paths stored as the columns of `bm`.
    Eigen::MatrixXd null_paths(const Eigen::Ref<const Eigen::MatrixXd>& bm) const;

    /// Processes for replicates first..first+count-1, where replicate r uses
    /// sample_bm(M, substream_seed(seed, r)); adds the drift when requested.
    Eigen::MatrixXd sample(long first, long count, std::uint64_t seed, bool with_drift) const;

private:
    LimitConfig cfg_;
    Eigen::MatrixXd weights_;
    Eigen::VectorXd drift_;
    std::vector<long> undefined_;  // rows with zero weight mass below s_min
};

/// M_zeta on the grid for the path sample_bm(grid_M, seed).
Eigen::VectorXd null_limit_process(const LimitConfig& cfg, std::uint64_t seed);

/// M_zeta for a given path whose length minus one is a multiple of grid_M;
/// a finer path is subsampled to the configured grid.
Eigen::VectorXd limit_process_from_path(const LimitConfig& cfg,
                                        const Eigen::Ref<const Eigen::VectorXd>& bm);

/// W_zeta = M_zeta + drift_term on the grid for sample_bm(grid_M, seed).
Eigen::VectorXd alt_limit_process(const LimitConfig& cfg, std::uint64_t seed);

/// Var M_zeta(s) for sigma = 1, from the covariance min(u, v) of B.
double sigma_k_sq(const LimitConfig& cfg, double s);

/// Limit drift mu_zeta(s): kernel-weighted mean of the integrated drift,
/// normalized by zeta^{3/2}.
double drift_term(const LimitConfig& cfg, double s);

/// Grid point s_j = j / M of the first exceedance of c at or after a, or 1.
double first_crossing(const Eigen::Ref<const Eigen::VectorXd>& path, double c, double a);

/// Limit stopping time for one sampled path (alternative if a drift is set).
double limit_stop_sample(const LimitConfig& cfg, double c, double a, std::uint64_t seed);

/// Stopping times for reps paths and every threshold in c_grid, reusing each
/// path across thresholds. Row r is replicate r.
Eigen::MatrixXd limit_stop_samples(const LimitConfig& cfg, std::span<const double> c_grid,
                                   double a, long reps, std::uint64_t seed, bool with_drift,
                                   unsigned jobs = 1);

/// inf{s in [a, 1] : drift_term(s) > c}, 1 without a crossing. The
/// bracket comes from a scan at step 1 / resolution and is refined by
/// bisection; the drift at s = 0 is 0.
double asymptotic_normed_delay(const LimitConfig& cfg, double c, double a,
                               long resolution = 0);

/// Evaluates I(x) = int_0^x K(s - x) int_0^s m0 ds on x in [0, 2 zeta] and
/// reports whether some I(x) exceeds c with every value finite.
bool check_km_condition(const KernelSpec& kernel, const GenericAlternative& m0, double c,
                        double zeta = 1.0);

/// The I(x) of check_km_condition.
double km_integral(const KernelSpec& kernel, const GenericAlternative& m0, double x);

}  // namespace driftwatch

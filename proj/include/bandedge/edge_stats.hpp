#pragma once

// Spectral edge statistics of H / (2 sqrt(2W)).
//
// Two edge scalings:
//   rmt:     right = 2 N^{2/3} (alpha_max - 1),  left = -2 N^{2/3} (alpha_min + 1)
//   poisson: right = 2 W^{4/5} (1 - alpha_max),  left = 2 W^{4/5} (1 + alpha_min)
// and the matching counting curves, with "eigenvalue > threshold" strict.

#include "bandedge/sampler.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace bandedge {

enum class Regime { rmt, poisson };
enum class Side { right, left };

std::string_view to_string(Regime regime) noexcept;
std::string_view to_string(Side side) noexcept;
/// "rmt" or "poisson"; DomainError otherwise.
Regime regime_from_string(std::string_view name);

/// Largest N accepted by the eigensolvers.
inline constexpr Vertex kDefaultEigenBudget = 4096;

/// Eigenvalues of H / (2 sqrt(2W)), ascending. The ring is reordered as
/// 0, N-1, 1, N-2, ... so the periodic band becomes an ordinary band of width
/// about 2W + 1, solved by the LAPACK band driver; wide bands go to the dense one.
/// Throws ResourceError above the budget and NumericError if LAPACK fails or the
/// trace check |sum| <= 1e-8 N fails.
std::vector<double> eigenvalues(const BandMatrix& H, Vertex budget = kDefaultEigenBudget);

struct Eigenpair {
    double value = 0.0;   ///< on the edge scale
    ComplexVector vector; ///< unit norm, original site order
};

/// Largest (right) or smallest (left) eigenpair of H / (2 sqrt(2W)).
/// The residual |H v - lambda 2 sqrt(2W) v| is checked against 1e-8 |H|.
Eigenpair edge_eigenpair(const BandMatrix& H, Side side, Vertex budget = kDefaultEigenBudget);

struct EdgeSample {
    BandParams params;
    SeedSpec seed;
    std::vector<double> eigenvalues;
    double alpha_max = 0.0;
    double alpha_min = 0.0;
};

/// Draws H from seed and diagonalizes it.
EdgeSample make_edge_sample(const BandParams& params, const SeedSpec& seed,
                            Vertex budget = kDefaultEigenBudget);

/// Wraps already sorted eigenvalues.
EdgeSample edge_sample_from(const BandParams& params, const SeedSpec& seed,
                            std::vector<double> sorted_eigenvalues);

struct ScaledExtremes {
    double right = 0.0;
    double left = 0.0;
};

ScaledExtremes scaled_extremes(const EdgeSample& sample, Regime regime);
ScaledExtremes scaled_extremes(const BandParams& params, double alpha_max, double alpha_min,
                               Regime regime);

/// Threshold 1 - lambda / scale on the right edge (mirror image on the left).
double edge_length_scale(const BandParams& params, Regime regime);

struct CountingCurve {
    std::vector<double> lambda_grid;
    std::vector<double> values;
    Regime regime = Regime::rmt;
    Side side = Side::right;
};

/// rmt: number of eigenvalues beyond 1 - lambda / (2 N^{2/3}) (right) or below
/// -1 + lambda / (2 N^{2/3}) (left). poisson: the same with 2 W^{4/5}, times W^{6/5} / N.
/// Throws DomainError unless the grid is ascending.
std::pair<CountingCurve, CountingCurve> counting_curves(const EdgeSample& sample, Regime regime,
                                                        std::span<const double> lambda_grid);

/// count points from start to stop inclusive; count >= 2 and start < stop.
std::vector<double> lambda_grid(double start, double stop, int count);

struct EnsembleConfig {
    BandParams params;
    int replicates = 1;
    std::uint64_t master_seed = 0;
    Regime regime = Regime::rmt;
    std::vector<double> lambda_grid;
    int threads = 1;
    Vertex eigen_budget = kDefaultEigenBudget;
};

struct EnsembleSummary {
    BandParams params;
    Regime regime = Regime::rmt;
    int replicate_count = 0;
    std::vector<double> alpha_max;
    std::vector<double> alpha_min;
    std::vector<double> scaled_max_samples; ///< scaled right extremes
    std::vector<double> scaled_min_samples; ///< scaled left extremes
    std::vector<double> norm_ratios;
    CountingCurve mean_curve_R;
    CountingCurve mean_curve_L;
    std::vector<double> sigma_R_std; ///< pointwise sample standard deviation of sigma_R
};

/// Replicate r uses SeedSpec(master_seed, r). Results are stored by replicate
/// index, so they do not depend on the thread count. A failing replicate is
/// rethrown with the same error type and "replicate r: " prefixed.
EnsembleSummary ensemble_run(const EnsembleConfig& config);

/// Sup distance between the empirical CDFs of a and b. DomainError if either is empty.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Sup over alpha of |empirical CDF - wigner_cdf| for sorted points.
double wigner_sup_distance(std::span<const double> sorted_points);

struct TailFit {
    double exponent = 0.0;
    double coefficient = 0.0;
    int points = 0;
};

/// Least squares of log value on log lambda over grid points in [lo, hi] with
/// positive value. DomainError with fewer than 5 such points.
TailFit tail_fit(const CountingCurve& curve, double lo, double hi);

/// sup over the grid of |P(scaled right >= lambda) - exp(-(N / W^{6/5}) mean sigma_R(lambda))|.
/// DomainError unless the summary is in the poisson regime.
double survival_consistency(const EnsembleSummary& summary);

/// max(|alpha_max|, |alpha_min|) of H / (2 sqrt(2W)).
double norm_statistic(const BandMatrix& H, Vertex budget = kDefaultEigenBudget);

/// sum |v|^4 / (sum |v|^2)^2. DomainError for the zero vector.
double ipr(std::span<const Complex> v);

double median(std::vector<double> values);

} // namespace bandedge

#pragma once

// Chebyshev polynomials of the second kind and the non-backtracking operators
// H^(n) built from them.
//
// Two normalizations are in play. The moment machinery here works with
// H / (2 sqrt(D - 1)), D the vertex degree (2W away from the wrap-around case);
// edge statistics (edge_stats.hpp) use H / (2 sqrt(2W)). The helpers below
// convert between the two scales.

#include "bandedge/sampler.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace bandedge {

/// U_n(x) by the three-term recurrence; U_{-1} = U_{-2} = 0.
double chebyshev_u(int n, double x);

/// 2 sqrt(D - 1): the scale of the non-backtracking moment machinery.
double moment_scale(const BandParams& params);

/// 2 sqrt(2W): the scale of the edge statistics.
double edge_scale(const BandParams& params);

/// alpha on the edge scale -> the same spectral point on the moment scale.
double edge_to_moment(double alpha, const BandParams& params);
double moment_to_edge(double alpha, const BandParams& params);

/// Largest N for which dense n x n operator work is allowed by default.
inline constexpr Vertex kDefaultDenseBudget = 4096;

/// Dense H^(n) by the recursion
///   H^(0) = I, H^(1) = H, H^(2) = H^2 - D I, H^(m+1) = H H^(m) - (D - 1) H^(m-1).
Eigen::MatrixXcd dense_hn(const BandMatrix& H, int n, Vertex dense_budget = kDefaultDenseBudget);

/// tr H^(0), ..., tr H^(n_max) by the same recursion on dense operators.
/// Throws ResourceError if N exceeds the dense budget.
std::vector<double> nb_moment_traces(const BandMatrix& H, int n_max,
                                     Vertex dense_budget = kDefaultDenseBudget);

/// H^(n) x through the coupled two-vector recursion, O(n N W).
ComplexVector hn_apply(const BandMatrix& H, int n, std::span<const Complex> x);

struct TraceEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Hutchinson estimate of tr H^(n) from Rademacher probes. Probe p draws from
/// make_stream(seed, p + 1), so the result does not depend on scheduling.
/// Requires probes >= 2.
TraceEstimate hutchinson_trace(const BandMatrix& H, int n, int probes, const SeedSpec& seed);

/// Finite combination sum_k c_k U_k with integer coefficients.
class ChebExpansion {
public:
    ChebExpansion() = default;
    explicit ChebExpansion(std::map<int, std::int64_t> coefficients);

    const std::map<int, std::int64_t>& coefficients() const noexcept { return coefficients_; }
    std::int64_t coefficient(int degree) const;
    int max_degree() const;

    void add(int degree, std::int64_t amount);
    double evaluate(double x) const;

    friend bool operator==(const ChebExpansion&, const ChebExpansion&) = default;

private:
    std::map<int, std::int64_t> coefficients_;
};

/// U_k U_l = sum_{m=0}^{min(k,l)} U_{|l-k|+2m}.
ChebExpansion linearize_pair(int k, int l);

/// Default cap on prod (degree + 1) in expand_chebyshev_product.
inline constexpr double kDefaultProductBudget = 1e8;

/// prod_j U_{d_j} as a Chebyshev expansion, by repeated linearization.
ChebExpansion expand_chebyshev_product(std::span<const int> degrees,
                                       double budget = kDefaultProductBudget);

/// Coefficients of U_n^4 (plus = true) or U_{n+1} U_n^3 (plus = false).
ChebExpansion fourth_moment_expansion(int n, bool plus);

/// Semicircle density (2/pi) sqrt(1 - x^2) on [-1, 1].
double wigner_density(double alpha);

/// Distribution function of the semicircle law on [-1, 1].
double wigner_cdf(double alpha);

/// Atomic measure: ascending support points with positive weights.
struct SpectralMeasure {
    std::vector<double> points;
    std::vector<double> weights;

    /// Throws DomainError on unsorted points, non-positive weights or size mismatch.
    void check() const;
    double total_mass() const;

    /// Uniform weights 1/n on the given (sorted) points.
    static SpectralMeasure empirical(std::vector<double> sorted_points);

    /// Semicircle discretized by Gauss quadrature with the given number of nodes.
    static SpectralMeasure wigner_quadrature(int nodes);
};

/// int U_n d mu.
double measure_cheb_coeff(const SpectralMeasure& mu, int n);

/// rho(alpha; s)/s + sqrt(rho(alpha; s)) sum_{n=1}^s |mu_hat(n)| / n, with
/// rho(alpha; s) = max(1 - |alpha|, s^-2). This is the bracket of the
/// Erdos-Turan type inequality with its unknown constant set to 1.
double erdos_turan_gap_bound(std::span<const double> mu_hat, double alpha, int s);

struct ErdosTuranReport {
    double max_gap = 0.0;       ///< sup over the grid of |mu(alpha) - wigner_cdf(alpha)|
    double fitted_constant = 0.0; ///< sup over the grid of gap / bound
    int s = 0;
};

/// Compares the actual CDF gap of mu to the bound on a uniform alpha grid in [-1, 1].
/// Diagnostic only; nothing is asserted about fitted_constant.
ErdosTuranReport erdos_turan_report(const SpectralMeasure& mu, int s, int grid_points = 401);

} // namespace bandedge

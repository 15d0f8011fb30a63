#pragma once

// Plain and non-backtracking walks on the circulant band graph: vertices Z/NZ,
// u ~ v iff 0 < |u - v|_N <= W.

#include "bandedge/params.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstddef>
#include <set>
#include <vector>

namespace bandedge {

using BigCount = boost::multiprecision::cpp_int;

class CirculantGraph {
public:
    /// Throws DomainError unless 1 <= half_bandwidth <= floor(n_sites / 2).
    CirculantGraph(Vertex n_sites, Vertex half_bandwidth);

    Vertex n_sites() const noexcept { return n_sites_; }
    Vertex half_bandwidth() const noexcept { return half_bandwidth_; }

    /// Size of the actual neighbor set: 2W, or N - 1 once the band covers the ring.
    Vertex degree() const noexcept { return static_cast<Vertex>(offsets_.size()); }

    const std::vector<Vertex>& offsets() const noexcept { return offsets_; }

    bool adjacent(Vertex u, Vertex v) const noexcept;

private:
    Vertex n_sites_;
    Vertex half_bandwidth_;
    std::vector<Vertex> offsets_;
};

/// Normalized adjacency spectrum a_k = lambda_k / degree, k = 0..N-1.
///
/// For 2W < N this is sin(W pi k/N) / (W sin(pi k/N)) * cos((W+1) pi k/N) with
/// a_0 = 1. When W = N/2 (even N) the antipodal neighbor is single, and the
/// eigenvalues are summed over the actual offsets instead.
std::vector<double> adjacency_eigenvalues(const CirculantGraph& graph);

/// The symbol f(z) = sin(W pi z) / (W sin(pi z)) * cos((W+1) pi z), entire and
/// 1-periodic. At integer z the removable singularity is taken by its limit.
std::complex<double> symbol_f(const CirculantGraph& graph, std::complex<double> z);

/// W_n(R) / degree^n via the Fourier sum N^{-1} sum_k a_k^n exp(2 pi i R k / N).
/// Throws NumericError if the imaginary residual exceeds 1e-10 of the magnitude.
double walk_count_fourier(const CirculantGraph& graph, int n, Vertex R);

/// All R = 0..N-1 at once, in double precision.
std::vector<double> walk_distribution_fourier(const CirculantGraph& graph, int n);

/// Same Fourier sum carried out with 50 significant decimal digits. Needed
/// when the ratio W_n(R) / degree^n sits far below double rounding (deep tails).
std::vector<double> walk_distribution_fourier_precise(const CirculantGraph& graph, int n);

/// Default cap on N * degree * n for the exact (big integer) dynamic programs.
inline constexpr std::size_t kDefaultWalkBudget = 50'000'000;

/// Exact path counts W_n(R) for R = 0..N-1 by dynamic programming.
/// The entries sum to degree^n. Throws ResourceError if N * degree * n exceeds the budget.
std::vector<BigCount> walk_count_dp(const CirculantGraph& graph, int n,
                                    std::size_t budget = kDefaultWalkBudget);

/// Default cap on N * degree * n for the floating-point dynamic program.
inline constexpr double kDefaultFloatWalkBudget = 4e9;

/// W_n(R) / degree^n by the same dynamic program in double precision, one
/// normalized convolution per step. Independent of the Fourier route.
std::vector<double> walk_distribution_dp(const CirculantGraph& graph, int n,
                                         double budget = kDefaultFloatWalkBudget);

/// Number of non-backtracking paths u = u_0, u_1, ..., u_n = v on the graph with
/// u_1 not in A and u_{n-1} not in B. The DP runs over (previous, current) pairs.
BigCount nb_walk_count(const CirculantGraph& graph, int n, Vertex u, Vertex v,
                       const std::set<Vertex>& A, const std::set<Vertex>& B,
                       std::size_t budget = kDefaultWalkBudget);

/// Unspecified constants of the uniform upper bound
///   C [ (W sqrt n)^{-1} exp(-c R^2 / (n W^2)) + 1/N ].
/// The bound is reported, never asserted.
struct UpperBoundConstants {
    double C = 1.0;
    double c = 1.0;
};

struct WalkAsymptotics {
    double gaussian = 0.0;    ///< local CLT prediction for W_n(R) / (2W)^n
    double uniform = 0.0;     ///< mixed-walk prediction 1/N
    double upper_bound = 0.0; ///< uniform bound with the configured constants
};

WalkAsymptotics walk_asymptotics(const CirculantGraph& graph, int n, Vertex R,
                                 UpperBoundConstants constants = {});

} // namespace bandedge

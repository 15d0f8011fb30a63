#pragma once

// Exhaustive enumeration of closed non-backtracking k-paths on the band graph.
//
// A k-path is a tuple of closed paths p_1..p_k, p_j of length n(j), with
//   (a) every step along a band edge,
//   (b) no step immediately reversing the previous one,
//   (c) p_j ending where it starts,
//   (d) signs: every unordered edge traversed an even number of times in total;
//       phases: every edge traversed equally often in both directions.
// The number of such tuples is E prod_j tr H^(n(j)).

#include "bandedge/circulant.hpp"
#include "bandedge/sampler.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace bandedge {

/// Lengths n(1) <= ... <= n(k) of a k-path and the symmetry class deciding (d).
struct KPathSpec {
    std::vector<int> lengths;
    SymmetryClass symmetry = SymmetryClass::signs;

    /// Sorts nothing; throws DomainError if lengths is empty, unsorted or has a zero entry.
    void check() const;
    int total_length() const;
    int k() const { return static_cast<int>(lengths.size()); }
};

/// Builds a checked spec from lengths in any order.
KPathSpec make_spec(std::vector<int> lengths, SymmetryClass symmetry);

struct OracleBudget {
    int max_total_length = 10;
    Vertex max_sites = 12;
    double max_tuples = 2e8;      ///< cap on the product of per-length path list sizes
    double max_search_nodes = 1e8; ///< cap on the DFS tree size for one path length
};

/// A path as its vertex sequence u_0, ..., u_n.
using Path = std::vector<Vertex>;
using KPath = std::vector<Path>;

/// Every closed non-backtracking path of length n on the band graph of `params`,
/// in lexicographic order. Throws ResourceError past the search budget.
std::vector<Path> closed_nb_paths(const BandParams& params, int n, const OracleBudget& budget = {});

/// Condition (d) for a k-path.
bool satisfies_condition_d(const KPath& kpath, Vertex n_sites, SymmetryClass symmetry);

/// Calls visit on every k-path satisfying (a)-(d).
void for_each_valid_kpath(const BandParams& params, const KPathSpec& spec,
                          const std::function<void(const KPath&)>& visit,
                          const OracleBudget& budget = {});

/// Number of k-paths satisfying (a)-(d), i.e. E prod_j tr H^(n(j)) exactly.
std::int64_t joint_moment_paths(const BandParams& params, const KPathSpec& spec,
                                const OracleBudget& budget = {});

/// Joint cumulant of tr H^(n(1)), ..., tr H^(n(k)) from the joint moments of all
/// sub-tuples: M(S) = sum over set partitions pi of S of prod_{B in pi} T(B).
std::int64_t cumulant_T(const BandParams& params, const KPathSpec& spec,
                        const OracleBudget& budget = {});

/// Independent route to the same cumulant: for each k-path, the joint cumulant of
/// its k monomials in the matrix entries (each monomial's moment is 1 or 0), summed.
std::int64_t kpath_cumulant_sum(const BandParams& params, const KPathSpec& spec,
                                const OracleBudget& budget = {});

/// k-paths whose paths are linked into one cluster by shared unordered edges.
/// Equals cumulant_T when no single path of the tuple satisfies (d) on its own,
/// which holds for every total length <= 8 at N = 7, W = 2.
std::int64_t connected_kpath_count(const BandParams& params, const KPathSpec& spec,
                                   const OracleBudget& budget = {});

/// Default cap on the number of non-backtracking paths summed by hn_entry_via_paths.
inline constexpr double kDefaultPathSumBudget = 5e7;

/// sum of H(u_0,u_1) ... H(u_{n-1},u_n) over non-backtracking paths u -> v of length n.
Complex hn_entry_via_paths(const BandMatrix& H, Vertex u, Vertex v, int n,
                           double path_budget = kDefaultPathSumBudget);

struct DiagramClass {
    int s = 0;
    int k = 0;
    int vertex_count = 0;
    int edge_count = 0;

    friend bool operator==(const DiagramClass&, const DiagramClass&) = default;
};

/// Reduces a valid k-path to its diagram: each start vertex becomes a degree-1
/// vertex (joined by a stem where the path starts inside the image graph), every
/// other branch vertex of degree D splits into D - 2 degree-3 vertices, and
/// degree-2 vertices are suppressed. An edge traversed 2t times counts as t
/// parallel chains. Throws StructuralError if the pattern contradicts
/// vertex_count = 2s, edge_count = 3s - k, s >= k, or for phases has a loop.
DiagramClass classify_diagram(const KPath& kpath, Vertex n_sites, SymmetryClass symmetry);

/// Genus s -> number of valid k-paths with that genus.
std::map<int, std::int64_t> diagram_census(const BandParams& params, const KPathSpec& spec,
                                           const OracleBudget& budget = {});

/// Signs only: average of prod_j tr H^(n(j)) over all 2^E sign matrices, as an
/// exact integer. Throws NumericError if a trace is not integral or the sum is
/// not divisible by 2^E.
std::int64_t exhaustive_joint_moment(const BandParams& params, const std::vector<int>& lengths);

struct MonteCarloMoment {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
};

/// Mean of prod_j tr H^(n(j)) over independent matrices, replicate r drawn from
/// SeedSpec(master_seed, r).
MonteCarloMoment monte_carlo_joint_moment(const BandParams& params, const std::vector<int>& lengths,
                                          std::int64_t samples, std::uint64_t master_seed);

} // namespace bandedge

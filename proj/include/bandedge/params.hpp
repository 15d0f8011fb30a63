#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bandedge {

/// Index of a site on the ring Z/NZ.
using Vertex = std::int64_t;

enum class SymmetryClass {
    signs,  ///< beta = 1, entries uniform on {+1, -1}
    phases, ///< beta = 2, entries exp(2 pi i t), t uniform on [0, 1)
};

int beta_of(SymmetryClass cls) noexcept;
SymmetryClass symmetry_from_beta(int beta);
std::string_view to_string(SymmetryClass cls) noexcept;

/// min(|u - v|, N - |u - v|) after reducing both indices mod N.
Vertex circular_distance(Vertex u, Vertex v, Vertex n_sites) noexcept;

/// Reduces any integer to the representative in [0, N).
Vertex wrap(Vertex u, Vertex n_sites) noexcept;

/// Offsets d with 0 < |d|_N <= W, each residue class listed once, ascending
/// in (-N/2, N/2]. For even N and W = N/2 the antipodal offset appears once.
std::vector<Vertex> neighbor_offsets(Vertex n_sites, Vertex half_bandwidth);

/// Ensemble description of a periodic band matrix.
struct BandParams {
    Vertex n_sites = 0;
    Vertex half_bandwidth = 0;
    SymmetryClass symmetry = SymmetryClass::signs;

    /// Throws DomainError unless 1 <= W <= floor(N/2).
    void check() const;

    /// Number of neighbors of each site; 2W unless the band wraps onto itself.
    Vertex degree() const;

    /// Number of independent (stored) band entries, N * degree / 2.
    std::int64_t edge_count() const;

    friend bool operator==(const BandParams&, const BandParams&) = default;
};

} // namespace bandedge

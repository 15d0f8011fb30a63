#include "bandedge/params.hpp"

#include "bandedge/errors.hpp"

#include <fmt/format.h>

namespace bandedge {

int beta_of(SymmetryClass cls) noexcept {
    return cls == SymmetryClass::signs ? 1 : 2;
}

SymmetryClass symmetry_from_beta(int beta) {
    switch (beta) {
    case 1: return SymmetryClass::signs;
    case 2: return SymmetryClass::phases;
    default: throw DomainError(fmt::format("beta must be 1 or 2, got {}", beta));
    }
}

std::string_view to_string(SymmetryClass cls) noexcept {
    return cls == SymmetryClass::signs ? "signs" : "phases";
}

Vertex wrap(Vertex u, Vertex n_sites) noexcept {
    Vertex r = u % n_sites;
    return r < 0 ? r + n_sites : r;
}

Vertex circular_distance(Vertex u, Vertex v, Vertex n_sites) noexcept {
    const Vertex d = wrap(u - v, n_sites);
    return d < n_sites - d ? d : n_sites - d;
}

std::vector<Vertex> neighbor_offsets(Vertex n_sites, Vertex half_bandwidth) {
    std::vector<Vertex> out;
    for (Vertex d = -half_bandwidth; d <= half_bandwidth; ++d) {
        if (d == 0) continue;
        // -N/2 and N/2 are the same residue; keep the positive one.
        if (2 * d == -n_sites) continue;
        out.push_back(d);
    }
    return out;
}

void BandParams::check() const {
    if (n_sites < 2) {
        throw DomainError(fmt::format("n_sites must be >= 2, got {}", n_sites));
    }
    if (half_bandwidth < 1 || half_bandwidth > n_sites / 2) {
        throw DomainError(fmt::format("half_bandwidth must lie in [1, {}], got {}",
                                      n_sites / 2, half_bandwidth));
    }
}

Vertex BandParams::degree() const {
    return 2 * half_bandwidth == n_sites ? n_sites - 1 : 2 * half_bandwidth;
}

std::int64_t BandParams::edge_count() const {
    return n_sites * degree() / 2;
}

} // namespace bandedge

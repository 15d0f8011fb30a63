#pragma once

#include "bandedge/params.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace bandedge {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Per-replicate random stream identity. The stream is a deterministic function
/// of (master_seed, replicate_index) only.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t replicate_index = 0;
};

/// Name of the generator recorded in experiment manifests.
inline constexpr const char* kRngIdentifier = "std::mt19937_64 seeded by std::seed_seq(master lo/hi, replicate lo/hi, salt)";

/// Independent stream for a replicate. `salt` separates sub-streams of the same
/// replicate (e.g. matrix entries vs. trace probes).
std::mt19937_64 make_stream(const SeedSpec& seed, std::uint64_t salt = 0);

/// One stored band entry: H(u, v) = value and H(v, u) = conj(value).
struct BandEntry {
    Vertex u = 0;
    Vertex v = 0;
    Complex value{};

    friend bool operator==(const BandEntry&, const BandEntry&) = default;
};

/// Hermitian matrix on Z/NZ given by its stored upper entries. The canonical
/// upper entry for the pair {u, u + d} (1 <= d <= W) is (u, u + d mod N); for
/// even N and d = N/2 the pair is stored once, with u < N/2.
///
/// Construction does not validate; see validate().
class BandMatrix {
public:
    BandMatrix(BandParams params, std::vector<BandEntry> entries);

    const BandParams& params() const noexcept { return params_; }
    Vertex dimension() const noexcept { return params_.n_sites; }
    const std::vector<BandEntry>& entries() const noexcept { return entries_; }

    /// Matrix element H(u, v), summing every stored entry that touches it.
    Complex at(Vertex u, Vertex v) const;

    /// Copy with entry (u, v) replaced (or appended if absent).
    BandMatrix with_entry(Vertex u, Vertex v, Complex value) const;

    Eigen::MatrixXcd dense() const;

    friend bool operator==(const BandMatrix&, const BandMatrix&) = default;

private:
    BandParams params_;
    std::vector<BandEntry> entries_;
};

/// Canonical (u, v) pairs of the independent entries, in sampling order.
std::vector<std::pair<Vertex, Vertex>> canonical_pairs(const BandParams& params);

/// Random signs (beta = 1) or random phases (beta = 2) on the canonical pairs.
BandMatrix sample_band_matrix(const BandParams& params, const SeedSpec& seed);

/// y = H x in O(N W). Throws DomainError on dimension mismatch.
ComplexVector matvec(const BandMatrix& H, std::span<const Complex> x);

enum class ViolationKind {
    diagonal,      ///< H(u, u) != 0
    band,          ///< stored entry with |u - v|_N > W
    out_of_range,  ///< index outside [0, N)
    duplicate,     ///< the same unordered pair stored more than once
    hermitian,     ///< both orientations stored with non-conjugate values
    sign_value,    ///< beta = 1 entry not in {+1, -1}
    unit_modulus,  ///< beta = 2 entry with |H(u, v)| != 1
};

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
    ViolationKind kind;
    Vertex u = 0;
    Vertex v = 0;
    std::string message;
};

/// Every broken invariant of H. Empty means valid.
std::vector<Violation> validate(const BandMatrix& H, double tolerance = 1e-12);

/// Largest edge count accepted by the exhaustive enumeration (2^24 matrices).
inline constexpr int kMaxEnumeratedEdges = 24;

/// All 2^E sign matrices for beta = 1, indexed so that bit e of `index` is the
/// sign (0 -> +1, 1 -> -1) of canonical pair e.
class SignAssignments {
public:
    /// Throws DomainError for beta = 2 and ResourceError for E > 24.
    explicit SignAssignments(const BandParams& params);

    std::uint64_t size() const noexcept { return std::uint64_t{1} << pairs_.size(); }
    int edge_count() const noexcept { return static_cast<int>(pairs_.size()); }
    BandMatrix at(std::uint64_t index) const;

    void for_each(const std::function<void(const BandMatrix&)>& visit) const;

private:
    BandParams params_;
    std::vector<std::pair<Vertex, Vertex>> pairs_;
};

/// CSV dump with header `u,v,re,im`, one row per stored entry, 17 significant digits.
void write_matrix_csv(std::ostream& out, const BandMatrix& H);

/// Inverse of write_matrix_csv. Throws DomainError on malformed input.
BandMatrix read_matrix_csv(std::istream& in, const BandParams& params);

} // namespace bandedge

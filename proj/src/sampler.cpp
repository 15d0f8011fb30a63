#include "bandedge/sampler.hpp"

#include "bandedge/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace bandedge {

std::mt19937_64 make_stream(const SeedSpec& seed, std::uint64_t salt) {
    auto lo = [](std::uint64_t x) { return static_cast<std::uint32_t>(x & 0xffffffffu); };
    auto hi = [](std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); };
    std::seed_seq seq{lo(seed.master_seed), hi(seed.master_seed),
                      lo(seed.replicate_index), hi(seed.replicate_index),
                      lo(salt), hi(salt)};
    return std::mt19937_64(seq);
}

BandMatrix::BandMatrix(BandParams params, std::vector<BandEntry> entries)
    : params_(params), entries_(std::move(entries)) {}

Complex BandMatrix::at(Vertex u, Vertex v) const {
    Complex sum{};
    for (const auto& e : entries_) {
        if (e.u == u && e.v == v) sum += e.value;
        if (e.u != e.v && e.u == v && e.v == u) sum += std::conj(e.value);
    }
    return sum;
}

BandMatrix BandMatrix::with_entry(Vertex u, Vertex v, Complex value) const {
    auto entries = entries_;
    auto it = std::find_if(entries.begin(), entries.end(),
                           [&](const BandEntry& e) { return e.u == u && e.v == v; });
    if (it != entries.end()) {
        it->value = value;
    } else {
        entries.push_back({u, v, value});
    }
    return BandMatrix(params_, std::move(entries));
}

Eigen::MatrixXcd BandMatrix::dense() const {
    const auto n = static_cast<Eigen::Index>(params_.n_sites);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& e : entries_) {
        m(e.u, e.v) += e.value;
        if (e.u != e.v) m(e.v, e.u) += std::conj(e.value);
    }
    return m;
}

std::vector<std::pair<Vertex, Vertex>> canonical_pairs(const BandParams& params) {
    params.check();
    const Vertex N = params.n_sites;
    std::vector<std::pair<Vertex, Vertex>> pairs;
    pairs.reserve(static_cast<std::size_t>(params.edge_count()));
    for (Vertex u = 0; u < N; ++u) {
        for (Vertex d = 1; d <= params.half_bandwidth; ++d) {
            if (2 * d == N && u >= N / 2) continue;
            pairs.emplace_back(u, wrap(u + d, N));
        }
    }
    return pairs;
}

BandMatrix sample_band_matrix(const BandParams& params, const SeedSpec& seed) {
    const auto pairs = canonical_pairs(params);
    auto rng = make_stream(seed);
    std::vector<BandEntry> entries;
    entries.reserve(pairs.size());
    for (const auto& [u, v] : pairs) {
        Complex value;
        if (params.symmetry == SymmetryClass::signs) {
            value = (rng() >> 63) != 0 ? -1.0 : 1.0;
        } else {
            // t uniform on [0, 1) with 53 random bits.
            const double t = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            value = std::polar(1.0, 2.0 * std::numbers::pi * t);
        }
        entries.push_back({u, v, value});
    }
    return BandMatrix(params, std::move(entries));
}

ComplexVector matvec(const BandMatrix& H, std::span<const Complex> x) {
    const auto n = static_cast<std::size_t>(H.dimension());
    if (x.size() != n) {
        throw DomainError(fmt::format("matvec: vector has length {}, matrix dimension is {}",
                                      x.size(), n));
    }
    ComplexVector y(n);
    for (const auto& e : H.entries()) {
        y[e.u] += e.value * x[e.v];
        if (e.u != e.v) y[e.v] += std::conj(e.value) * x[e.u];
    }
    return y;
}

std::string_view to_string(ViolationKind kind) noexcept {
    switch (kind) {
    case ViolationKind::diagonal: return "diagonal";
    case ViolationKind::band: return "band";
    case ViolationKind::out_of_range: return "out_of_range";
    case ViolationKind::duplicate: return "duplicate";
    case ViolationKind::hermitian: return "hermitian";
    case ViolationKind::sign_value: return "sign_value";
    case ViolationKind::unit_modulus: return "unit_modulus";
    }
    return "unknown";
}

std::vector<Violation> validate(const BandMatrix& H, double tolerance) {
    std::vector<Violation> out;
    const auto& p = H.params();
    const Vertex N = p.n_sites;
    auto report = [&](ViolationKind kind, Vertex u, Vertex v, std::string message) {
        out.push_back({kind, u, v, std::move(message)});
    };

    // Unordered pair -> first stored entry, to catch duplicates and orientation clashes.
    std::map<std::pair<Vertex, Vertex>, const BandEntry*> seen;
    for (const auto& e : H.entries()) {
        if (e.u < 0 || e.u >= N || e.v < 0 || e.v >= N) {
            report(ViolationKind::out_of_range, e.u, e.v,
                   fmt::format("entry ({}, {}) outside [0, {})", e.u, e.v, N));
            continue;
        }
        if (e.u == e.v) {
            if (std::abs(e.value) > tolerance) {
                report(ViolationKind::diagonal, e.u, e.v,
                       fmt::format("diagonal entry at {} is nonzero", e.u));
            }
            continue;
        }
        if (circular_distance(e.u, e.v, N) > p.half_bandwidth && std::abs(e.value) > tolerance) {
            report(ViolationKind::band, e.u, e.v,
                   fmt::format("entry ({}, {}) at circular distance {} > W = {}", e.u, e.v,
                               circular_distance(e.u, e.v, N), p.half_bandwidth));
        }
        if (p.symmetry == SymmetryClass::signs) {
            if (std::abs(e.value.imag()) > tolerance ||
                std::abs(std::abs(e.value.real()) - 1.0) > tolerance) {
                report(ViolationKind::sign_value, e.u, e.v,
                       fmt::format("entry ({}, {}) = ({}, {}) is not +-1", e.u, e.v,
                                   e.value.real(), e.value.imag()));
            }
        } else if (std::abs(std::abs(e.value) - 1.0) > tolerance) {
            report(ViolationKind::unit_modulus, e.u, e.v,
                   fmt::format("entry ({}, {}) has modulus {}", e.u, e.v, std::abs(e.value)));
        }

        const auto key = std::minmax(e.u, e.v);
        auto [it, inserted] = seen.emplace(key, &e);
        if (inserted) continue;
        const BandEntry& first = *it->second;
        if (first.u == e.u) {
            report(ViolationKind::duplicate, e.u, e.v,
                   fmt::format("pair ({}, {}) stored more than once", e.u, e.v));
        } else if (std::abs(first.value - std::conj(e.value)) > tolerance) {
            report(ViolationKind::hermitian, e.u, e.v,
                   fmt::format("H({0}, {1}) and H({1}, {0}) are not conjugate", e.u, e.v));
        } else {
            report(ViolationKind::duplicate, e.u, e.v,
                   fmt::format("pair ({}, {}) stored in both orientations", e.u, e.v));
        }
    }
    return out;
}

SignAssignments::SignAssignments(const BandParams& params) : params_(params) {
    if (params.symmetry != SymmetryClass::signs) {
        throw DomainError("exhaustive enumeration is only defined for random signs (beta = 1)");
    }
    pairs_ = canonical_pairs(params);
    if (pairs_.size() > static_cast<std::size_t>(kMaxEnumeratedEdges)) {
        throw ResourceError(fmt::format("{} edges exceed the enumeration budget of {}",
                                        pairs_.size(), kMaxEnumeratedEdges));
    }
}

BandMatrix SignAssignments::at(std::uint64_t index) const {
    std::vector<BandEntry> entries;
    entries.reserve(pairs_.size());
    for (std::size_t e = 0; e < pairs_.size(); ++e) {
        const double sign = ((index >> e) & 1u) != 0 ? -1.0 : 1.0;
        entries.push_back({pairs_[e].first, pairs_[e].second, Complex(sign, 0.0)});
    }
    return BandMatrix(params_, std::move(entries));
}

void SignAssignments::for_each(const std::function<void(const BandMatrix&)>& visit) const {
    for (std::uint64_t i = 0; i < size(); ++i) visit(at(i));
}

void write_matrix_csv(std::ostream& out, const BandMatrix& H) {
    out << "u,v,re,im\n";
    for (const auto& e : H.entries()) {
        out << fmt::format("{},{},{:.17g},{:.17g}\n", e.u, e.v, e.value.real(), e.value.imag());
    }
}

BandMatrix read_matrix_csv(std::istream& in, const BandParams& params) {
    std::string line;
    if (!std::getline(in, line) || line != "u,v,re,im") {
        throw DomainError("matrix CSV: expected header 'u,v,re,im'");
    }
    std::vector<BandEntry> entries;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        BandEntry e;
        double re = 0.0;
        double im = 0.0;
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(row >> e.u >> c1 >> e.v >> c2 >> re >> c3 >> im) || c1 != ',' || c2 != ',' ||
            c3 != ',') {
            throw DomainError(fmt::format("matrix CSV line {}: cannot parse '{}'", line_no, line));
        }
        e.value = Complex(re, im);
        entries.push_back(e);
    }
    return BandMatrix(params, std::move(entries));
}

} // namespace bandedge

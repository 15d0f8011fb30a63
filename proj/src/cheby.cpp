#include "bandedge/cheby.hpp"

#include "bandedge/errors.hpp"

#include <Eigen/Sparse>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace bandedge {

namespace {

Eigen::SparseMatrix<Complex> sparse_of(const BandMatrix& H) {
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(2 * H.entries().size());
    for (const auto& e : H.entries()) {
        triplets.emplace_back(e.u, e.v, e.value);
        if (e.u != e.v) triplets.emplace_back(e.v, e.u, std::conj(e.value));
    }
    const auto n = static_cast<Eigen::Index>(H.dimension());
    Eigen::SparseMatrix<Complex> m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

void require_order(int n) {
    if (n < 0) throw DomainError(fmt::format("operator order must be >= 0, got {}", n));
}

void require_dense_budget(const BandMatrix& H, Vertex budget) {
    if (H.dimension() > budget) {
        throw ResourceError(fmt::format("dense operator work for N = {} exceeds budget {}",
                                        H.dimension(), budget));
    }
}

} // namespace

double chebyshev_u(int n, double x) {
    if (n < -2) throw DomainError(fmt::format("U_n undefined for n = {}", n));
    if (n < 0) return 0.0;
    double previous = 1.0;     // U_0
    double current = 2.0 * x;  // U_1
    if (n == 0) return previous;
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * x * current - previous;
        previous = current;
        current = next;
    }
    return current;
}

double moment_scale(const BandParams& params) {
    return 2.0 * std::sqrt(static_cast<double>(params.degree() - 1));
}

double edge_scale(const BandParams& params) {
    return 2.0 * std::sqrt(2.0 * static_cast<double>(params.half_bandwidth));
}

double edge_to_moment(double alpha, const BandParams& params) {
    return alpha * edge_scale(params) / moment_scale(params);
}

double moment_to_edge(double alpha, const BandParams& params) {
    return alpha * moment_scale(params) / edge_scale(params);
}

Eigen::MatrixXcd dense_hn(const BandMatrix& H, int n, Vertex dense_budget) {
    require_order(n);
    require_dense_budget(H, dense_budget);
    const auto N = static_cast<Eigen::Index>(H.dimension());
    const double D = static_cast<double>(H.params().degree());
    const auto S = sparse_of(H);

    Eigen::MatrixXcd previous = Eigen::MatrixXcd::Identity(N, N);
    if (n == 0) return previous;
    Eigen::MatrixXcd current = S * previous;
    for (int m = 1; m < n; ++m) {
        const double back = m == 1 ? D : D - 1.0;
        Eigen::MatrixXcd next = S * current - back * previous;
        previous = std::move(current);
        current = std::move(next);
    }
    return current;
}

std::vector<double> nb_moment_traces(const BandMatrix& H, int n_max, Vertex dense_budget) {
    if (n_max < 1) throw DomainError(fmt::format("n_max must be >= 1, got {}", n_max));
    require_dense_budget(H, dense_budget);
    const auto N = static_cast<Eigen::Index>(H.dimension());
    const double D = static_cast<double>(H.params().degree());
    const auto S = sparse_of(H);

    std::vector<double> traces;
    traces.reserve(static_cast<std::size_t>(n_max) + 1);
    Eigen::MatrixXcd previous = Eigen::MatrixXcd::Identity(N, N);
    Eigen::MatrixXcd current = S * previous;
    traces.push_back(static_cast<double>(N));
    traces.push_back(current.trace().real());
    for (int m = 1; m < n_max; ++m) {
        const double back = m == 1 ? D : D - 1.0;
        Eigen::MatrixXcd next = S * current - back * previous;
        previous = std::move(current);
        current = std::move(next);
        traces.push_back(current.trace().real());
    }
    return traces;
}

ComplexVector hn_apply(const BandMatrix& H, int n, std::span<const Complex> x) {
    require_order(n);
    ComplexVector previous(x.begin(), x.end());
    if (previous.size() != static_cast<std::size_t>(H.dimension())) {
        throw DomainError(fmt::format("hn_apply: vector has length {}, matrix dimension is {}",
                                      previous.size(), H.dimension()));
    }
    if (n == 0) return previous;
    const double D = static_cast<double>(H.params().degree());
    ComplexVector current = matvec(H, previous);
    for (int m = 1; m < n; ++m) {
        const double back = m == 1 ? D : D - 1.0;
        ComplexVector next = matvec(H, current);
        for (std::size_t i = 0; i < next.size(); ++i) next[i] -= back * previous[i];
        previous.swap(current);
        current.swap(next);
    }
    return current;
}

TraceEstimate hutchinson_trace(const BandMatrix& H, int n, int probes, const SeedSpec& seed) {
    if (probes < 2) throw DomainError(fmt::format("need at least 2 probes, got {}", probes));
    const auto N = static_cast<std::size_t>(H.dimension());
    std::vector<double> samples(static_cast<std::size_t>(probes));
    ComplexVector z(N);
    for (int p = 0; p < probes; ++p) {
        auto rng = make_stream(seed, static_cast<std::uint64_t>(p) + 1);
        for (auto& zi : z) zi = (rng() >> 63) != 0 ? -1.0 : 1.0;
        const auto y = hn_apply(H, n, z);
        double value = 0.0;
        for (std::size_t i = 0; i < N; ++i) value += (std::conj(z[i]) * y[i]).real();
        samples[p] = value;
    }
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / probes;
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double variance = ss / (probes - 1);
    return {mean, std::sqrt(variance / probes)};
}

ChebExpansion::ChebExpansion(std::map<int, std::int64_t> coefficients)
    : coefficients_(std::move(coefficients)) {
    for (auto it = coefficients_.begin(); it != coefficients_.end();) {
        if (it->first < 0) throw DomainError("Chebyshev expansion degrees must be >= 0");
        it = it->second == 0 ? coefficients_.erase(it) : std::next(it);
    }
}

std::int64_t ChebExpansion::coefficient(int degree) const {
    const auto it = coefficients_.find(degree);
    return it == coefficients_.end() ? 0 : it->second;
}

int ChebExpansion::max_degree() const {
    return coefficients_.empty() ? -1 : coefficients_.rbegin()->first;
}

void ChebExpansion::add(int degree, std::int64_t amount) {
    if (degree < 0) throw DomainError("Chebyshev expansion degrees must be >= 0");
    auto& slot = coefficients_[degree];
    slot += amount;
    if (slot == 0) coefficients_.erase(degree);
}

double ChebExpansion::evaluate(double x) const {
    double sum = 0.0;
    for (const auto& [degree, c] : coefficients_) sum += static_cast<double>(c) * chebyshev_u(degree, x);
    return sum;
}

ChebExpansion linearize_pair(int k, int l) {
    if (k < 0 || l < 0) throw DomainError("linearize_pair needs nonnegative degrees");
    ChebExpansion out;
    for (int m = 0; m <= std::min(k, l); ++m) out.add(std::abs(l - k) + 2 * m, 1);
    return out;
}

ChebExpansion expand_chebyshev_product(std::span<const int> degrees, double budget) {
    double size = 1.0;
    for (int d : degrees) {
        if (d < 0) throw DomainError("Chebyshev degrees must be >= 0");
        size *= d + 1.0;
    }
    if (size > budget) {
        throw ResourceError(fmt::format("product of (degree + 1) = {} exceeds budget {}", size, budget));
    }
    ChebExpansion product(std::map<int, std::int64_t>{{0, 1}});
    for (int d : degrees) {
        ChebExpansion next;
        for (const auto& [degree, c] : product.coefficients()) {
            for (int m = 0; m <= std::min(degree, d); ++m) next.add(std::abs(d - degree) + 2 * m, c);
        }
        product = std::move(next);
    }
    return product;
}

ChebExpansion fourth_moment_expansion(int n, bool plus) {
    const std::vector<int> degrees{plus ? n : n + 1, n, n, n};
    return expand_chebyshev_product(degrees);
}

double wigner_density(double alpha) {
    if (alpha <= -1.0 || alpha >= 1.0) return 0.0;
    return 2.0 / std::numbers::pi * std::sqrt(1.0 - alpha * alpha);
}

double wigner_cdf(double alpha) {
    if (alpha <= -1.0) return 0.0;
    if (alpha >= 1.0) return 1.0;
    return 0.5 + (alpha * std::sqrt(1.0 - alpha * alpha) + std::asin(alpha)) / std::numbers::pi;
}

void SpectralMeasure::check() const {
    if (points.size() != weights.size()) {
        throw DomainError("spectral measure: points and weights differ in length");
    }
    if (!std::is_sorted(points.begin(), points.end())) {
        throw DomainError("spectral measure: support points must be ascending");
    }
    if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w > 0.0); })) {
        throw DomainError("spectral measure: weights must be positive");
    }
}

double SpectralMeasure::total_mass() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

SpectralMeasure SpectralMeasure::empirical(std::vector<double> sorted_points) {
    SpectralMeasure mu;
    const double w = 1.0 / static_cast<double>(sorted_points.size());
    mu.weights.assign(sorted_points.size(), w);
    mu.points = std::move(sorted_points);
    mu.check();
    return mu;
}

SpectralMeasure SpectralMeasure::wigner_quadrature(int nodes) {
    if (nodes < 1) throw DomainError("quadrature needs at least one node");
    // Gauss rule for the weight sqrt(1 - x^2): x_i = cos(i pi / (M + 1)),
    // w_i = pi / (M + 1) sin^2(i pi / (M + 1)); exact for degree <= 2M + 1.
    SpectralMeasure mu;
    mu.points.resize(static_cast<std::size_t>(nodes));
    mu.weights.resize(static_cast<std::size_t>(nodes));
    const double step = std::numbers::pi / (nodes + 1.0);
    for (int i = 1; i <= nodes; ++i) {
        const double theta = step * i;
        const auto slot = static_cast<std::size_t>(nodes - i);
        mu.points[slot] = std::cos(theta);
        mu.weights[slot] = 2.0 / (nodes + 1.0) * std::sin(theta) * std::sin(theta);
    }
    return mu;
}

double measure_cheb_coeff(const SpectralMeasure& mu, int n) {
    if (n < 0) throw DomainError("coefficient index must be >= 0");
    double sum = 0.0;
    for (std::size_t i = 0; i < mu.points.size(); ++i) sum += mu.weights[i] * chebyshev_u(n, mu.points[i]);
    return sum;
}

double erdos_turan_gap_bound(std::span<const double> mu_hat, double alpha, int s) {
    if (s < 1) throw DomainError("s must be >= 1");
    if (mu_hat.size() != static_cast<std::size_t>(s)) {
        throw DomainError(fmt::format("expected {} coefficients, got {}", s, mu_hat.size()));
    }
    const double rho = std::max(1.0 - std::abs(alpha), 1.0 / (static_cast<double>(s) * s));
    double tail = 0.0;
    for (int n = 1; n <= s; ++n) tail += std::abs(mu_hat[n - 1]) / n;
    return rho / s + std::sqrt(rho) * tail;
}

ErdosTuranReport erdos_turan_report(const SpectralMeasure& mu, int s, int grid_points) {
    mu.check();
    if (grid_points < 2) throw DomainError("grid needs at least two points");
    std::vector<double> coefficients(static_cast<std::size_t>(s));
    for (int n = 1; n <= s; ++n) coefficients[n - 1] = measure_cheb_coeff(mu, n);

    const double mass = mu.total_mass();
    ErdosTuranReport report;
    report.s = s;
    for (int j = 0; j < grid_points; ++j) {
        const double alpha = -1.0 + 2.0 * j / (grid_points - 1.0);
        const auto end = std::upper_bound(mu.points.begin(), mu.points.end(), alpha);
        const auto count = static_cast<std::size_t>(end - mu.points.begin());
        const double cdf =
            std::accumulate(mu.weights.begin(), mu.weights.begin() + static_cast<std::ptrdiff_t>(count), 0.0) / mass;
        const double gap = std::abs(cdf - wigner_cdf(alpha));
        const double bound = erdos_turan_gap_bound(coefficients, alpha, s);
        report.max_gap = std::max(report.max_gap, gap);
        report.fitted_constant = std::max(report.fitted_constant, gap / bound);
    }
    return report;
}

} // namespace bandedge

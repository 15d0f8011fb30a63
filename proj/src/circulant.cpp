#include "bandedge/circulant.hpp"

#include "bandedge/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bandedge {

namespace {

using Precise = boost::multiprecision::cpp_bin_float_50;

void require_length(int n) {
    if (n < 1) throw DomainError(fmt::format("walk length must be >= 1, got {}", n));
}

// cos(2 pi m / N) for m = 0..N-1, mirrored so that table[m] == table[N - m] bit for bit.
template <class Real>
std::vector<Real> cosine_table(Vertex n_sites) {
    using std::cos;
    std::vector<Real> table(static_cast<std::size_t>(n_sites));
    const Real two_pi = 2 * boost::math::constants::pi<Real>();
    for (Vertex m = 0; 2 * m <= n_sites; ++m) {
        table[m] = cos(two_pi * m / n_sites);
        table[(n_sites - m) % n_sites] = table[m];
    }
    return table;
}

// a_k = degree^{-1} sum over offsets of cos(2 pi k d / N), mirrored in k.
template <class Real>
std::vector<Real> eigenvalues_from_offsets(const CirculantGraph& graph,
                                           const std::vector<Real>& cosines) {
    const Vertex n = graph.n_sites();
    std::vector<Real> a(static_cast<std::size_t>(n));
    for (Vertex k = 0; 2 * k <= n; ++k) {
        Real sum = 0;
        for (Vertex d : graph.offsets()) sum += cosines[wrap(k * d, n)];
        a[k] = sum / graph.degree();
        a[(n - k) % n] = a[k];
    }
    return a;
}

double closed_form_eigenvalue(Vertex W, Vertex N, Vertex k) {
    if (wrap(k, N) == 0) return 1.0;
    const double x = std::numbers::pi * static_cast<double>(k) / static_cast<double>(N);
    return std::sin(static_cast<double>(W) * x) / (static_cast<double>(W) * std::sin(x)) *
           std::cos(static_cast<double>(W + 1) * x);
}

template <class Real>
std::vector<Real> fourier_distribution(const std::vector<Real>& a,
                                       const std::vector<Real>& cosines, int n) {
    using std::pow;
    const auto size = static_cast<Vertex>(a.size());
    std::vector<Real> powered(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) powered[k] = pow(a[k], n);
    std::vector<Real> out(a.size());
    for (Vertex R = 0; R < size; ++R) {
        Real sum = 0;
        for (Vertex k = 0; k < size; ++k) sum += powered[k] * cosines[(R * k) % size];
        out[R] = sum / size;
    }
    return out;
}

} // namespace

CirculantGraph::CirculantGraph(Vertex n_sites, Vertex half_bandwidth)
    : n_sites_(n_sites), half_bandwidth_(half_bandwidth) {
    BandParams{n_sites, half_bandwidth, SymmetryClass::signs}.check();
    offsets_ = neighbor_offsets(n_sites, half_bandwidth);
}

bool CirculantGraph::adjacent(Vertex u, Vertex v) const noexcept {
    const Vertex d = circular_distance(u, v, n_sites_);
    return d > 0 && d <= half_bandwidth_;
}

std::vector<double> adjacency_eigenvalues(const CirculantGraph& graph) {
    const Vertex N = graph.n_sites();
    const Vertex W = graph.half_bandwidth();
    if (2 * W == N) {
        return eigenvalues_from_offsets(graph, cosine_table<double>(N));
    }
    std::vector<double> a(static_cast<std::size_t>(N));
    for (Vertex k = 0; 2 * k <= N; ++k) {
        a[k] = closed_form_eigenvalue(W, N, k);
        a[(N - k) % N] = a[k];
    }
    return a;
}

std::complex<double> symbol_f(const CirculantGraph& graph, std::complex<double> z) {
    const double W = static_cast<double>(graph.half_bandwidth());
    const double pi = std::numbers::pi;
    const std::complex<double> outer = std::cos((W + 1.0) * pi * z);
    if (z.imag() == 0.0 && z.real() == std::round(z.real())) {
        // sin(W pi z) / (W sin(pi z)) -> (-1)^{m (W - 1)} as z -> m.
        const auto m = static_cast<long long>(std::round(z.real()));
        const long long parity = (m * (graph.half_bandwidth() - 1)) % 2;
        return (parity == 0 ? 1.0 : -1.0) * outer;
    }
    return std::sin(W * pi * z) / (W * std::sin(pi * z)) * outer;
}

namespace {

// Double-precision Fourier sum with the sine half checked against the magnitude.
class FourierWalk {
public:
    FourierWalk(const CirculantGraph& graph, int n)
        : n_sites_(graph.n_sites()), n_(n), cosines_(cosine_table<double>(graph.n_sites())),
          sines_(static_cast<std::size_t>(graph.n_sites())) {
        require_length(n);
        const auto a = adjacency_eigenvalues(graph);
        powered_.resize(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            powered_[k] = std::pow(a[k], n);
            magnitude_ += std::abs(powered_[k]);
        }
        magnitude_ /= static_cast<double>(n_sites_);
        for (Vertex m = 0; m < n_sites_; ++m) {
            sines_[m] = std::sin(2.0 * std::numbers::pi * static_cast<double>(m) /
                                 static_cast<double>(n_sites_));
        }
    }

    double at(Vertex R) const {
        R = wrap(R, n_sites_);
        double re = 0.0;
        double im = 0.0;
        for (Vertex k = 0; k < n_sites_; ++k) {
            const Vertex m = (R * k) % n_sites_;
            re += powered_[k] * cosines_[m];
            im += powered_[k] * sines_[m];
        }
        re /= static_cast<double>(n_sites_);
        im /= static_cast<double>(n_sites_);
        if (std::abs(im) > 1e-10 * magnitude_) {
            throw NumericError(fmt::format(
                "Fourier walk sum has imaginary residual {} at n={}, R={}", im, n_, R));
        }
        return re;
    }

private:
    Vertex n_sites_;
    int n_;
    std::vector<double> cosines_;
    std::vector<double> sines_;
    std::vector<double> powered_;
    double magnitude_ = 0.0;
};

} // namespace

std::vector<double> walk_distribution_fourier(const CirculantGraph& graph, int n) {
    const FourierWalk walk(graph, n);
    std::vector<double> out(static_cast<std::size_t>(graph.n_sites()));
    for (Vertex R = 0; R < graph.n_sites(); ++R) out[R] = walk.at(R);
    return out;
}

double walk_count_fourier(const CirculantGraph& graph, int n, Vertex R) {
    return FourierWalk(graph, n).at(R);
}

std::vector<double> walk_distribution_fourier_precise(const CirculantGraph& graph, int n) {
    require_length(n);
    const auto cosines = cosine_table<Precise>(graph.n_sites());
    const auto a = eigenvalues_from_offsets(graph, cosines);
    const auto sums = fourier_distribution(a, cosines, n);
    std::vector<double> out(sums.size());
    std::transform(sums.begin(), sums.end(), out.begin(),
                   [](const Precise& x) { return x.convert_to<double>(); });
    return out;
}

std::vector<BigCount> walk_count_dp(const CirculantGraph& graph, int n, std::size_t budget) {
    require_length(n);
    const Vertex N = graph.n_sites();
    const double work = static_cast<double>(N) * static_cast<double>(graph.degree()) * n;
    if (work > static_cast<double>(budget)) {
        throw ResourceError(fmt::format("walk_count_dp: N*degree*n = {} exceeds budget {}", work, budget));
    }
    std::vector<BigCount> current(static_cast<std::size_t>(N), BigCount(0));
    std::vector<BigCount> next(current.size());
    current[0] = 1;
    for (int step = 0; step < n; ++step) {
        std::fill(next.begin(), next.end(), BigCount(0));
        for (Vertex r = 0; r < N; ++r) {
            if (current[r].is_zero()) continue;
            for (Vertex d : graph.offsets()) next[wrap(r + d, N)] += current[r];
        }
        current.swap(next);
    }
    return current;
}

std::vector<double> walk_distribution_dp(const CirculantGraph& graph, int n, double budget) {
    require_length(n);
    const Vertex N = graph.n_sites();
    const double work = static_cast<double>(N) * static_cast<double>(graph.degree()) * n;
    if (work > budget) {
        throw ResourceError(fmt::format("walk_distribution_dp: N*degree*n = {} exceeds budget {}", work, budget));
    }
    const double inv = 1.0 / static_cast<double>(graph.degree());
    std::vector<double> current(static_cast<std::size_t>(N), 0.0);
    std::vector<double> next(current.size());
    current[0] = 1.0;
    for (int step = 0; step < n; ++step) {
        for (Vertex r = 0; r < N; ++r) {
            double sum = 0.0;
            for (Vertex d : graph.offsets()) {
                Vertex j = r - d;
                if (j < 0) {
                    j += N;
                } else if (j >= N) {
                    j -= N;
                }
                sum += current[j];
            }
            next[r] = sum * inv;
        }
        current.swap(next);
    }
    return current;
}

BigCount nb_walk_count(const CirculantGraph& graph, int n, Vertex u, Vertex v,
                       const std::set<Vertex>& A, const std::set<Vertex>& B,
                       std::size_t budget) {
    require_length(n);
    const Vertex N = graph.n_sites();
    const auto& offsets = graph.offsets();
    const auto deg = static_cast<std::size_t>(offsets.size());
    u = wrap(u, N);
    v = wrap(v, N);
    if (static_cast<double>(N) * static_cast<double>(deg) * n > static_cast<double>(budget)) {
        throw ResourceError(fmt::format("nb_walk_count: N*degree*n exceeds budget {}", budget));
    }
    auto in = [](const std::set<Vertex>& s, Vertex x) { return s.count(x) > 0; };

    if (n == 1) {
        return BigCount(graph.adjacent(u, v) && !in(A, v) && !in(B, u) ? 1 : 0);
    }

    // reverse[i] is the index of the offset that undoes offsets[i].
    std::vector<std::size_t> reverse(deg);
    for (std::size_t i = 0; i < deg; ++i) {
        const Vertex back = wrap(-offsets[i], N);
        for (std::size_t j = 0; j < deg; ++j) {
            if (wrap(offsets[j], N) == back) reverse[i] = j;
        }
    }

    // state[cur * deg + i]: paths currently at cur whose last step was offsets[i].
    std::vector<BigCount> state(static_cast<std::size_t>(N) * deg, BigCount(0));
    std::vector<BigCount> next(state.size());
    for (std::size_t i = 0; i < deg; ++i) {
        const Vertex first = wrap(u + offsets[i], N);
        if (!in(A, first)) state[first * deg + i] = 1;
    }
    for (int step = 2; step <= n; ++step) {
        std::fill(next.begin(), next.end(), BigCount(0));
        const bool last = step == n;
        for (Vertex cur = 0; cur < N; ++cur) {
            if (last && in(B, cur)) continue;
            for (std::size_t i = 0; i < deg; ++i) {
                const BigCount& count = state[cur * deg + i];
                if (count.is_zero()) continue;
                for (std::size_t j = 0; j < deg; ++j) {
                    if (j == reverse[i]) continue;
                    const Vertex to = wrap(cur + offsets[j], N);
                    if (last && to != v) continue;
                    next[to * deg + j] += count;
                }
            }
        }
        state.swap(next);
    }
    BigCount total = 0;
    for (std::size_t i = 0; i < deg; ++i) total += state[v * deg + i];
    return total;
}

WalkAsymptotics walk_asymptotics(const CirculantGraph& graph, int n, Vertex R,
                                 UpperBoundConstants constants) {
    require_length(n);
    const double W = static_cast<double>(graph.half_bandwidth());
    const double N = static_cast<double>(graph.n_sites());
    const double r = static_cast<double>(circular_distance(R, 0, graph.n_sites()));
    const double steps = static_cast<double>(n);
    const double spread = steps * (W + 1.0) * (2.0 * W + 1.0);

    WalkAsymptotics out;
    out.gaussian = std::exp(-3.0 * r * r / spread) / std::sqrt(std::numbers::pi * spread / 3.0);
    out.uniform = 1.0 / N;
    out.upper_bound = constants.C * (std::exp(-constants.c * r * r / (steps * W * W)) /
                                         (W * std::sqrt(steps)) +
                                     1.0 / N);
    return out;
}

} // namespace bandedge

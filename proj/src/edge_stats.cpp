#include "bandedge/edge_stats.hpp"

#include "bandedge/cheby.hpp"
#include "bandedge/errors.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace bandedge {

std::string_view to_string(Regime regime) noexcept {
    return regime == Regime::rmt ? "rmt" : "poisson";
}

std::string_view to_string(Side side) noexcept {
    return side == Side::right ? "right" : "left";
}

Regime regime_from_string(std::string_view name) {
    if (name == "rmt") return Regime::rmt;
    if (name == "poisson") return Regime::poisson;
    throw DomainError(fmt::format("unknown regime '{}', expected rmt or poisson", name));
}

namespace {

// Site order 0, N-1, 1, N-2, ...: pos(v) = 2v for 2v < N, else 2(N - v) - 1.
Vertex folded_position(Vertex v, Vertex N) { return 2 * v < N ? 2 * v : 2 * (N - v) - 1; }

// Upper triangle of the reordered matrix in LAPACK band (or full) column-major storage.
template <class Scalar>
struct Storage {
    std::vector<Scalar> data;
    lapack_int n = 0;
    lapack_int kd = 0;
    bool dense = false;
    std::vector<Vertex> position;

    lapack_int leading() const { return dense ? n : kd + 1; }
};

template <class Scalar>
Scalar value_as(Complex z) {
    if constexpr (std::is_same_v<Scalar, double>) {
        return z.real();
    } else {
        return z;
    }
}

template <class Scalar>
Scalar conj_of(Scalar z) {
    if constexpr (std::is_same_v<Scalar, double>) {
        return z;
    } else {
        return std::conj(z);
    }
}

template <class Scalar>
Storage<Scalar> build_storage(const BandMatrix& H) {
    const Vertex N = H.dimension();
    Storage<Scalar> s;
    s.n = static_cast<lapack_int>(N);
    s.position.resize(static_cast<std::size_t>(N));
    for (Vertex v = 0; v < N; ++v) s.position[v] = folded_position(v, N);
    Vertex kd = 0;
    for (const auto& e : H.entries()) kd = std::max(kd, std::abs(s.position[e.u] - s.position[e.v]));
    s.kd = static_cast<lapack_int>(kd);
    s.dense = N <= 32 || 4 * kd >= N;
    const lapack_int ld = s.leading();
    s.data.assign(static_cast<std::size_t>(ld) * static_cast<std::size_t>(N), Scalar{});
    for (const auto& e : H.entries()) {
        if (e.u == e.v) {
            const Vertex i = s.position[e.u];
            const auto row = s.dense ? i : s.kd;
            s.data[row + i * ld] += value_as<Scalar>(e.value);
            continue;
        }
        Vertex i = s.position[e.u];
        Vertex j = s.position[e.v];
        Scalar value = value_as<Scalar>(e.value);
        if (i > j) {
            std::swap(i, j);
            value = conj_of(value);
        }
        const auto row = s.dense ? i : s.kd + i - j;
        s.data[row + j * ld] += value;
    }
    return s;
}

bool is_real(const BandMatrix& H) {
    return std::all_of(H.entries().begin(), H.entries().end(),
                       [](const BandEntry& e) { return e.value.imag() == 0.0; });
}

void require_budget(const BandMatrix& H, Vertex budget) {
    H.params().check();
    if (H.dimension() > budget) {
        throw ResourceError(fmt::format("eigensolve of N = {} exceeds the budget N <= {}",
                                        H.dimension(), budget));
    }
}

void check_info(lapack_int info, const char* routine) {
    if (info != 0) throw NumericError(fmt::format("{} failed with info = {}", routine, info));
}

template <class Scalar>
std::vector<double> solve_values(Storage<Scalar> s) {
    std::vector<double> w(static_cast<std::size_t>(s.n));
    lapack_int info = 0;
    if constexpr (std::is_same_v<Scalar, double>) {
        info = s.dense ? LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', s.n, s.data.data(), s.n, w.data())
                       : LAPACKE_dsbevd(LAPACK_COL_MAJOR, 'N', 'U', s.n, s.kd, s.data.data(),
                                        s.leading(), w.data(), nullptr, 1);
        check_info(info, s.dense ? "dsyevd" : "dsbevd");
    } else {
        info = s.dense ? LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', s.n, s.data.data(), s.n, w.data())
                       : LAPACKE_zhbevd(LAPACK_COL_MAJOR, 'N', 'U', s.n, s.kd, s.data.data(),
                                        s.leading(), w.data(), nullptr, 1);
        check_info(info, s.dense ? "zheevd" : "zhbevd");
    }
    return w;
}

template <class Scalar>
std::pair<double, std::vector<Scalar>> solve_pair(Storage<Scalar> s, lapack_int index) {
    const auto n = static_cast<std::size_t>(s.n);
    std::vector<double> w(n);
    std::vector<Scalar> z(n);
    lapack_int found = 0;
    lapack_int info = 0;
    if (s.dense) {
        std::vector<lapack_int> support(2);
        if constexpr (std::is_same_v<Scalar, double>) {
            info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', s.n, s.data.data(), s.n, 0.0, 0.0,
                                  index, index, 0.0, &found, w.data(), z.data(), s.n, support.data());
        } else {
            info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', s.n, s.data.data(), s.n, 0.0, 0.0,
                                  index, index, 0.0, &found, w.data(), z.data(), s.n, support.data());
        }
        check_info(info, "dense ?evr");
    } else {
        std::vector<Scalar> q(n * n);
        std::vector<lapack_int> failed(n);
        if constexpr (std::is_same_v<Scalar, double>) {
            info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'V', 'I', 'U', s.n, s.kd, s.data.data(), s.leading(),
                                  q.data(), s.n, 0.0, 0.0, index, index, 0.0, &found, w.data(), z.data(),
                                  s.n, failed.data());
        } else {
            info = LAPACKE_zhbevx(LAPACK_COL_MAJOR, 'V', 'I', 'U', s.n, s.kd, s.data.data(), s.leading(),
                                  q.data(), s.n, 0.0, 0.0, index, index, 0.0, &found, w.data(), z.data(),
                                  s.n, failed.data());
        }
        check_info(info, "band ?bevx");
    }
    if (found != 1) throw NumericError(fmt::format("eigensolver returned {} eigenpairs, expected 1", found));
    return {w[0], std::move(z)};
}

} // namespace

std::vector<double> eigenvalues(const BandMatrix& H, Vertex budget) {
    require_budget(H, budget);
    auto w = is_real(H) ? solve_values(build_storage<double>(H))
                        : solve_values(build_storage<Complex>(H));
    const double scale = edge_scale(H.params());
    for (double& x : w) x /= scale;
    std::sort(w.begin(), w.end());
    const double trace = std::accumulate(w.begin(), w.end(), 0.0);
    if (std::abs(trace) > 1e-8 * static_cast<double>(w.size())) {
        throw NumericError(fmt::format("eigenvalue sum {} violates the zero-trace check", trace));
    }
    return w;
}

Eigenpair edge_eigenpair(const BandMatrix& H, Side side, Vertex budget) {
    require_budget(H, budget);
    const Vertex N = H.dimension();
    const auto index = static_cast<lapack_int>(side == Side::right ? N : 1);
    std::vector<Vertex> position;
    double lambda = 0.0;
    ComplexVector folded(static_cast<std::size_t>(N));
    if (is_real(H)) {
        auto s = build_storage<double>(H);
        position = s.position;
        auto [value, z] = solve_pair(std::move(s), index);
        lambda = value;
        std::copy(z.begin(), z.end(), folded.begin());
    } else {
        auto s = build_storage<Complex>(H);
        position = s.position;
        auto [value, z] = solve_pair(std::move(s), index);
        lambda = value;
        folded = std::move(z);
    }
    Eigenpair out;
    out.vector.resize(folded.size());
    for (Vertex v = 0; v < N; ++v) out.vector[v] = folded[position[v]];

    // Residual against |H| <= max row sum.
    const auto Hv = matvec(H, out.vector);
    double residual = 0.0;
    for (std::size_t i = 0; i < Hv.size(); ++i) residual += std::norm(Hv[i] - lambda * out.vector[i]);
    std::vector<double> row_sum(static_cast<std::size_t>(N), 0.0);
    for (const auto& e : H.entries()) {
        row_sum[e.u] += std::abs(e.value);
        if (e.u != e.v) row_sum[e.v] += std::abs(e.value);
    }
    const double norm_bound = *std::max_element(row_sum.begin(), row_sum.end());
    if (std::sqrt(residual) > 1e-8 * std::max(norm_bound, 1.0)) {
        throw NumericError(fmt::format("eigenpair residual {} too large", std::sqrt(residual)));
    }
    out.value = lambda / edge_scale(H.params());
    return out;
}

EdgeSample edge_sample_from(const BandParams& params, const SeedSpec& seed,
                            std::vector<double> sorted_eigenvalues) {
    if (sorted_eigenvalues.empty()) throw DomainError("edge sample needs eigenvalues");
    if (!std::is_sorted(sorted_eigenvalues.begin(), sorted_eigenvalues.end())) {
        throw DomainError("edge sample eigenvalues must be ascending");
    }
    EdgeSample s{params, seed, std::move(sorted_eigenvalues), 0.0, 0.0};
    s.alpha_min = s.eigenvalues.front();
    s.alpha_max = s.eigenvalues.back();
    return s;
}

EdgeSample make_edge_sample(const BandParams& params, const SeedSpec& seed, Vertex budget) {
    return edge_sample_from(params, seed, eigenvalues(sample_band_matrix(params, seed), budget));
}

double edge_length_scale(const BandParams& params, Regime regime) {
    if (regime == Regime::rmt) return 2.0 * std::pow(static_cast<double>(params.n_sites), 2.0 / 3.0);
    return 2.0 * std::pow(static_cast<double>(params.half_bandwidth), 0.8);
}

ScaledExtremes scaled_extremes(const BandParams& params, double alpha_max, double alpha_min,
                               Regime regime) {
    const double scale = edge_length_scale(params, regime);
    if (regime == Regime::rmt) return {scale * (alpha_max - 1.0), -scale * (alpha_min + 1.0)};
    return {scale * (1.0 - alpha_max), scale * (1.0 + alpha_min)};
}

ScaledExtremes scaled_extremes(const EdgeSample& sample, Regime regime) {
    return scaled_extremes(sample.params, sample.alpha_max, sample.alpha_min, regime);
}

std::pair<CountingCurve, CountingCurve> counting_curves(const EdgeSample& sample, Regime regime,
                                                        std::span<const double> grid) {
    if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("lambda grid must be ascending");
    const double scale = edge_length_scale(sample.params, regime);
    const double factor =
        regime == Regime::rmt
            ? 1.0
            : std::pow(static_cast<double>(sample.params.half_bandwidth), 1.2) /
                  static_cast<double>(sample.params.n_sites);
    const auto& ev = sample.eigenvalues;
    CountingCurve right{{grid.begin(), grid.end()}, {}, regime, Side::right};
    CountingCurve left{{grid.begin(), grid.end()}, {}, regime, Side::left};
    for (double lambda : grid) {
        const double t = 1.0 - lambda / scale;
        // Right: #{x > t}. Left: #{x < -t}.
        const auto above = ev.end() - std::upper_bound(ev.begin(), ev.end(), t);
        const auto below = std::lower_bound(ev.begin(), ev.end(), -t) - ev.begin();
        right.values.push_back(factor * static_cast<double>(above));
        left.values.push_back(factor * static_cast<double>(below));
    }
    return {std::move(right), std::move(left)};
}

std::vector<double> lambda_grid(double start, double stop, int count) {
    if (count < 2 || !(start < stop)) {
        throw DomainError(fmt::format("lambda grid needs start < stop and count >= 2, got ({}, {}, {})",
                                      start, stop, count));
    }
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) grid[i] = start + (stop - start) * i / (count - 1.0);
    return grid;
}

namespace {

[[noreturn]] void rethrow_for_replicate(std::exception_ptr error, int replicate) {
    const auto prefix = [&](const std::exception& e) {
        return fmt::format("replicate {}: {}", replicate, e.what());
    };
    try {
        std::rethrow_exception(error);
    } catch (const DomainError& e) {
        throw DomainError(prefix(e));
    } catch (const ResourceError& e) {
        throw ResourceError(prefix(e));
    } catch (const NumericError& e) {
        throw NumericError(prefix(e));
    } catch (const StructuralError& e) {
        throw StructuralError(prefix(e));
    } catch (const std::exception& e) {
        throw std::runtime_error(prefix(e));
    }
}

struct ReplicateResult {
    double alpha_max = 0.0;
    double alpha_min = 0.0;
    std::vector<double> sigma_R;
    std::vector<double> sigma_L;
};

} // namespace

EnsembleSummary ensemble_run(const EnsembleConfig& config) {
    config.params.check();
    if (config.replicates < 1) throw DomainError("replicates must be >= 1");
    if (config.threads < 1) throw DomainError("threads must be >= 1");
    if (!std::is_sorted(config.lambda_grid.begin(), config.lambda_grid.end())) {
        throw DomainError("lambda grid must be ascending");
    }
    if (config.params.n_sites > config.eigen_budget) {
        throw ResourceError(fmt::format("eigensolve of N = {} exceeds the budget N <= {}",
                                        config.params.n_sites, config.eigen_budget));
    }

    const auto R = static_cast<std::size_t>(config.replicates);
    std::vector<ReplicateResult> results(R);
    std::vector<std::exception_ptr> errors(R);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t r = next++; r < R; r = next++) {
            try {
                const auto sample =
                    make_edge_sample(config.params, {config.master_seed, r}, config.eigen_budget);
                auto [right, left] = counting_curves(sample, config.regime, config.lambda_grid);
                results[r] = {sample.alpha_max, sample.alpha_min, std::move(right.values),
                              std::move(left.values)};
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), R);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    }
    for (std::size_t r = 0; r < R; ++r) {
        if (errors[r]) rethrow_for_replicate(errors[r], static_cast<int>(r));
    }

    EnsembleSummary summary;
    summary.params = config.params;
    summary.regime = config.regime;
    summary.replicate_count = config.replicates;
    const std::size_t G = config.lambda_grid.size();
    std::vector<double> sum_R(G, 0.0), sum_L(G, 0.0);
    for (const auto& res : results) {
        const auto scaled = scaled_extremes(config.params, res.alpha_max, res.alpha_min, config.regime);
        summary.alpha_max.push_back(res.alpha_max);
        summary.alpha_min.push_back(res.alpha_min);
        summary.scaled_max_samples.push_back(scaled.right);
        summary.scaled_min_samples.push_back(scaled.left);
        summary.norm_ratios.push_back(std::max(std::abs(res.alpha_max), std::abs(res.alpha_min)));
        for (std::size_t g = 0; g < G; ++g) {
            sum_R[g] += res.sigma_R[g];
            sum_L[g] += res.sigma_L[g];
        }
    }
    const double count = static_cast<double>(R);
    summary.mean_curve_R = {config.lambda_grid, {}, config.regime, Side::right};
    summary.mean_curve_L = {config.lambda_grid, {}, config.regime, Side::left};
    summary.sigma_R_std.assign(G, 0.0);
    for (std::size_t g = 0; g < G; ++g) {
        const double mean_R = sum_R[g] / count;
        summary.mean_curve_R.values.push_back(mean_R);
        summary.mean_curve_L.values.push_back(sum_L[g] / count);
        if (R > 1) {
            double ss = 0.0;
            for (const auto& res : results) ss += (res.sigma_R[g] - mean_R) * (res.sigma_R[g] - mean_R);
            summary.sigma_R_std[g] = std::sqrt(ss / (count - 1.0));
        }
    }
    return summary;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_distance needs two nonempty samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double sup = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == t) ++i;
        while (j < y.size() && y[j] == t) ++j;
        sup = std::max(sup, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return sup;
}

double wigner_sup_distance(std::span<const double> sorted_points) {
    if (sorted_points.empty()) throw DomainError("wigner_sup_distance needs points");
    const double n = static_cast<double>(sorted_points.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < sorted_points.size(); ++i) {
        const double F = wigner_cdf(sorted_points[i]);
        sup = std::max({sup, std::abs(static_cast<double>(i) / n - F),
                        std::abs(static_cast<double>(i + 1) / n - F)});
    }
    return sup;
}

TailFit tail_fit(const CountingCurve& curve, double lo, double hi) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < curve.lambda_grid.size(); ++i) {
        const double lambda = curve.lambda_grid[i];
        if (lambda >= lo && lambda <= hi && lambda > 0.0 && curve.values[i] > 0.0) {
            lx.push_back(std::log(lambda));
            ly.push_back(std::log(curve.values[i]));
        }
    }
    if (lx.size() < 5) {
        throw DomainError(fmt::format("tail_fit needs >= 5 positive points in [{}, {}], found {}", lo,
                                      hi, lx.size()));
    }
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) throw DomainError("tail_fit needs distinct lambda values");
    const double slope = sxy / sxx;
    return {slope, std::exp(my - slope * mx), static_cast<int>(lx.size())};
}

double survival_consistency(const EnsembleSummary& summary) {
    if (summary.regime != Regime::poisson) {
        throw DomainError("survival_consistency is defined for the poisson regime only");
    }
    const auto& grid = summary.mean_curve_R.lambda_grid;
    const auto& sigma = summary.mean_curve_R.values;
    const double intensity = static_cast<double>(summary.params.n_sites) /
                             std::pow(static_cast<double>(summary.params.half_bandwidth), 1.2);
    const auto& samples = summary.scaled_max_samples;
    if (samples.empty()) throw DomainError("survival_consistency needs samples");
    double sup = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto hits = std::count_if(samples.begin(), samples.end(),
                                        [&](double x) { return x >= grid[g]; });
        const double empirical = static_cast<double>(hits) / static_cast<double>(samples.size());
        sup = std::max(sup, std::abs(empirical - std::exp(-intensity * sigma[g])));
    }
    return sup;
}

double norm_statistic(const BandMatrix& H, Vertex budget) {
    const auto w = eigenvalues(H, budget);
    return std::max(std::abs(w.front()), std::abs(w.back()));
}

double ipr(std::span<const Complex> v) {
    double two = 0.0;
    double four = 0.0;
    for (const auto& x : v) {
        const double m = std::norm(x);
        two += m;
        four += m * m;
    }
    if (two == 0.0) throw DomainError("ipr of the zero vector");
    return four / (two * two);
}

double median(std::vector<double> values) {
    if (values.empty()) throw DomainError("median of an empty list");
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

} // namespace bandedge

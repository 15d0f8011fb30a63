#include "bandedge/circulant.hpp"
#include "bandedge/errors.hpp"

#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace bandedge;

namespace {

std::vector<BigCount> ints(std::initializer_list<int> values) {
    std::vector<BigCount> out;
    for (int v : values) out.emplace_back(v);
    return out;
}

// Walk counts by brute force over all step sequences.
std::vector<long> brute_force_walks(const CirculantGraph& g, int n) {
    std::vector<long> counts(static_cast<std::size_t>(g.n_sites()), 0);
    const auto& off = g.offsets();
    std::vector<std::size_t> digits(static_cast<std::size_t>(n), 0);
    while (true) {
        Vertex pos = 0;
        for (auto d : digits) pos += off[d];
        ++counts[wrap(pos, g.n_sites())];
        int i = 0;
        while (i < n && ++digits[i] == off.size()) digits[i++] = 0;
        if (i == n) break;
    }
    return counts;
}

} // namespace

TEST_CASE("graph construction") {
    CHECK_THROWS_AS(CirculantGraph(7, 4), DomainError);
    const CirculantGraph g(7, 2);
    CHECK(g.degree() == 4);
    CHECK(g.adjacent(0, 5));
    CHECK_FALSE(g.adjacent(0, 3));
    CHECK_FALSE(g.adjacent(2, 2));
    CHECK(CirculantGraph(8, 4).degree() == 7);
}

TEST_CASE("adjacency eigenvalues") {
    const auto a5 = adjacency_eigenvalues(CirculantGraph(5, 2));
    CHECK(a5[0] == doctest::Approx(1.0));
    CHECK(a5[1] == doctest::Approx(-0.25));
    const auto a8 = adjacency_eigenvalues(CirculantGraph(8, 1));
    CHECK(std::abs(a8[2]) < 1e-15);
    for (Vertex k = 0; k < 8; ++k) CHECK(a8[k] == doctest::Approx(std::cos(2 * std::numbers::pi * k / 8.0)));

    SUBCASE("symmetric and bounded") {
        const CirculantGraph g(64, 5);
        const auto a = adjacency_eigenvalues(g);
        for (Vertex k = 1; k < 64; ++k) {
            CHECK(a[k] == a[64 - k]);
            CHECK(std::abs(a[k]) <= 1.0);
        }
    }
    SUBCASE("closed form against the offset sum") {
        const CirculantGraph g(31, 7);
        const auto a = adjacency_eigenvalues(g);
        for (Vertex k = 0; k < 31; ++k) {
            double sum = 0;
            for (Vertex d : g.offsets()) sum += std::cos(2 * std::numbers::pi * k * d / 31.0);
            CHECK(a[k] == doctest::Approx(sum / g.degree()).epsilon(1e-12));
        }
    }
    SUBCASE("W = N/2 uses the actual neighbor set") {
        const CirculantGraph g(8, 4);
        const auto a = adjacency_eigenvalues(g);
        CHECK(a[0] == doctest::Approx(1.0));
        // Complete graph K_8: all other eigenvalues are -1/7.
        for (Vertex k = 1; k < 8; ++k) CHECK(a[k] == doctest::Approx(-1.0 / 7.0));
    }
}

TEST_CASE("symbol f") {
    const CirculantGraph g(64, 5);
    CHECK(std::abs(symbol_f(g, 0.0) - 1.0) < 1e-15);
    const auto a = adjacency_eigenvalues(g);
    for (Vertex k = 0; k < 64; ++k) {
        CHECK(std::abs(symbol_f(g, k / 64.0) - a[k]) < 1e-12);
        CHECK(std::abs(symbol_f(g, k / 64.0 + 1.0) - symbol_f(g, k / 64.0)) < 1e-12);
    }
    // Integer limits match nearby points.
    const CirculantGraph g4(64, 4);
    for (int m = -2; m <= 2; ++m) {
        CHECK(std::abs(symbol_f(g4, double(m)) - symbol_f(g4, m + 1e-9)) < 1e-6);
    }
    // Decay away from the imaginary axis.
    for (double y : {0.01, 0.1}) {
        const double base = std::abs(symbol_f(g, {0.0, y}));
        for (int i = -50; i <= 50; ++i) {
            const double x = i / 100.0;
            CHECK(std::abs(symbol_f(g, {x, y})) / base <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("walk counts by Fourier") {
    const CirculantGraph cycle(8, 1);
    CHECK(walk_count_fourier(cycle, 2, 0) == doctest::Approx(0.5));
    CHECK(walk_count_fourier(cycle, 3, 1) == doctest::Approx(0.375));
    CHECK(std::abs(walk_count_fourier(CirculantGraph(12, 2), 1, 5)) < 1e-15);

    const CirculantGraph g(37, 4);
    const auto dist = walk_distribution_fourier(g, 9);
    CHECK(std::accumulate(dist.begin(), dist.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    for (Vertex R = 1; R < 37; ++R) CHECK(dist[R] == dist[37 - R]);
    CHECK_THROWS_AS(walk_count_fourier(g, 0, 0), DomainError);
}

TEST_CASE("walk counts by dynamic programming") {
    const CirculantGraph cycle(8, 1);
    CHECK(walk_count_dp(cycle, 2) == ints({2, 0, 1, 0, 0, 0, 1, 0}));
    CHECK(walk_count_dp(cycle, 1) == ints({0, 1, 0, 0, 0, 0, 0, 1}));
    for (int n = 1; n <= 9; ++n) {
        const auto counts = walk_count_dp(cycle, n);
        for (Vertex R = 0; R < 8; ++R) {
            if ((n + R) % 2 == 1) CHECK(counts[R] == 0);
        }
    }
    SUBCASE("brute force oracle") {
        for (auto [N, W, n] : {std::tuple{7, 2, 5}, std::tuple{10, 3, 4}, std::tuple{8, 4, 4}}) {
            const CirculantGraph g(N, W);
            const auto dp = walk_count_dp(g, n);
            const auto brute = brute_force_walks(g, n);
            for (Vertex R = 0; R < N; ++R) CHECK(dp[R] == brute[R]);
        }
    }
    SUBCASE("total is degree^n") {
        const CirculantGraph g(64, 4);
        const auto counts = walk_count_dp(g, 40);
        const BigCount total = std::accumulate(counts.begin(), counts.end(), BigCount(0));
        CHECK(total == boost::multiprecision::pow(BigCount(8), 40));
    }
    SUBCASE("float DP matches") {
        const CirculantGraph g(64, 4);
        const auto counts = walk_count_dp(g, 30);
        const auto approx = walk_distribution_dp(g, 30);
        const double total = std::pow(8.0, 30);
        for (Vertex R = 0; R < 64; ++R) {
            CHECK(approx[R] == doctest::Approx(counts[R].convert_to<double>() / total).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(walk_count_dp(CirculantGraph(1000, 10), 100, 1000), ResourceError);
}

TEST_CASE("Fourier against exact counts") {
    using Precise = boost::multiprecision::cpp_bin_float_50;
    for (auto [N, W, n] : {std::tuple{64, 4, 20}, std::tuple{256, 16, 12}, std::tuple{8, 1, 64}}) {
        const CirculantGraph g(N, W);
        const auto dp = walk_count_dp(g, n);
        const auto precise = walk_distribution_fourier_precise(g, n);
        const auto plain = walk_distribution_fourier(g, n);
        const Precise total = boost::multiprecision::pow(Precise(g.degree()), n);
        for (Vertex R = 0; R < N; ++R) {
            const double exact = (Precise(dp[R]) / total).convert_to<double>();
            if (exact == 0.0) {
                CHECK(std::abs(precise[R]) < 1e-40);
                CHECK(std::abs(plain[R]) < 1e-14);
            } else {
                CHECK(precise[R] == doctest::Approx(exact).epsilon(1e-12));
                if (exact > 1e-6) CHECK(plain[R] == doctest::Approx(exact).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("non-backtracking counts") {
    const CirculantGraph cycle(8, 1);
    CHECK(nb_walk_count(cycle, 2, 0, 0, {}, {}) == 0);
    CHECK(nb_walk_count(cycle, 8, 0, 0, {}, {}) == 2);
    CHECK(nb_walk_count(cycle, 1, 0, 1, {}, {}) == 1);
    CHECK(nb_walk_count(cycle, 1, 0, 1, {1}, {}) == 0);
    CHECK(nb_walk_count(cycle, 1, 0, 1, {}, {0}) == 0);

    SUBCASE("brute force with constraints") {
        const CirculantGraph g(9, 2);
        const std::set<Vertex> A{1, 7};
        const std::set<Vertex> B{3};
        for (int n = 1; n <= 6; ++n) {
            for (Vertex v = 0; v < 9; ++v) {
                long brute = 0;
                std::vector<Vertex> path{0};
                std::function<void()> extend = [&] {
                    const int i = static_cast<int>(path.size()) - 1;
                    if (i == n) {
                        if (path.back() != v) return;
                        if (n >= 1 && A.count(path[1])) return;
                        if (B.count(path[n - 1])) return;
                        ++brute;
                        return;
                    }
                    for (Vertex d : g.offsets()) {
                        const Vertex next = wrap(path.back() + d, 9);
                        if (i >= 1 && next == path[i - 1]) continue;
                        path.push_back(next);
                        extend();
                        path.pop_back();
                    }
                };
                extend();
                CHECK(nb_walk_count(g, n, 0, v, A, B) == brute);
            }
        }
    }
    SUBCASE("sandwich") {
        const CirculantGraph g(11, 3);
        for (int n = 1; n <= 10; ++n) {
            const auto all = walk_count_dp(g, n);
            for (Vertex v = 0; v < 11; ++v) {
                const auto free = nb_walk_count(g, n, 0, v, {}, {});
                CHECK(nb_walk_count(g, n, 0, v, {1, 2}, {v == 0 ? 1 : 0}) <= free);
                CHECK(free <= all[circular_distance(0, v, 11)]);
            }
        }
    }
}

TEST_CASE("walk asymptotics") {
    const CirculantGraph g(10000, 2);
    const auto a = walk_asymptotics(g, 100, 0);
    CHECK(a.gaussian == doctest::Approx(1.0 / std::sqrt(500 * std::numbers::pi)).epsilon(1e-12));
    CHECK(a.gaussian == doctest::Approx(0.025231).epsilon(1e-4));
    CHECK(a.uniform == 1.0 / 10000);
    CHECK(a.upper_bound > 0.0);
    const auto far = walk_asymptotics(g, 100, 10000 - 7);
    CHECK(far.gaussian == walk_asymptotics(g, 100, 7).gaussian);
    const auto tuned = walk_asymptotics(g, 100, 3, {2.0, 0.5});
    CHECK(tuned.upper_bound ==
          doctest::Approx(2.0 * (std::exp(-0.5 * 9 / 400.0) / (2 * 10.0) + 1e-4)));
}

TEST_CASE("local CLT at moderate size") {
    const CirculantGraph g(4000, 8);
    const int n = 200;
    const auto dist = walk_distribution_fourier(g, n);
    for (Vertex R : {0, 30, 60}) {
        CHECK(dist[R] / walk_asymptotics(g, n, R).gaussian == doctest::Approx(1.0).epsilon(0.05));
    }
}

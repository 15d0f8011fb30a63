#include "bandedge/errors.hpp"
#include "bandedge/sampler.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace bandedge;

namespace {

ComplexVector random_vector(std::size_t n, std::uint64_t salt) {
    auto rng = make_stream({99, 0}, salt);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ComplexVector x(n);
    for (auto& xi : x) xi = {u(rng), u(rng)};
    return x;
}

Complex inner(const ComplexVector& a, const ComplexVector& b) {
    Complex s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double norm2(const ComplexVector& a) { return std::sqrt(inner(a, a).real()); }

} // namespace

TEST_CASE("sampling shapes and determinism") {
    const BandParams p{6, 1, SymmetryClass::signs};
    const auto H = sample_band_matrix(p, {5, 0});
    CHECK(H.entries().size() == 6);
    for (const auto& e : H.entries()) CHECK(std::abs(std::abs(e.value.real()) - 1.0) == 0.0);
    CHECK(H == sample_band_matrix(p, {5, 0}));
    CHECK_FALSE(H.entries() == sample_band_matrix(BandParams{6, 1, SymmetryClass::signs}, {5, 1}).entries());

    const BandParams even{8, 4, SymmetryClass::phases};
    const auto G = sample_band_matrix(even, {1, 2});
    CHECK(G.entries().size() == 28);
    CHECK(validate(G).empty());
}

TEST_CASE("sampled matrices validate") {
    for (int beta : {1, 2}) {
        for (auto [N, W] : {std::pair{2, 1}, std::pair{7, 3}, std::pair{50, 5}, std::pair{64, 32}}) {
            const BandParams p{N, W, symmetry_from_beta(beta)};
            for (std::uint64_t r = 0; r < 3; ++r) CHECK(validate(sample_band_matrix(p, {11, r})).empty());
        }
    }
}

TEST_CASE("entry statistics") {
    SUBCASE("fixed entry over many seeds has mean near zero") {
        // The first canonical entry is the first draw of each replicate stream.
        double sum = 0.0;
        const int samples = 100000;
        for (int r = 0; r < samples; ++r) {
            auto rng = make_stream({3, static_cast<std::uint64_t>(r)});
            sum += (rng() >> 63) != 0 ? -1.0 : 1.0;
        }
        CHECK(std::abs(sum / samples) <= 3.0 / std::sqrt(double(samples)));
        const auto H = sample_band_matrix(BandParams{2000, 64, SymmetryClass::signs}, {3, 7});
        auto rng = make_stream({3, 7});
        CHECK(H.entries()[0].value.real() == ((rng() >> 63) != 0 ? -1.0 : 1.0));
    }
    SUBCASE("replicate streams are uncorrelated") {
        const BandParams p{1000, 5, SymmetryClass::signs};
        const auto a = sample_band_matrix(p, {42, 0});
        const auto b = sample_band_matrix(p, {42, 1});
        const std::size_t n = 5000;
        REQUIRE(a.entries().size() >= n);
        double sab = 0, sa = 0, sb = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = a.entries()[i].value.real();
            const double y = b.entries()[i].value.real();
            sab += x * y;
            sa += x;
            sb += y;
        }
        const double r = (sab / n - sa / n * sb / n) /
                         std::sqrt((1 - (sa / n) * (sa / n)) * (1 - (sb / n) * (sb / n)));
        CHECK(std::abs(r) <= 0.05);
    }
    SUBCASE("phases cover the circle") {
        const BandParams p{400, 10, SymmetryClass::phases};
        const auto H = sample_band_matrix(p, {8, 0});
        Complex mean{};
        for (const auto& e : H.entries()) mean += e.value;
        mean /= double(H.entries().size());
        CHECK(std::abs(mean) < 4.0 / std::sqrt(double(H.entries().size())));
    }
}

TEST_CASE("matvec") {
    const BandParams p{50, 5, SymmetryClass::phases};
    const auto H = sample_band_matrix(p, {4, 0});
    const Eigen::MatrixXcd D = H.dense();
    const auto x = random_vector(50, 1);
    const auto y = random_vector(50, 2);
    const auto Hx = matvec(H, x);
    Eigen::VectorXcd ex(50);
    for (int i = 0; i < 50; ++i) ex(i) = x[i];
    const Eigen::VectorXcd dx = D * ex;
    for (int i = 0; i < 50; ++i) CHECK(std::abs(Hx[i] - dx(i)) < 1e-12);

    const auto Hy = matvec(H, y);
    CHECK(std::abs(inner(Hx, y) - inner(x, Hy)) <= 1e-12 * norm2(x) * norm2(y));

    ComplexVector e(50, 0.0);
    e[7] = 1.0;
    const auto column = matvec(H, e);
    for (int i = 0; i < 50; ++i) CHECK(column[i] == H.at(i, 7));
    CHECK_THROWS_AS(matvec(H, ComplexVector(49)), DomainError);
    CHECK((D - D.adjoint()).norm() == 0.0);
    for (int i = 0; i < 50; ++i) CHECK(D(i, i) == Complex{});
}

TEST_CASE("validation catches each invariant") {
    const BandParams p{10, 2, SymmetryClass::signs};
    const auto H = sample_band_matrix(p, {1, 0});
    CHECK(validate(H).empty());

    auto kinds = [](const BandMatrix& M) {
        std::set<ViolationKind> out;
        for (const auto& v : validate(M)) out.insert(v.kind);
        return out;
    };
    const auto diag = validate(H.with_entry(0, 0, 1.0));
    REQUIRE(diag.size() == 1);
    CHECK(diag[0].kind == ViolationKind::diagonal);
    CHECK(diag[0].u == 0);
    CHECK(kinds(H.with_entry(0, 5, 1.0)) == std::set{ViolationKind::band});
    CHECK(kinds(H.with_entry(0, 12, 1.0)) == std::set{ViolationKind::out_of_range});
    CHECK(kinds(H.with_entry(0, 1, 0.5)) == std::set{ViolationKind::sign_value});
    CHECK(kinds(H.with_entry(1, 0, -H.at(0, 1))) == std::set{ViolationKind::hermitian});
    CHECK(kinds(H.with_entry(1, 0, H.at(0, 1))) == std::set{ViolationKind::duplicate});

    const auto G = sample_band_matrix(BandParams{10, 2, SymmetryClass::phases}, {1, 0});
    CHECK(kinds(G.with_entry(0, 1, Complex(0.6, 0.7))) == std::set{ViolationKind::unit_modulus});
    auto entries = G.entries();
    entries.push_back(entries.front());
    CHECK(kinds(BandMatrix(G.params(), entries)) == std::set{ViolationKind::duplicate});
}

TEST_CASE("sign enumeration") {
    const SignAssignments four(BandParams{4, 1, SymmetryClass::signs});
    CHECK(four.size() == 16);
    std::set<std::vector<double>> seen;
    double trace_sq = 0;
    four.for_each([&](const BandMatrix& H) {
        std::vector<double> signs;
        for (const auto& e : H.entries()) signs.push_back(e.value.real());
        seen.insert(signs);
        trace_sq += (H.dense() * H.dense()).trace().real();
    });
    CHECK(seen.size() == 16);
    CHECK(trace_sq / 16 == doctest::Approx(8.0));
    CHECK(SignAssignments(BandParams{7, 2, SymmetryClass::signs}).size() == 16384);
    CHECK_THROWS_AS(SignAssignments(BandParams{7, 2, SymmetryClass::phases}), DomainError);
    CHECK_THROWS_AS(SignAssignments(BandParams{25, 1, SymmetryClass::signs}), ResourceError);
}

TEST_CASE("matrix CSV round trip") {
    const auto H = sample_band_matrix(BandParams{12, 3, SymmetryClass::phases}, {77, 3});
    std::stringstream buffer;
    write_matrix_csv(buffer, H);
    CHECK(buffer.str().rfind("u,v,re,im\n", 0) == 0);
    const auto back = read_matrix_csv(buffer, H.params());
    CHECK(back == H);

    std::stringstream bad_header("a,b\n0,1,1,0\n");
    CHECK_THROWS_AS(read_matrix_csv(bad_header, H.params()), DomainError);
    std::stringstream bad_row("u,v,re,im\n0;1,1,0\n");
    CHECK_THROWS_AS(read_matrix_csv(bad_row, H.params()), DomainError);
}

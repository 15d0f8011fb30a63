#include "bandedge/errors.hpp"
#include "bandedge/params.hpp"

#include <doctest.h>

using namespace bandedge;

TEST_CASE("beta round trip") {
    CHECK(beta_of(symmetry_from_beta(1)) == 1);
    CHECK(beta_of(symmetry_from_beta(2)) == 2);
    CHECK_THROWS_AS(symmetry_from_beta(3), DomainError);
    CHECK(to_string(SymmetryClass::phases) == "phases");
}

TEST_CASE("circular distance and wrap") {
    CHECK(wrap(-1, 7) == 6);
    CHECK(wrap(14, 7) == 0);
    CHECK(circular_distance(0, 6, 7) == 1);
    CHECK(circular_distance(1, 5, 8) == 4);
    CHECK(circular_distance(3, 3, 8) == 0);
}

TEST_CASE("neighbor offsets list each residue once") {
    CHECK(neighbor_offsets(7, 2) == std::vector<Vertex>{-2, -1, 1, 2});
    // W = N/2: the antipode -4 == 4 appears once.
    CHECK(neighbor_offsets(8, 4) == std::vector<Vertex>{-3, -2, -1, 1, 2, 3, 4});
}

TEST_CASE("band params validation and degree") {
    CHECK_NOTHROW(BandParams{7, 3, SymmetryClass::signs}.check());
    CHECK_THROWS_AS((BandParams{7, 4, SymmetryClass::signs}.check()), DomainError);
    CHECK_THROWS_AS((BandParams{7, 0, SymmetryClass::signs}.check()), DomainError);
    CHECK_THROWS_AS((BandParams{1, 1, SymmetryClass::signs}.check()), DomainError);
    CHECK(BandParams{7, 2, SymmetryClass::signs}.degree() == 4);
    CHECK(BandParams{7, 2, SymmetryClass::signs}.edge_count() == 14);
    CHECK(BandParams{8, 4, SymmetryClass::signs}.degree() == 7);
    CHECK(BandParams{8, 4, SymmetryClass::signs}.edge_count() == 28);
    CHECK(BandParams{2, 1, SymmetryClass::signs}.edge_count() == 1);
}

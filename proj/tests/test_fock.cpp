#include <doctest.h>

#include <cmath>

#include "hallq/fock.hpp"

using namespace hq;

namespace {

double binom(int n, int k) { return std::round(std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0))); }

}  // namespace

TEST_CASE("sector dimensions are binomial counts") {
    const SiteSpace hb = SiteSpace::hardcore_boson();
    CHECK(sector_dimension(hb, 9, 2) == binom(9, 2));
    CHECK(sector_dimension(hb, 25, 2) == 300);
    CHECK(sector_dimension(SiteSpace::fermions(2), 9, 9) == 48620);
    const SectorBasis b = build_sector_basis(TorusLattice(4), hb, 2);
    CHECK(b.dim() == 120);
    for (int i = 0; i < b.dim(); ++i) CHECK(b.find(b.code(i)) == i);
}

TEST_CASE("fermion operators anticommute") {
    const LocalSpace ls(SiteSpace::fermions(2), 2);
    const Eigen::MatrixXcd id = ls.identity();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const Eigen::MatrixXcd ca = ls.annihilate(a / 2, a % 2), cb = ls.annihilate(b / 2, b % 2);
            const Eigen::MatrixXcd anti = ca * cb.adjoint() + cb.adjoint() * ca;
            CHECK((anti - (a == b ? id : Eigen::MatrixXcd::Zero(4 * 4, 4 * 4))).norm() < 1e-14);
            CHECK((ca * cb + cb * ca).norm() < 1e-14);
        }
}

TEST_CASE("charge operator sums to the sector charge") {
    const TorusLattice lat(3);
    const SectorBasis b = build_sector_basis(lat, SiteSpace::fermions(2), 3);
    const SiteSet all(lat, std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8});
    CHECK((charge_operator(all, b).array() - 3.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("embedded hopping is Hermitian and conserves charge") {
    const SiteSpace ss = SiteSpace::hardcore_boson();
    const LocalSpace ls(ss, 2);
    Eigen::MatrixXcd m = ls.lower(1).adjoint() * ls.lower(0);
    m += m.adjoint().eval();
    const SectorBasis b = build_sector_basis(TorusLattice(3), ss, 2);
    const SpMat h = embed_local_operator(make_local_term(ss, {0, 4}, m), b);
    CHECK(Eigen::MatrixXcd(h - SpMat(h.adjoint())).norm() < 1e-15);
    // one particle on 0 or 4 and one elsewhere: 2 * 7 configurations connect in pairs
    CHECK(h.nonZeros() == 14);
}

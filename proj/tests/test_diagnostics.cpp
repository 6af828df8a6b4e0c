#include <doctest.h>

#include <random>

#include "hallq/diagnostics.hpp"
#include "hallq/models.hpp"

using namespace hq;

namespace {

Eigen::VectorXcd random_state(int d, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(d);
    for (int i = 0; i < d; ++i) v(i) = cd(g(rng), g(rng));
    return v.normalized();
}

}  // namespace

TEST_CASE("log-log trend of an exact power law") {
    const TrendFit t = loglog_trend({1, 2, 4, 8}, {3, 0.75, 0.1875, 0.046875});
    CHECK(t.slope == doctest::Approx(-2.0));
    CHECK(t.monotone_decreasing);
}

TEST_CASE("trace norm") {
    const Eigen::MatrixXcd m = (Eigen::MatrixXcd(2, 2) << 1, 0, 0, -2).finished();
    CHECK(trace_norm(m) == doctest::Approx(3.0));
}

TEST_CASE("boson reduced density matrix equals the full-tensor partial trace") {
    const TorusLattice lat(3);
    const SectorBasis b = build_sector_basis(lat, SiteSpace::hardcore_boson(), 2);
    const Eigen::VectorXcd psi = random_state(b.dim(), 1);
    const std::vector<int> keep{0, 4, 5};
    const ReducedIndex idx = reduced_index(b, SiteSet(lat, keep));
    const Eigen::MatrixXcd rho = reduced_density_matrix(idx, psi);

    // full 2^9 vector, kept bits gathered into an 8-dim factor
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(8, 64);
    for (int i = 0; i < b.dim(); ++i) {
        int k = 0, t = 0, tk = 0;
        for (int s = 0; s < 9; ++s) {
            const int bit = b.level(i, s);
            auto it = std::find(keep.begin(), keep.end(), s);
            if (it != keep.end())
                k |= bit << (it - keep.begin());
            else
                t |= bit << tk++;
        }
        full(k, t) = psi(i);
    }
    const Eigen::MatrixXcd ref = full * full.adjoint();
    // keep codes are ascending mixed-radix codes with the first kept site least significant
    for (std::size_t a = 0; a < idx.keep_codes.size(); ++a)
        for (std::size_t c = 0; c < idx.keep_codes.size(); ++c)
            CHECK(std::abs(rho(a, c) - ref(int(idx.keep_codes[a]), int(idx.keep_codes[c]))) < 1e-14);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-14);
}

TEST_CASE("fermion reduced density matrix reproduces local expectation values") {
    const ModelSpec s = make_model({"qwz_fermion", {}, 3}, 3);
    const SectorBasis b = build_sector_basis(s.lattice, s.site_space, 3);
    const Eigen::VectorXcd psi = random_state(b.dim(), 4);
    const std::vector<int> keep{1, 5};
    const ReducedIndex idx = reduced_index(b, SiteSet(s.lattice, keep));
    const Eigen::MatrixXcd rho = reduced_density_matrix(idx, psi);

    const LocalSpace ls(s.site_space, 2);
    const int d = s.site_space.dim();
    Eigen::MatrixXcd op = ls.create(0, 1) * ls.annihilate(1, 0) + 0.4 * ls.create(0, 0) * ls.annihilate(1, 1);
    op += op.adjoint().eval();
    op += 0.7 * ls.number(1, 1) * ls.number(0, 0);
    const SpMat emb = embed_local_operator(make_local_term(s.site_space, keep, op), b);
    const cd direct = psi.dot(emb * psi);

    // local index: first site most significant; keep code: first kept site least significant
    const int n = static_cast<int>(idx.keep_codes.size());
    cd via_rho = 0.0;
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
            const auto la = int(idx.keep_codes[a] % d) * d + int(idx.keep_codes[a] / d);
            const auto lc = int(idx.keep_codes[c] % d) * d + int(idx.keep_codes[c] / d);
            via_rho += rho(a, c) * op(lc, la);
        }
    CHECK(std::abs(direct - via_rho) < 1e-13);
    CHECK(std::abs(direct) > 1e-3);
}

TEST_CASE("partial trace and energy checks at zero flux") {
    auto sys = ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, 3));
    const SpectralFilter f(ground_data(*sys, {}).gap / 2);
    const auto [near, far] = partial_trace_check(sys, 0.0, f);
    CHECK(near.measured < 1e-12);
    CHECK(far.measured < 1e-12);
    const LemmaCheckResult e = energy_estimate_check(sys, 0.0, f);
    CHECK(e.measured < 1e-12);
}

TEST_CASE("size trend verdicts") {
    CHECK(*size_trend(LemmaId::BigLoop, "B2", {3, 4, 5}, {1e-3, 1e-4, 1e-6}).pass);
    CHECK_FALSE(*size_trend(LemmaId::BigLoop, "B2", {3, 4, 5}, {1e-3, 1e-2, 1e-6}).pass);
}

TEST_CASE("random Omega_0 operator is Hermitian, charge conserving and normalized") {
    const ModelSpec s = make_model({"xy_flux_boson", {}, 1}, 8);
    const LocalTerm a = random_omega0_operator(s, 7);
    CHECK((a.matrix - a.matrix.adjoint()).norm() < 1e-14);
    CHECK(op_norm(a.matrix) == doctest::Approx(1.0));
    CHECK((symmetrize_interaction(a, s.site_space).matrix - a.matrix).norm() < 1e-14);
}
